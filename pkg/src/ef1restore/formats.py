"""Text formats: instance files, JSON-lines traces and PMR files.

Instance file (``#`` starts a comment, blank lines are ignored)::

    mode: goods
    agents: 3
    items: g1 g2 g3
    valuation * additive
      g1 3
      g2 1
      g3 1
    allocation
      0:
      1: g1
      2: g2 g3
    distinguished: 0

A valuation header names one agent or ``*`` (all agents) and a kind; its body
is indented.  Body lines per kind:

* ``additive``: ``<item> <value>``
* ``generators``: one minimal value-1 set per line, items separated by spaces
* ``graphical``: ``<item> <a> <b>`` with ``-`` for a pendant item's missing endpoint
* ``table``: ``<value> <items...>``; a line with a value alone is the empty set

``allocation`` and ``distinguished`` are optional.  :func:`emit_instance`
writes the canonical form: fixed key order, items in natural order.
"""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from .core import (
    Additive,
    Allocation,
    Exchange,
    Generators,
    Graphical,
    Instance,
    Mode,
    Operation,
    Table,
    Transfer,
    natural_key,
    sort_items,
)
from .errors import ChecksumError, InputError, ParseError
from .reduction import PmrInstance

KINDS = ("additive", "generators", "graphical", "table")
TRACE_FORMAT = "ef1restore-trace"


def write_atomic(path: str | os.PathLike, text: str) -> None:
    """Write ``text`` to a temporary sibling, then rename it over ``path``."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# --------------------------------------------------------------------------
# instance files


@dataclass
class _Line:
    number: int
    text: str
    indented: bool


def _lines(document: str) -> list[_Line]:
    out = []
    for k, raw in enumerate(document.splitlines(), start=1):
        text = raw.split("#", 1)[0].rstrip()
        if text.strip():
            out.append(_Line(k, text.strip(), text[0] in " \t"))
    return out


def _int(token: str, line: int, field: str) -> int:
    try:
        return int(token)
    except ValueError:
        raise ParseError(f"expected an integer, got {token!r}", line, field) from None


def _parse_body(kind: str, body: list[_Line], items: list[str]) -> list:
    """The valuation a block describes; graphical blocks yield their edge list."""
    if kind == "additive":
        values = {}
        for ln in body:
            parts = ln.text.split()
            if len(parts) != 2:
                raise ParseError("additive line needs '<item> <value>'", ln.number, "valuation")
            if parts[0] in values:
                raise ParseError(f"item {parts[0]!r} listed twice", ln.number, "valuation")
            values[parts[0]] = _int(parts[1], ln.number, "valuation")
        return [Additive(values)]
    if kind == "generators":
        sets = []
        for ln in body:
            sets.append(frozenset(ln.text.split()))
        return [Generators(tuple(sets))]
    if kind == "graphical":
        edges = []
        for ln in body:
            parts = ln.text.split()
            if len(parts) != 3:
                raise ParseError("graphical line needs '<item> <a> <b>'", ln.number, "valuation")
            a = _int(parts[1], ln.number, "valuation")
            b = None if parts[2] == "-" else _int(parts[2], ln.number, "valuation")
            edges.append((parts[0], a, b))
        return [tuple(edges)]
    entries: dict[frozenset, int] = {}
    for ln in body:
        parts = ln.text.split()
        key = frozenset(parts[1:])
        if key in entries:
            raise ParseError(f"table lists subset {sort_items(key)} twice", ln.number, "valuation")
        entries[key] = _int(parts[0], ln.number, "valuation")
    try:
        return [Table.from_mapping(sort_items(items), entries)]
    except InputError as exc:
        raise ParseError(str(exc), body[0].number if body else None, "valuation") from None


def parse_instance(document: str) -> tuple[Instance, Optional[Allocation]]:
    """Parse an instance file; the allocation is ``None`` when the file has none."""
    lines = _lines(document)
    header: dict[str, tuple[str, int]] = {}
    blocks: list[tuple[_Line, list[_Line]]] = []
    k = 0
    while k < len(lines):
        ln = lines[k]
        if ln.indented:
            raise ParseError("unexpected indented line", ln.number)
        body = []
        k += 1
        while k < len(lines) and lines[k].indented:
            body.append(lines[k])
            k += 1
        if ln.text.startswith("valuation ") or ln.text == "allocation":
            blocks.append((ln, body))
            continue
        if ":" not in ln.text:
            raise ParseError(f"expected 'key: value', got {ln.text!r}", ln.number)
        key, value = (s.strip() for s in ln.text.split(":", 1))
        if key not in ("mode", "agents", "items", "distinguished"):
            raise ParseError(f"unknown key {key!r}", ln.number, key)
        if key in header:
            raise ParseError("key given twice", ln.number, key)
        if body:
            raise ParseError("unexpected indented block", body[0].number, key)
        header[key] = (value, ln.number)

    for key in ("mode", "agents", "items"):
        if key not in header:
            raise ParseError(f"missing required key {key!r}", None, key)
    mode_text, mode_line = header["mode"]
    try:
        mode = Mode(mode_text)
    except ValueError:
        raise ParseError(f"unknown mode {mode_text!r}", mode_line, "mode") from None
    n = _int(header["agents"][0], header["agents"][1], "agents")
    if n < 1:
        raise ParseError("need at least one agent", header["agents"][1], "agents")
    items = header["items"][0].split()
    if len(set(items)) != len(items):
        raise ParseError("item ids must be unique", header["items"][1], "items")

    per_agent: list = [None] * n
    shared_kind = None
    allocation_block = None
    for ln, body in blocks:
        if ln.text == "allocation":
            if allocation_block is not None:
                raise ParseError("allocation given twice", ln.number, "allocation")
            allocation_block = (ln, body)
            continue
        parts = ln.text.split()
        if len(parts) != 3:
            raise ParseError("valuation header needs '<agent|*> <kind>'", ln.number, "valuation")
        who, kind = parts[1], parts[2]
        if kind not in KINDS:
            raise ParseError(f"unknown valuation tag {kind!r}", ln.number, "valuation")
        targets = range(n) if who == "*" else [_int(who, ln.number, "valuation")]
        for i in targets:
            if not 0 <= i < n:
                raise ParseError(f"agent {i} out of range", ln.number, "valuation")
            if per_agent[i] is not None:
                raise ParseError(f"agent {i} has two valuations", ln.number, "valuation")
        (obj,) = _parse_body(kind, body, items)
        if who == "*":
            shared_kind = kind
        for i in targets:
            per_agent[i] = Graphical(i, obj) if kind == "graphical" else obj
    missing = [i for i in range(n) if per_agent[i] is None]
    if missing:
        raise ParseError(f"agents {missing} have no valuation", None, "valuation")
    identical = shared_kind is not None and shared_kind != "graphical"
    inst = Instance(mode, items, tuple(per_agent), identical=identical)

    X = None
    if allocation_block is not None:
        ln, body = allocation_block
        bundles: list = [None] * n
        for row in body:
            if ":" not in row.text:
                raise ParseError("allocation line needs '<agent>: <items>'", row.number, "allocation")
            who, rest = row.text.split(":", 1)
            i = _int(who.strip(), row.number, "allocation")
            if not 0 <= i < n:
                raise ParseError(f"agent {i} out of range", row.number, "allocation")
            if bundles[i] is not None:
                raise ParseError(f"agent {i} listed twice", row.number, "allocation")
            bundles[i] = rest.split()
        d = 0
        if "distinguished" in header:
            d = _int(*header["distinguished"], "distinguished")
        X = Allocation(tuple(b or () for b in bundles), distinguished=d)
    elif "distinguished" in header:
        raise ParseError("distinguished agent without an allocation", header["distinguished"][1], "distinguished")
    return inst, X


def _emit_body(v) -> list[str]:
    if isinstance(v, Additive):
        return [f"{g} {v.values[g]}" for g in sort_items(v.values)]
    if isinstance(v, Generators):
        return [" ".join(sort_items(s)) for s in v.sets]
    if isinstance(v, Graphical):
        return [f"{g} {a} {'-' if b is None else b}" for g, a, b in v.edges]
    out = []
    for mask, val in enumerate(v.entries):
        if val is None:
            continue
        subset = sort_items(v.items[t] for t in range(len(v.items)) if mask >> t & 1)
        out.append(" ".join([str(val)] + subset))
    return out


def _kind(v) -> str:
    return {Additive: "additive", Generators: "generators", Graphical: "graphical", Table: "table"}[type(v)]


def emit_instance(inst: Instance, X: Optional[Allocation] = None) -> str:
    out = [f"mode: {inst.mode.value}", f"agents: {inst.n}", f"items: {' '.join(inst.items)}"]
    vals = inst.valuations
    shared_graph = inst.is_graphical and all(v.edges == vals[0].edges for v in vals) and all(
        v.agent == i for i, v in enumerate(vals)
    )
    if inst.identical or shared_graph:
        out.append(f"valuation * {_kind(vals[0])}")
        out += ["  " + s for s in _emit_body(vals[0])]
    else:
        for i, v in enumerate(vals):
            out.append(f"valuation {i} {_kind(v)}")
            out += ["  " + s for s in _emit_body(v)]
    if X is not None:
        out.append("allocation")
        for i, b in enumerate(X.bundles):
            out.append(f"  {i}: {' '.join(sort_items(b))}".rstrip())
        out.append(f"distinguished: {X.distinguished}")
    return "\n".join(out) + "\n"


def instance_checksum(inst: Instance, X: Optional[Allocation] = None) -> str:
    return hashlib.sha256(emit_instance(inst, X).encode()).hexdigest()


def load_instance(path: str | os.PathLike) -> tuple[Instance, Optional[Allocation]]:
    return parse_instance(Path(path).read_text(encoding="utf-8"))


# --------------------------------------------------------------------------
# traces


def _op_record(step: int, op: Operation) -> dict:
    if isinstance(op, Transfer):
        return {"step": step, "op": "transfer", "agents": [op.source, op.target], "items": [op.item]}
    return {"step": step, "op": "exchange", "agents": [op.i, op.j], "items": [op.item_i, op.item_j]}


def emit_trace(inst: Instance, initial: Allocation, steps: list[Operation], fairness: str = "ef1") -> str:
    header = {
        "format": TRACE_FORMAT,
        "version": 1,
        "instance_sha256": instance_checksum(inst, initial),
        "fairness": fairness,
        "steps": len(steps),
    }
    lines = [json.dumps(header, sort_keys=True)]
    lines += [json.dumps(_op_record(k, op), sort_keys=True) for k, op in enumerate(steps, start=1)]
    return "\n".join(lines) + "\n"


def parse_trace(
    document: str, inst: Optional[Instance] = None, initial: Optional[Allocation] = None
) -> tuple[dict, list[Operation]]:
    """Header and operations of a trace; checks the checksum when an instance is given."""
    rows = [(k, ln) for k, ln in enumerate(document.splitlines(), start=1) if ln.strip()]
    if not rows:
        raise ParseError("empty trace")
    records = []
    for k, ln in rows:
        try:
            records.append((k, json.loads(ln)))
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid JSON: {exc.msg}", k) from None
    (hline, header), body = records[0], records[1:]
    if not isinstance(header, dict) or header.get("format") != TRACE_FORMAT:
        raise ParseError("first record is not a trace header", hline, "format")
    if "instance_sha256" not in header:
        raise ParseError("header lacks the instance checksum", hline, "instance_sha256")
    if inst is not None:
        actual = instance_checksum(inst, initial)
        if actual != header["instance_sha256"]:
            raise ChecksumError(
                f"trace was recorded for instance {header['instance_sha256'][:12]}, not {actual[:12]}",
                hline,
                "instance_sha256",
            )
    ops: list[Operation] = []
    for expected, (k, rec) in enumerate(body, start=1):
        if not isinstance(rec, dict):
            raise ParseError("record is not an object", k)
        for key in ("step", "op", "agents", "items"):
            if key not in rec:
                raise ParseError("missing key", k, key)
        if rec["step"] != expected:
            raise ParseError(f"expected step {expected}, got {rec['step']}", k, "step")
        agents, items = rec["agents"], rec["items"]
        if rec["op"] == "transfer" and len(agents) == 2 and len(items) == 1:
            ops.append(Transfer(int(agents[0]), int(agents[1]), str(items[0])))
        elif rec["op"] == "exchange" and len(agents) == 2 and len(items) == 2:
            ops.append(Exchange(int(agents[0]), int(agents[1]), str(items[0]), str(items[1])))
        else:
            raise ParseError(f"malformed {rec['op']!r} record", k, "op")
    if "steps" in header and header["steps"] != len(ops):
        raise ParseError(f"header announces {header['steps']} steps, found {len(ops)}", hline, "steps")
    return header, ops


# --------------------------------------------------------------------------
# PMR files


def _edge(token: str, line: int, field: str) -> tuple[str, str]:
    parts = token.split("-")
    if len(parts) != 2 or not all(parts):
        raise ParseError(f"edge must look like 'a-b', got {token!r}", line, field)
    return parts[0], parts[1]


def parse_pmr(document: str) -> PmrInstance:
    """``A:``, ``B:``, ``edges:``, ``start:`` and ``target:`` lines; edges are ``a-b`` tokens."""
    fields: dict[str, tuple[list[str], int]] = {}
    for ln in _lines(document):
        if ":" not in ln.text:
            raise ParseError(f"expected 'key: value', got {ln.text!r}", ln.number)
        key, value = (s.strip() for s in ln.text.split(":", 1))
        if key not in ("A", "B", "edges", "start", "target"):
            raise ParseError(f"unknown key {key!r}", ln.number, key)
        if key in fields:
            raise ParseError("key given twice", ln.number, key)
        fields[key] = (value.split(), ln.number)
    for key in ("A", "B", "edges", "start", "target"):
        if key not in fields:
            raise ParseError(f"missing required key {key!r}", None, key)
    edge_sets = {
        key: frozenset(_edge(t, fields[key][1], key) for t in fields[key][0]) for key in ("edges", "start", "target")
    }
    return PmrInstance(tuple(fields["A"][0]), tuple(fields["B"][0]), **edge_sets)


def emit_pmr(P: PmrInstance) -> str:
    def edges(es) -> str:
        return " ".join(f"{a}-{b}" for a, b in sorted(es, key=lambda e: (natural_key(e[0]), natural_key(e[1]))))

    return (
        f"A: {' '.join(P.A)}\nB: {' '.join(P.B)}\nedges: {edges(P.edges)}\n"
        f"start: {edges(P.start)}\ntarget: {edges(P.target)}\n"
    )
