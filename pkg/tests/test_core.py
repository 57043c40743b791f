import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracle
from ef1restore.core import (
    Additive,
    Allocation,
    Exchange,
    Generators,
    Instance,
    Mode,
    Table,
    Transfer,
    apply,
    efx_envy,
    envy_amount,
    envy_amount_chores,
    envy_amount_goods,
    envy_amount_mixed,
    envy_graph,
    envy_matrix,
    is_ef1,
    is_near_ef1,
    is_near_fair,
    is_valid,
    natural_key,
    reverse,
    sort_items,
    validate,
    value,
)
from ef1restore.corpus import gen_efx_counterexample, gen_mixed_counterexample
from ef1restore.errors import InputError, UnsupportedModeError, ValidationError
from ef1restore.reduction import PmrInstance, build_reduction
from ef1restore.restore_orientation import gen_path_lower_bound
from strategies import allocations, any_instance, generator_instances, instance_with_allocation, subsets


@pytest.fixture
def path3():
    M, X = gen_path_lower_bound(3)
    return M.instance(), X


def swap_pmr():
    E = {("a1", "b1"), ("a1", "b2"), ("a2", "b1"), ("a2", "b2")}
    return PmrInstance(("a1", "a2"), ("b1", "b2"), E, {("a1", "b1"), ("a2", "b2")}, {("a1", "b2"), ("a2", "b1")})


def identical(values, n=2, mode=Mode.GOODS):
    return Instance.with_identical(mode, list(values), Additive(values), n)


# ---------------------------------------------------------------- values


def test_value_additive_pair():
    v = Additive({"g5": 6, "g6": 6})
    assert value(v, {"g5", "g6"}) == 12


def test_value_generators_last_reduction_agent():
    R = build_reduction(swap_pmr())
    v = R.instance.valuations[R.n + 2]
    assert value(v, {"r3"}) == 0
    assert value(v, {"r3", "r4"}) == 1


def test_value_of_empty_set_is_zero():
    assert value(Additive({"a": 3}), ()) == 0
    assert value(Generators((frozenset({"a"}),)), ()) == 0
    assert value(Table.from_mapping(["a"], {frozenset(): 0, frozenset({"a"}): 4}), ()) == 0


def test_value_unknown_item():
    with pytest.raises(InputError):
        value(Additive({"a": 1}), {"b"})


def test_table_missing_entry():
    t = Table.from_mapping(["a", "b"], {frozenset(): 0, frozenset({"a"}): 1})
    with pytest.raises(ValidationError):
        t.value({"a", "b"})


def test_natural_order():
    assert sort_items(["g10", "g2", "g1"]) == ["g1", "g2", "g10"]
    assert natural_key("a2") < natural_key("a10")


@settings(max_examples=60, deadline=None)
@given(generator_instances(max_m=8))
def test_generators_monotone_and_binary(inst):
    v = inst.valuations[0]
    vals = {frozenset(S): value(v, S) for S in subsets(inst.items)}
    assert set(vals.values()) <= {0, 1}
    for S, x in vals.items():
        for g in inst.items:
            assert vals[S | {g}] >= x


# ---------------------------------------------------------------- envy amounts


def test_goods_envy_path_instance(path3):
    inst, X = path3
    assert envy_amount_goods(inst, 0, 1, X) == 1


def test_goods_envy_equal_singletons():
    inst = identical({"a": 5, "b": 5})
    assert envy_amount_goods(inst, 0, 1, Allocation(({"a"}, {"b"}))) == -5


def test_goods_envy_best_removal():
    inst = identical({"g1": 3, "g2": 1, "g3": 1})
    assert envy_amount_goods(inst, 0, 1, Allocation(({"g2"}, {"g1", "g3"}))) == 0


def test_goods_envy_same_agent():
    inst = identical({"a": 1})
    with pytest.raises(InputError):
        envy_amount_goods(inst, 1, 1, Allocation(({"a"}, set())))


def test_chores_envy_towards_empty_bundle():
    inst = identical({"c1": -1, "c2": -1}, mode=Mode.CHORES)
    assert envy_amount_chores(inst, 0, 1, Allocation(({"c1", "c2"}, set()))) == 1


def test_chores_envy_from_empty_bundle():
    inst = identical({"c1": -2, "c2": -1}, mode=Mode.CHORES)
    assert envy_amount_chores(inst, 0, 1, Allocation((set(), {"c1", "c2"}))) == -3


def test_chores_envy_symmetric_singletons():
    inst = identical({"c1": -1, "c2": -1}, mode=Mode.CHORES)
    assert envy_amount_chores(inst, 0, 1, Allocation(({"c1"}, {"c2"}))) == -1


def test_mixed_envy_counterexample():
    inst, X = gen_mixed_counterexample()
    assert envy_amount_mixed(inst, 0, 1, X) > 0
    assert envy_amount_mixed(inst, 2, 1, X) <= 0
    E = envy_matrix(inst, X)
    assert [(i, j) for i in range(4) for j in range(4) if E[i, j] > 0] == [(0, 1)]


def test_mixed_envy_single_good():
    inst = identical({"g": 4, "c": -1}, mode=Mode.MIXED)
    assert envy_amount_mixed(inst, 0, 1, Allocation(({"c"}, {"g"}))) == 1
    assert envy_amount_mixed(inst, 0, 1, Allocation(({"g"}, {"c"}))) == -5


def test_mode_guards():
    inst = identical({"a": 1})
    X = Allocation(({"a"}, set()))
    with pytest.raises(UnsupportedModeError):
        envy_amount_chores(inst, 0, 1, X)
    t = Instance(Mode.MIXED, ["a"], (Table(("a",), (0, 1)), Table(("a",), (0, 1))))
    with pytest.raises(UnsupportedModeError):
        envy_amount_mixed(t, 0, 1, X)


# ---------------------------------------------------------------- EF1 / near-EF1 / EFX


def test_path_instance_is_near_ef1(path3):
    inst, X = path3
    assert not is_ef1(inst, X)
    assert is_near_ef1(inst, X)


def test_single_agent_is_ef1():
    inst = identical({"a": 1, "b": 2}, n=1)
    assert is_ef1(inst, Allocation(({"a", "b"},)))


def test_reduction_target_is_ef1():
    R = build_reduction(swap_pmr())
    assert is_ef1(R.instance, R.target)


def test_efx_envy_counterexample():
    inst, X = gen_efx_counterexample()
    assert efx_envy(inst, 0, 1, X)
    assert not efx_envy(inst, 1, 0, X)
    assert is_near_fair(inst, X, "efx")


def test_efx_envy_singleton_never():
    inst = identical({"a": 1, "b": 100})
    assert not efx_envy(inst, 0, 1, Allocation(({"a"}, {"b"})))


def test_efx_needs_goods():
    inst = identical({"c": -1}, mode=Mode.CHORES)
    with pytest.raises(UnsupportedModeError):
        efx_envy(inst, 0, 1, Allocation(({"c"}, set())))


# ---------------------------------------------------------------- envy graph


def test_envy_graph_path(path3):
    inst, X = path3
    G = envy_graph(inst, X)
    assert G.edges == {(0, 1), (1, 2)}
    assert G.sinks() == [2]
    assert G.is_acyclic()


def test_envy_graph_empty_bundles():
    inst = identical({"a": 1, "b": 1}, n=3)
    assert not envy_graph(inst, Allocation((set(), set(), {"a", "b"}))).edges - {(0, 2), (1, 2)}
    assert envy_graph(Instance.with_identical(Mode.GOODS, [], Additive({}), 3), Allocation(((), (), ()))).edges == set()


def test_envy_graph_efx_counterexample():
    inst, X = gen_efx_counterexample()
    assert envy_graph(inst, X).edges == {(0, 1)}


# ---------------------------------------------------------------- apply


def test_apply_transfer(path3):
    inst, X = path3
    Y = apply(X, Transfer(2, 1, "g5"))
    assert Y.bundles[2] == {"g6", "g7", "g8"}
    assert Y.bundles[1] == {"g2", "g3", "g4", "g5"}
    assert X.bundles[2] == {"g5", "g6", "g7", "g8"}


def test_apply_reverse(path3):
    _, X = path3
    op = Transfer(2, 1, "g5")
    assert apply(apply(X, op), reverse(op)) == X


def test_apply_exchange_on_reduction():
    R = build_reduction(swap_pmr())
    Y = apply(R.start, Exchange(1, 2, "b1", "b2"))
    assert Y.bundles[1] == {"a1", "abar1", "b2"}


@pytest.mark.parametrize(
    "op",
    [Transfer(0, 1, "g5"), Transfer(1, 1, "g2"), Exchange(0, 0, "g1", "g1"), Exchange(0, 1, "g1", "g9"), Transfer(0, 7, "g1")],
)
def test_apply_rejects_malformed(path3, op):
    _, X = path3
    with pytest.raises(InputError):
        apply(X, op)


@settings(max_examples=80, deadline=None)
@given(instance_with_allocation(), st.data())
def test_apply_reverse_roundtrip(pair, data):
    inst, X = pair
    held = [(i, g) for i, B in enumerate(X.bundles) for g in B]
    if inst.n < 2 or not held:
        return
    i, g = data.draw(st.sampled_from(held))
    j = data.draw(st.sampled_from([k for k in range(inst.n) if k != i]))
    op = Transfer(i, j, g)
    assert apply(apply(X, op), reverse(op)) == X


# ---------------------------------------------------------------- validity


def test_valid_sink_to_predecessor(path3):
    inst, X = path3
    assert is_valid(inst, X, Transfer(2, 1, "g5"))


def test_invalid_transfer_creates_envy(path3):
    inst, X = path3
    assert not is_valid(inst, X, Transfer(1, 0, "g2"))
    Y = apply(X, Transfer(1, 0, "g2"))
    assert envy_amount_goods(inst, 1, 2, Y) > 0


def test_mixed_counterexample_transfers_invalid_per_target():
    inst, X = gen_mixed_counterexample()
    for i in range(4):
        for j in range(4):
            if i != j:
                for g in X.bundles[i]:
                    assert not is_valid(inst, X, Transfer(i, j, g), granularity="per-target")


def test_mixed_counterexample_exchange_reaches_ef1():
    # swapping g1 and g3 hands agent 0 a bundle worth 0 and leaves no EF1-envy at all
    inst, X = gen_mixed_counterexample()
    op = Exchange(0, 1, "g1", "g3")
    Y = apply(X, op)
    assert oracle.fair(inst, Y.bundles)
    for granularity in ("max", "per-target"):
        assert is_valid(inst, X, op, granularity=granularity)
        assert oracle.valid(inst, X.bundles, Y.bundles, 0, granularity=granularity)


def test_mixed_counterexample_transfer_reaches_ef1_under_max():
    inst, X = gen_mixed_counterexample()
    op = Transfer(2, 1, "g11")
    Y = apply(X, op)
    assert oracle.fair(inst, Y.bundles)
    assert is_valid(inst, X, op)
    # agent 0's amount towards agent 2 rises from -2 to -1, which per-target forbids
    assert envy_amount(inst, 0, 2, X) == -2 and envy_amount(inst, 0, 2, Y) == -1
    assert not is_valid(inst, X, op, granularity="per-target")


def test_unknown_granularity(path3):
    inst, X = path3
    with pytest.raises(InputError):
        is_valid(inst, X, Transfer(2, 1, "g5"), granularity="sum")


def _random_op(data, X):
    held = [(i, g) for i, B in enumerate(X.bundles) for g in B]
    i, g = data.draw(st.sampled_from(held))
    j = data.draw(st.sampled_from([k for k in range(X.n) if k != i]))
    if data.draw(st.booleans()):
        others = sorted(X.bundles[j])
        if others:
            return Exchange(i, j, g, data.draw(st.sampled_from(others)))
    return Transfer(i, j, g)


@pytest.mark.parametrize("mode", [Mode.GOODS, Mode.CHORES, Mode.MIXED])
@settings(max_examples=60, deadline=None)
@given(data=st.data())
def test_validity_matches_oracle(mode, data):
    inst = data.draw(any_instance(mode))
    X = data.draw(allocations(inst))
    if inst.n < 2 or inst.m == 0:
        return
    op = _random_op(data, X)
    Y = apply(X, op)
    for granularity in ("max", "per-target"):
        got = is_valid(inst, X, op, granularity=granularity)
        assert got == oracle.valid(inst, X.bundles, Y.bundles, X.distinguished, granularity=granularity)
        if got:
            assert oracle.near_fair(inst, Y.bundles, X.distinguished)


@settings(max_examples=40, deadline=None)
@given(data=st.data())
def test_efx_validity_matches_oracle(data):
    inst = data.draw(any_instance(Mode.GOODS))
    X = data.draw(allocations(inst))
    if inst.n < 2 or inst.m == 0:
        return
    op = _random_op(data, X)
    Y = apply(X, op)
    assert is_valid(inst, X, op, "efx") == oracle.valid(inst, X.bundles, Y.bundles, X.distinguished, "efx")


@pytest.mark.parametrize("mode", [Mode.GOODS, Mode.CHORES, Mode.MIXED])
@settings(max_examples=80, deadline=None)
@given(data=st.data())
def test_envy_matrix_matches_oracle(mode, data):
    inst = data.draw(any_instance(mode))
    X = data.draw(allocations(inst))
    assert envy_matrix(inst, X).tolist() == oracle.matrix(inst, X.bundles)
    assert is_ef1(inst, X) == all(x <= 0 for row in oracle.matrix(inst, X.bundles) for x in row)
    if mode is Mode.GOODS:
        assert envy_matrix(inst, X, "efx").tolist() == oracle.matrix(inst, X.bundles, "efx")


# ---------------------------------------------------------------- validate


def test_validate_generated_path_instance(path3):
    inst, X = path3
    assert validate(inst, X).ok
    assert str(validate(inst, X)) == "pass"


def test_validate_duplicate_item(path3):
    inst, X = path3
    bad = Allocation((X.bundles[0] | {"g2"},) + X.bundles[1:])
    report = validate(inst, bad)
    assert not report.ok and report.first[0] == "partition"


def test_validate_table_monotonicity():
    t = Table.from_mapping(["g1", "g2"], {frozenset(): 0, frozenset({"g1"}): 2, frozenset({"g2"}): 0, frozenset({"g1", "g2"}): 1})
    report = validate(Instance(Mode.GOODS, ["g1", "g2"], (t,)))
    assert report.first[0] == "monotonicity"
    assert str(report).startswith("fail: monotonicity")


@pytest.mark.parametrize(
    "inst, check",
    [
        (Instance(Mode.GOODS, ["a"], (Additive({"a": -1}),)), "mode"),
        (Instance(Mode.CHORES, ["a"], (Additive({"a": 1}),)), "mode"),
        (Instance(Mode.GOODS, ["a", "b"], (Additive({"a": 1}),)), "valuations"),
        (Instance(Mode.GOODS, ["a"], (Additive({"a": 1, "z": 2}),)), "valuations"),
        (Instance(Mode.MIXED, ["a"], (Table(("a",), (0, 1)),)), "mode"),
        (Instance(Mode.GOODS, ["a"], (Table(("a",), (1, 1)),)), "table"),
    ],
)
def test_validate_instance_violations(inst, check):
    assert validate(inst).first[0] == check


def test_validate_graphical_degree():
    from ef1restore.core import Graphical

    edges = (("e", 0, 1),)
    inst = Instance(Mode.GOODS, ["e"], (Graphical(0, edges), Graphical(1, edges), Graphical(1, edges)))
    assert validate(inst).first[0] == "graphical"


def test_validate_distinguished_range(path3):
    inst, X = path3
    report = validate(inst, Allocation(X.bundles, 5))
    assert report.first[0] == "allocation"


def test_envy_matrix_zero_diagonal(path3):
    inst, X = path3
    assert np.all(np.diag(envy_matrix(inst, X)) == 0)
