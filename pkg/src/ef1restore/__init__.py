"""Restoring envy-freeness up to one item by valid transfers and exchanges."""

from .core import (
    Additive,
    Allocation,
    EnvyGraph,
    Exchange,
    Generators,
    Graphical,
    Instance,
    Mode,
    Table,
    Transfer,
    apply,
    efx_envy,
    efx_envy_amount,
    envy_amount,
    envy_amount_chores,
    envy_amount_goods,
    envy_amount_mixed,
    envy_graph,
    envy_matrix,
    is_ef1,
    is_efx,
    is_near_ef1,
    is_near_efx,
    is_valid,
    reverse,
    validate,
    value,
)
from .corpus import assert_no_valid_ops, gen_efx_counterexample, gen_efx_family, gen_mixed_counterexample
from .errors import (
    ChecksumError,
    ConstructionError,
    EF1Error,
    InputError,
    ParseError,
    UnsupportedModeError,
    ValidationError,
)
from .formats import emit_instance, emit_pmr, emit_trace, parse_instance, parse_pmr, parse_trace
from .reachability import SearchConfig, SearchResult, Verdict, canonical_key, decide_restoration, enumerate_valid_ops
from .reduction import (
    PmrInstance,
    allocation_to_matching,
    build_reduction,
    matching_to_allocation,
    pmr_flips,
    pmr_reachable,
    validate_pmr,
)
from .restore_identical import (
    RestorationTrace,
    best_item,
    gen_tight_identical,
    restore_chores,
    restore_goods,
    transfer_bound,
    worst_chore,
)
from .restore_orientation import (
    MultigraphInstance,
    check_orientation_structure,
    gen_path_lower_bound,
    is_orientation,
    max_envy_K,
    restore_orientation,
)

__version__ = "0.1.0"
