"""Exact-arithmetic solvers and verifiers for maximin-share + envy fairness.

Computes indivisible-goods allocations that are simultaneously 2/3-MMS and
EFX (partial) or 2/3-MMS and EF1 (complete), with brute-force oracles and
independent fairness checkers.  All comparisons use exact integer or
rational arithmetic.
"""

from .envy import (
    EnvyGraph,
    build_envy_graph,
    eliminate_cycles,
    envy_cycle_elimination,
    min_envied_subset,
    most_envious_refine,
    strongly_envies,
)
from .matching import (
    ClosedMatching,
    ThresholdGraph,
    build_threshold_graph,
    closed_matching,
    max_matching,
    minimal_hall_violator,
)
from .mms import (
    MMSRecord,
    feasible_cover,
    mms_approx,
    mms_bruteforce,
    mms_exact,
    reduce_partition,
)
from .model import (
    Bundle,
    Instance,
    InternalInvariantError,
    PartialAllocation,
    PreconditionError,
    TraceEvent,
    ValidationError,
    allocation,
    bundle_value,
    new_instance,
    validate_allocation,
)
from .solvers import (
    SolveReport,
    SolverConfig,
    approx_mms,
    approx_mms_ef1,
    approx_mms_efx,
    audit_potential,
)
from .verify import (
    FairnessReport,
    check_ef1,
    check_efx,
    check_mms_ratio,
    fairness_report,
    fixture_prop1,
    fixture_prop2,
)

__version__ = "0.1.0"
