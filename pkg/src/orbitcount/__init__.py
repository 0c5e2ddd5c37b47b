"""orbitcount: exact-arithmetic recurrence and shrinking-target counting
for expanding piecewise-linear full-branch maps on [0,1]^d."""

__version__ = "0.1.0"

from .maps import (
    Branch1D,
    Cylinder,
    DepthCapError,
    MapSpec,
    MapValidationError,
    base_map,
    cylinders,
    doubling_map,
    eval_map,
    iterate_map,
    locate,
    luroth_map,
    map_from_name,
    tent_map,
    toral_diag_map,
)
from .rates import (
    RateFunction,
    constant_rate,
    power_rate,
    psi_partial_sums,
    psi_sum,
    table_rate,
)
from .points import (
    Enclosure,
    GenericPoint,
    Outcome,
    PrecisionBudgetError,
    distance_predicate,
    enclose,
    forced_point,
    sample_point,
)
from .counting import (
    CountRecord,
    TargetSpec,
    count_recurrence,
    count_shrinking_target,
    geometric_checkpoints,
)
from .exact_measure import (
    EventSet,
    event_pullback,
    event_recurrence,
    event_target,
    measure,
    measure_intersection,
    measure_within,
    mixing_deficit,
    phi_sum,
    phi_values,
)
from .harness import (
    ExperimentPlan,
    ExperimentReport,
    Thresholds,
    dichotomy_check,
    fit_error_exponent,
    qbc_instance,
    run_experiment,
    variance_statistic,
)
