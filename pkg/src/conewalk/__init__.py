"""conewalk: random walks on the nonnegative cone driven by matrix products.

Library layout:

- ``ensemble``   matrices, distributions, the projective action
- ``semigroup``  pattern closure, Perron data, commensurability, condition check
- ``walk``       trajectory simulation, ergodic averages, stationary estimate
- ``recurrence`` aperiodicity targets, return-probability probe, pair counting
- ``harmonic``   grid functions, transition operator, smoothing, collapse checks
- ``cli``        the ``conewalk`` batch front-end
"""

__version__ = "0.1.0"

from .ensemble import (
    MatrixEnsemble,
    NonNegMatrix,
    act_projective,
    sample_matrix,
    unit_cone_vector,
    validate_cone_vector,
    validate_matrix,
    word_matrix,
)
from .grids import SphereGrid, Window
from .harmonic import (
    GridFunction,
    IterationResult,
    SmoothingKernel,
    TransitionStencil,
    apply_P,
    equicontinuity_modulus,
    evaluate,
    gridfunction_from_csv,
    gridfunction_to_csv,
    harmonic_defect,
    iterate_to_fixed,
    martingale_check,
    osc_history_to_csv,
    shift_invariance_check,
    smooth,
)
from .recurrence import (
    RecurrenceStats,
    RecurrenceTarget,
    aperiodicity_probe,
    build_target,
    clopper_pearson_low,
    io_event_counter,
)
from .rng import RngStream
from .semigroup import (
    CommensurabilityReport,
    ConditionCReport,
    PatternClosure,
    PerronData,
    ZeroPattern,
    check_condition_C,
    density_report,
    find_positive_product,
    pattern_closure,
    pattern_of,
    perron,
    sample_lambda_set,
)
from .walk import (
    ConditionCWarning,
    SphereHistogram,
    Trajectory,
    WalkState,
    apply_P_pointwise,
    drift_estimate,
    ergodic_average,
    estimate_stationary,
    histogram_to_csv,
    simulate,
    step,
    trajectory_to_csv,
)

from . import errors  # noqa: F401  (exception hierarchy as a namespace)
