"""Gradient descent on non-separable logistic regression near the
stability threshold: 1D theory, scaling invariance, and sphere-lifted
cycles."""

from .model import (
    Dataset,
    DimensionMismatchError,
    DimensionTooLargeError,
    LiftedDataset,
    NonFiniteError,
    grad,
    hessian,
    hvp,
    lifted_grad,
    lifted_loss,
    loss,
    sigmoid,
    sigmoid_prime,
    smoothness,
    softplus,
)
from .solver import (
    NoConvergenceError,
    SeparableDatasetError,
    SolveReport,
    lambda_max,
    separating_direction,
    solve_newton,
    step_size,
)
from .onedim import (
    LemmaReport,
    LemmaViolationError,
    NoStationaryPointsError,
    OneDimProblem,
    avg_slope,
    cobweb,
    crossing_point,
    gd_map,
    gd_map_slope,
    grad_1d,
    rate_estimate,
    right_grid,
    stationary_points,
    two_step_bound,
    verify_lemmas,
)
from .dynamics import (
    CycleReport,
    RecordSpec,
    Trajectory,
    cycle_points,
    detect_cycle_recurrence,
    dominant_period,
    floquet_multipliers,
    power_spectrum,
    run_gd,
    spectral_peaks,
)
from .lifting import (
    BlockResiduals,
    LiftReport,
    build_lift_report,
    lift,
    lifted_solution,
    min_ambient_dim,
    normalize_into_ball,
    tail_curvature,
    verify_block_hessian,
)
from .transforms import (
    ClusterSpec,
    HuntResult,
    hunt_cycles,
    sample_cluster_dataset,
    scale_dataset,
    verify_scaling,
)

__version__ = "0.1.0"
