"""Forced linear diffusion ``y_t = A_t y_{t-1} + z`` on static and slowly changing networks."""

from .centrality import bonacich, friedkin_johnsen, katz, nar_correction, nar_mean, pagerank, salancik
from .churn import (
    ChurnProcess,
    NetworkSequence,
    evolve,
    graph_correlation,
    hamming_distance,
    load_sequence,
    mean_velocity,
    sample_equilibrium_graph,
    save_sequence,
)
from .dynamics import (
    DiffusionModel,
    Trajectory,
    equilibrium,
    estimate_drift,
    ode_equilibrium,
    perturbative,
    regime_diagnostics,
    run_dynamic,
    run_fixed,
    step,
    unroll_dynamic,
    unroll_fixed,
)
from .errors import *  # noqa: F401,F403
from .experiment import (
    RateSummary,
    StudyConfig,
    StudyResult,
    calibrate_alpha,
    rmse,
    run_replicate,
    run_study,
    summarize,
)
from .linalg import max_singular_value, neumann_partial_sum, solve_resolvent, spectral_radius

__version__ = "0.1.0"
