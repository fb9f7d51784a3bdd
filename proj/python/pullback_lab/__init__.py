"""Pullback-attractor laboratory: decay-class calculus, covering-based
noncompactness estimates, and the spectrally discretized dissipative wave
benchmark, backed by the C++ core."""

from ._core import (  # noqa: F401
    DecayFunction,
    DecayError,
    EvolutionProcess,
    GeometryError,
    ModelError,
    ModelSpec,
    PointCloud,
    ProcessError,
    RateFit,
    __version__,
    ball_measure_exact,
    ball_measure_upper,
    benchmark_with_H3_violated,
    benchmark_with_H4_violated,
    benchmark_with_H6_violated,
    combine,
    compute_constants,
    diameter,
    exp_integral_transform,
    fit_exponential_rate,
    hausdorff_semidist,
    kappa_bounds,
    make_contraction_toy,
    make_process,
    membership_check,
    neighborhood_inflate,
    pullback_image,
    run_experiment,
    scale_sqrt,
    simulate_norms,
    validate_hypotheses,
    window_sup_transform,
)
