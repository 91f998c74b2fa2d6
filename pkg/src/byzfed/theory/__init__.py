# byzfed/theory/__init__.py
from .analysis import TheoryResult, analyze, theory_mse_curve
from .blockops import block_kron, bvec, unbvec
from .moments import (
    KronBundle,
    MomentLaw,
    build_bundle,
    build_H,
    build_K,
    build_phi_nu,
    build_QA,
    build_QB,
    build_QC,
    build_R,
)
from .options import TheoryOptions
from .recursion import build_F, msd_recursion_trace, spectral_radius
from .stability import mean_stability_bound, ms_stability_bound
from .steady_state import MseDecomposition, check_stability, steady_state_mse
from .stepsize import optimal_stepsize

__all__ = [
    "KronBundle",
    "MomentLaw",
    "MseDecomposition",
    "TheoryOptions",
    "TheoryResult",
    "analyze",
    "block_kron",
    "build_bundle",
    "build_F",
    "build_H",
    "build_K",
    "build_phi_nu",
    "build_QA",
    "build_QB",
    "build_QC",
    "build_R",
    "bvec",
    "check_stability",
    "mean_stability_bound",
    "ms_stability_bound",
    "msd_recursion_trace",
    "optimal_stepsize",
    "spectral_radius",
    "steady_state_mse",
    "theory_mse_curve",
    "unbvec",
]
