"""Numeric side: grids, frames, monodromy, flows and their diagnostics."""
from .grid import Grid, derivative, derivatives, fornberg_weights, period_integral, refine
from .frames import (
    CurvatureField,
    CurveSamples,
    IntegrationError,
    MatrixField,
    as_open_curve,
    SingularFrame,
    frame_guard,
    companion_field,
    curvature_from_curve,
    frame_from_curvature,
    liouville_det,
    monodromy,
    monodromy_batch,
    round_trip_error,
    wronskian,
)
from .flows import BlowUp, CompiledRHS, Trajectory, compile_rhs, evolve, split_linear
from .diagnostics import (
    CompiledMatrix,
    compile_matrix,
    isospectral_drift,
    match_eigenvalues,
    reconstruct_curve,
    zero_curvature_residual,
)

__all__ = [name for name in dir() if not name.startswith("_")]
