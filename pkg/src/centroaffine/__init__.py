"""Differential-operator calculus for centro-affine curves and n-KdV flows."""
from .diffpoly import DiffPoly, NotExact, aux, d_x, euler_derivative, integrate_exact, is_total_derivative, u
from .diffop import (
    DiffOp,
    adjoint,
    companion,
    compose,
    divide_right,
    hat_and_remainder,
    horner,
    matrix_rep,
    reduce_mod,
    symbolic_L,
    trace_of_rep,
)
from .duality import (
    DualCoset,
    DualRepMismatch,
    adjoint_curve,
    concomitant,
    dual_rep,
    lagrange_residual,
    phi_factor,
    trace_pairing_residual,
)
from .spectral import LambdaCoset, LambdaOp, ModulusMismatch, TruncationError, coset_mul, lambda_poly_part, reduce_spectral
from .psido import DepthError, PsiDO, fractional_plus, minus_part, nth_root, oracle_flow, plus_part, psido_mul
from .hierarchy import (
    FlowSpec,
    InconsistentRecursion,
    OmegaSeries,
    adler_map,
    bracket_evolutionary,
    eigenring_kernel_check,
    flow_lax_pair,
    flow_operator,
    flow_rhs,
    kernel_pair,
    omega,
    omega_power,
    verify_omega,
)

__version__ = "0.1.0"
