"""Zero-curvature residuals, isospectral drift and curve reconstruction."""
from __future__ import annotations

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import CubicSpline
from scipy.optimize import linear_sum_assignment

from .flows import CompiledPoly, Trajectory, _jet_table
from .frames import CurveSamples, CurvatureField, companion_field, frame_from_curvature, frame_guard, monodromy_batch


class CompiledMatrix:
    """Pointwise evaluator of an n x n matrix of differential polynomials."""

    def __init__(self, M):
        self.entries = [[CompiledPoly(p) for p in row] for row in M]
        self.n = len(M)
        self.jets = set()
        for row in self.entries:
            for e in row:
                self.jets |= e.jets

    def __call__(self, u: np.ndarray, grid) -> np.ndarray:
        table = _jet_table(np.asarray(u, dtype=float), grid, self.jets)
        N = grid.N
        out = np.empty((N, self.n, self.n))
        for i, row in enumerate(self.entries):
            for j, e in enumerate(row):
                out[:, i, j] = e(table, (N,))
        return out


def compile_matrix(M) -> CompiledMatrix:
    return CompiledMatrix(M)


def _xderiv(X: np.ndarray, grid) -> np.ndarray:
    from .grid import derivative

    return np.moveaxis(derivative(np.moveaxis(X, 0, -1), grid, 1), -1, 0)


def zero_curvature_residual(traj: Trajectory, P_matrix) -> tuple:
    """(per-snapshot max Frobenius norm, overall max) of F_t - X_x + [F, X].

    F_t uses 4th-order central differences over snapshots; two snapshots
    at each end are excluded.  Entries of the per-snapshot array are NaN
    where no stencil is available.
    """
    S = len(traj)
    if S < 5:
        raise ValueError("need at least 5 snapshots for the central stencil")
    ev = P_matrix if isinstance(P_matrix, CompiledMatrix) else compile_matrix(P_matrix)
    grid = traj.grid
    delta = traj.dt * traj.save_every
    Fs = companion_field(traj.fields)  # S x N x n x n
    per = np.full(S, np.nan)
    for i in range(2, S - 2):
        Ft = (-Fs[i + 2] + 8 * Fs[i + 1] - 8 * Fs[i - 1] + Fs[i - 2]) / (12 * delta)
        X = ev(traj.fields[i], grid)
        R = Ft - _xderiv(X, grid) + Fs[i] @ X - X @ Fs[i]
        per[i] = float(np.max(np.linalg.norm(R, axis=(-2, -1))))
    return per, float(np.nanmax(per))


def match_eigenvalues(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Permutation of b best matching a (as multisets, by nearest pairing)."""
    cost = np.abs(a[:, None] - b[None, :])
    _, cols = linear_sum_assignment(cost)
    return b[cols]


def isospectral_drift(traj: Trajectory, lams, stride: int = 1, refine_factor: int = 8) -> dict:
    """Max deviation of monodromy eigenvalues from t=0, relative to the spectral radius.

    Returns {"max": float, "per_lambda": {lam: float}}.
    """
    lams = np.atleast_1d(np.asarray(lams, dtype=float))
    idx = list(range(0, len(traj), stride))
    if idx[-1] != len(traj) - 1:
        idx.append(len(traj) - 1)
    M = monodromy_batch(traj.fields[idx], traj.grid, lams, refine_factor)  # S x K x n x n
    ev = np.linalg.eigvals(M)
    per = {}
    for k, lam in enumerate(lams):
        ref = ev[0, k]
        scale = np.max(np.abs(ref))
        worst = 0.0
        for s in range(1, len(idx)):
            cur = match_eigenvalues(ref, ev[s, k])
            worst = max(worst, float(np.max(np.abs(cur - ref)) / scale))
        per[float(lam)] = worst
    return {"max": max(per.values()) if per else 0.0, "per_lambda": per}


def reconstruct_curve(traj: Trajectory, W0, P_matrix, rtol: float = 1e-11, atol: float = 1e-12) -> list:
    """Curves gamma(t) whose curvature is the trajectory.

    The base frame W(x0, t) is transported by W_t = X(x0, t) W, then each
    snapshot is integrated in x with frame_from_curvature.
    """
    ev = P_matrix if isinstance(P_matrix, CompiledMatrix) else compile_matrix(P_matrix)
    grid = traj.grid
    n = traj.n
    W0 = np.asarray(W0, dtype=float)
    Xs = np.stack([ev(traj.fields[i], grid)[0] for i in range(len(traj))])
    if len(traj) > 1:
        spline = CubicSpline(traj.times, Xs, axis=0)

        def rhs(t, w):
            return (spline(t) @ w.reshape(n, n)).ravel()

        sol = solve_ivp(rhs, (traj.times[0], traj.times[-1]), W0.ravel(), method="DOP853",
                        t_eval=traj.times, rtol=rtol, atol=atol)
        if not sol.success:
            raise RuntimeError(f"base frame transport failed: {sol.message}")
        bases = sol.y.T.reshape(-1, n, n)
    else:
        bases = W0[None]
    curves = []
    for i in range(len(traj)):
        Wf = frame_from_curvature(CurvatureField(grid, traj.fields[i]), bases[i])
        frame_guard(Wf.W)
        curves.append(CurveSamples(grid, Wf.W[:, 0, :]))
    return curves
