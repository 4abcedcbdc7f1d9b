"""Wronskian frames, curvature extraction, frames from curvature, monodromy."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import Grid, derivatives, refine

SINGULAR_THRESHOLD = 1e-6


class SingularFrame(ValueError):
    """The Wronskian frame is numerically singular at a sample."""

    def __init__(self, index: int, ratio: float):
        super().__init__(f"Wronskian frame is singular at sample {index} (scaled det {ratio:.3e})")
        self.index = index
        self.ratio = ratio


class IntegrationError(RuntimeError):
    pass


@dataclass
class CurveSamples:
    grid: Grid
    values: np.ndarray  # N x n

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim != 2 or self.values.shape[0] != self.grid.N:
            raise ValueError("curve samples must be N x n")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("curve samples must be finite")

    @property
    def n(self) -> int:
        return self.values.shape[1]


@dataclass
class CurvatureField:
    grid: Grid
    u: np.ndarray  # n x N

    def __post_init__(self):
        self.u = np.atleast_2d(np.asarray(self.u, dtype=float))
        if self.u.shape[1] != self.grid.N:
            raise ValueError("curvature field must be n x N")
        if not np.all(np.isfinite(self.u)):
            raise ValueError("curvature field must be finite")

    @property
    def n(self) -> int:
        return self.u.shape[0]


@dataclass
class MatrixField:
    grid: Grid
    W: np.ndarray  # N x n x n

    def first_row(self) -> CurveSamples:
        return CurveSamples(self.grid, self.W[:, 0, :])

    def dets(self) -> np.ndarray:
        return np.linalg.det(self.W)


def wronskian(curve: CurveSamples) -> tuple:
    """(W, gamma^(n)): W[i] has rows gamma, gamma', ..., gamma^(n-1) at sample i."""
    n = curve.n
    jets = derivatives(curve.values.T, curve.grid, n)  # each n x N
    W = np.stack([j.T for j in jets[:n]], axis=1)  # N x n(rows=order) x n(components)
    return W, jets[n].T


def frame_guard(W: np.ndarray, threshold: float = SINGULAR_THRESHOLD) -> np.ndarray:
    """Scaled determinants; raise SingularFrame below threshold."""
    n = W.shape[-1]
    det = np.linalg.det(W)
    norms = np.linalg.norm(W, axis=-1)
    scale = np.exp(np.mean(np.log(np.maximum(norms, 1e-300)), axis=-1)) ** n
    ratio = np.abs(det) / scale
    bad = np.nonzero(ratio < threshold)[0]
    if bad.size:
        raise SingularFrame(int(bad[0]), float(ratio[bad[0]]))
    return ratio


def curvature_from_curve(curve: CurveSamples, threshold: float = SINGULAR_THRESHOLD) -> CurvatureField:
    """u = -gamma^(n) W^-1 at every sample."""
    W, top = wronskian(curve)
    frame_guard(W, threshold)
    # u W = -gamma^(n)  <=>  W^T u^T = -gamma^(n)^T
    u = np.linalg.solve(np.swapaxes(W, -1, -2), -top[..., None])[..., 0]
    return CurvatureField(curve.grid, u.T)


def companion_field(u: np.ndarray, lam=0.0) -> np.ndarray:
    """F (and F + lam E_{n,1}) sampled pointwise: shape (..., P, n, n)."""
    u = np.asarray(u)
    n = u.shape[-2]
    P = u.shape[-1]
    lam = np.asarray(lam)
    dtype = np.result_type(u.dtype, lam.dtype)
    shape = np.broadcast_shapes(u.shape[:-2], lam.shape)
    F = np.zeros(shape + (P, n, n), dtype=dtype)
    for i in range(n - 1):
        F[..., i, i + 1] = 1.0
    F[..., n - 1, :] = -np.moveaxis(u, -2, -1)
    F[..., n - 1, 0] += lam[..., None]
    return F


def _rk4_transport(Ffine: np.ndarray, W0: np.ndarray, hf: float, record_every: int) -> np.ndarray:
    """W' = F W with RK4 steps of 2 hf using F at fine samples (midpoints included).

    Ffine: (..., P, n, n) with P odd; returns W at fine indices 0, record_every*2, ...
    """
    P = Ffine.shape[-3]
    steps = (P - 1) // 2
    step = 2 * hf
    W = np.broadcast_to(W0, Ffine.shape[:-3] + W0.shape[-2:]).astype(Ffine.dtype, copy=True)
    out = [W.copy()]
    for s in range(steps):
        Fa = Ffine[..., 2 * s, :, :]
        Fm = Ffine[..., 2 * s + 1, :, :]
        Fb = Ffine[..., 2 * s + 2, :, :]
        k1 = Fa @ W
        k2 = Fm @ (W + 0.5 * step * k1)
        k3 = Fm @ (W + 0.5 * step * k2)
        k4 = Fb @ (W + step * k3)
        W = W + step / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        if (s + 1) % record_every == 0:
            out.append(W.copy())
    if not np.all(np.isfinite(W)):
        raise IntegrationError("frame integration produced non-finite values")
    return np.stack(out, axis=-3)


def _fine_companion(u: CurvatureField, lam, factor: int) -> np.ndarray:
    ufine = refine(u.u, u.grid, factor)
    return companion_field(ufine, lam)


def frame_from_curvature(u: CurvatureField, W0=None, refine_factor: int = 8) -> MatrixField:
    """Integrate W' = F W from the left end of the grid."""
    if refine_factor < 2 or refine_factor % 2:
        raise ValueError("refine factor must be even")
    n = u.n
    W0 = np.eye(n) if W0 is None else np.asarray(W0, dtype=float)
    if abs(np.linalg.det(W0)) < 1e-300:
        raise SingularFrame(0, 0.0)
    Ff = _fine_companion(u, 0.0, refine_factor)
    grid = u.grid
    if grid.periodic:
        # drop the wrapped tail: samples x0 .. x0 + (N-1) h
        Ff = Ff[: (grid.N - 1) * refine_factor + 1]
    Ws = _rk4_transport(Ff, W0, grid.h / refine_factor, refine_factor // 2)
    return MatrixField(grid, Ws)


def monodromy(u: CurvatureField, lam=0.0, refine_factor: int = 8) -> np.ndarray:
    """Transfer matrix of W' = (F + lam E_{n,1}) W over one period.

    ``lam`` may be an array; the result then has shape lam.shape + (n, n).
    """
    if not u.grid.periodic:
        raise ValueError("monodromy needs a periodic grid")
    return monodromy_batch(u.u, u.grid, lam, refine_factor)


def monodromy_batch(u: np.ndarray, grid: Grid, lam=0.0, refine_factor: int = 8) -> np.ndarray:
    """Monodromy for stacked fields u (..., n, N) and scalar or 1-D lam.

    Result shape: u.shape[:-2] + lam.shape + (n, n).
    """
    if refine_factor < 2 or refine_factor % 2:
        raise ValueError("refine factor must be even")
    u = np.asarray(u, dtype=float)
    n = u.shape[-2]
    lam = np.asarray(lam)
    if lam.ndim > 1:
        raise ValueError("lam must be a scalar or a 1-D array")
    ufine = refine(u, grid, refine_factor)
    if lam.ndim == 1:
        ufine = ufine[..., None, :, :]
    F = companion_field(ufine, lam)
    steps = (F.shape[-3] - 1) // 2
    W = _rk4_transport(F, np.eye(n), grid.h / refine_factor, steps)
    return W[..., -1, :, :]


def liouville_det(u: CurvatureField) -> float:
    """exp(-integral of u_{n-1}) over one period."""
    from .grid import period_integral

    return float(np.exp(-period_integral(u.u[-1], u.grid)))


def as_open_curve(curve: CurveSamples) -> CurveSamples:
    """The same samples on an open grid (a frame rarely closes over one period)."""
    g = curve.grid
    if not g.periodic:
        return curve
    return CurveSamples(Grid(g.x0, g.h * (g.N - 1), g.N, periodic=False), curve.values)


def round_trip_error(u: CurvatureField, refine_factor: int = 8) -> float:
    """Max relative error of curvature -> frame -> first row -> curvature."""
    W = frame_from_curvature(u, refine_factor=refine_factor)
    back = curvature_from_curve(as_open_curve(W.first_row()))
    return float(np.max(np.abs(back.u - u.u)) / max(np.max(np.abs(u.u)), 1e-300))
