"""Uniform grids, spectral and high-order finite-difference derivatives."""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

FD_ORDER = 8


@dataclass(frozen=True)
class Grid:
    """Uniform samples of [x0, x0 + length).

    Periodic grids exclude the right endpoint and need N a power of two
    (>= 16); open grids include both endpoints.
    """

    x0: float
    length: float
    N: int
    periodic: bool = True

    def __post_init__(self):
        if self.N < 16:
            raise ValueError("grid needs at least 16 samples")
        if self.periodic and self.N & (self.N - 1):
            raise ValueError("periodic grids need N a power of two")
        if not self.length > 0:
            raise ValueError("grid length must be positive")

    @property
    def h(self) -> float:
        return self.length / self.N if self.periodic else self.length / (self.N - 1)

    @property
    def x(self) -> np.ndarray:
        return self.x0 + self.h * np.arange(self.N)

    def to_json(self) -> dict:
        return {"x0": self.x0, "length": self.length, "N": self.N, "periodic": self.periodic}


def fornberg_weights(z: float, nodes, m: int) -> np.ndarray:
    """Finite-difference weights at z for derivatives 0..m on arbitrary nodes.

    Returns an array of shape (len(nodes), m+1) (Fornberg's recursion).
    """
    x = np.asarray(nodes, dtype=float)
    n = len(x)
    c = np.zeros((n, m + 1))
    c1 = 1.0
    c4 = x[0] - z
    c[0, 0] = 1.0
    for i in range(1, n):
        mn = min(i, m)
        c2 = 1.0
        c5 = c4
        c4 = x[i] - z
        for j in range(i):
            c3 = x[i] - x[j]
            c2 *= c3
            if j == i - 1:
                for k in range(mn, 0, -1):
                    c[i, k] = c1 * (k * c[i - 1, k - 1] - c5 * c[i - 1, k]) / c2
                c[i, 0] = -c1 * c5 * c[i - 1, 0] / c2
            for k in range(mn, 0, -1):
                c[j, k] = (c4 * c[j, k] - k * c[j, k - 1]) / c3
            c[j, 0] = c4 * c[j, 0] / c3
        c1 = c2
    return c


def _stencil_size(k: int) -> int:
    s = k + FD_ORDER
    return s if s % 2 else s + 1


@lru_cache(maxsize=64)
def _fd_rows(k: int, N: int) -> tuple:
    # (starts, weights) per output point on unit spacing
    s = _stencil_size(k)
    if N < s:
        raise ValueError(f"open grid of {N} points too small for derivative order {k}")
    half = s // 2
    starts = np.clip(np.arange(N) - half, 0, N - s)
    W = np.empty((N, s))
    cache = {}
    for i in range(N):
        off = i - starts[i]
        if off not in cache:
            cache[off] = fornberg_weights(float(off), np.arange(s), k)[:, k]
        W[i] = cache[off]
    return starts, W


def fd_derivative(f: np.ndarray, h: float, k: int) -> np.ndarray:
    """k-th derivative along the last axis with 8th-order stencils."""
    if k == 0:
        return np.array(f, copy=True)
    f = np.asarray(f)
    N = f.shape[-1]
    starts, W = _fd_rows(k, N)
    s = W.shape[1]
    idx = starts[:, None] + np.arange(s)[None, :]
    return np.einsum("...ij,ij->...i", f[..., idx], W) / h**k


def _wavenumbers(grid: Grid) -> np.ndarray:
    return 2 * np.pi / grid.length * np.arange(grid.N // 2 + 1)


def spectral_derivative(f: np.ndarray, grid: Grid, k: int) -> np.ndarray:
    if k == 0:
        return np.array(f, copy=True)
    fh = np.fft.rfft(f, axis=-1)
    mult = (1j * _wavenumbers(grid)) ** k
    if k % 2:
        mult[-1] = 0.0
    return np.fft.irfft(fh * mult, n=grid.N, axis=-1)


def derivative(f: np.ndarray, grid: Grid, k: int) -> np.ndarray:
    if k < 0:
        raise ValueError("negative derivative order")
    if grid.periodic:
        return spectral_derivative(f, grid, k)
    return fd_derivative(f, grid.h, k)


def derivatives(f: np.ndarray, grid: Grid, kmax: int) -> list:
    """[f, f', ..., f^(kmax)] along the last axis."""
    if grid.periodic:
        fh = np.fft.rfft(f, axis=-1)
        ik = 1j * _wavenumbers(grid)
        out = [np.array(f, dtype=float, copy=True)]
        for k in range(1, kmax + 1):
            mult = ik**k
            if k % 2:
                mult[-1] = 0.0
            out.append(np.fft.irfft(fh * mult, n=grid.N, axis=-1))
        return out
    return [fd_derivative(f, grid.h, k) for k in range(kmax + 1)]


def refine(f: np.ndarray, grid: Grid, factor: int) -> np.ndarray:
    """Interpolate onto a grid `factor` times finer.

    Periodic: trigonometric interpolation, N*factor samples plus the
    wrapped endpoint.  Open: local 10-point polynomial interpolation,
    (N-1)*factor + 1 samples.
    """
    if factor < 1:
        raise ValueError("refinement factor must be >= 1")
    f = np.asarray(f, dtype=complex if np.iscomplexobj(f) else float)
    N = grid.N
    if grid.periodic:
        fh = np.fft.fft(f, axis=-1)
        M = N * factor
        out = np.zeros(f.shape[:-1] + (M,), dtype=complex)
        half = N // 2
        out[..., :half] = fh[..., :half]
        out[..., M - half + 1 :] = fh[..., half + 1 :]
        out[..., half] = fh[..., half] / 2
        out[..., M - half] = fh[..., half] / 2
        fine = np.fft.ifft(out, axis=-1) * factor
        if not np.iscomplexobj(f):
            fine = fine.real
        return np.concatenate([fine, fine[..., :1]], axis=-1)
    s = 10
    if N < s:
        raise ValueError("open grid too small to refine")
    P = (N - 1) * factor + 1
    out = np.empty(f.shape[:-1] + (P,), dtype=f.dtype)
    cache = {}
    for p in range(P):
        i, r = divmod(p, factor)
        if r == 0:
            out[..., p] = f[..., i]
            continue
        start = int(np.clip(i - s // 2 + 1, 0, N - s))
        key = (i - start, r)
        if key not in cache:
            z = (i - start) + r / factor
            cache[key] = fornberg_weights(z, np.arange(s), 0)[:, 0]
        out[..., p] = f[..., start : start + s] @ cache[key]
    return out


def period_integral(f: np.ndarray, grid: Grid) -> float:
    """Integral over one period (trapezoid, spectrally accurate) or over the interval."""
    if grid.periodic:
        return float(np.sum(f, axis=-1) * grid.h)
    from scipy.integrate import simpson

    return float(simpson(f, dx=grid.h, axis=-1))
