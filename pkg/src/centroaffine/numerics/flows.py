"""Grid evaluation of symbolic flows and their time integration."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm

from ..diffpoly import AUX_BASE, DiffPoly, _decode
from .frames import CurvatureField
from .grid import Grid, derivatives


class BlowUp(FloatingPointError):
    def __init__(self, step: int, reason: str = "non-finite values"):
        super().__init__(f"evolution blew up at step {step}: {reason}")
        self.step = step


class CompiledPoly:
    """A DiffPoly in u-jets flattened to float monomials."""

    def __init__(self, p: DiffPoly):
        self.terms = []
        self.jets = set()
        for m, c in p._t.items():
            factors = []
            for (idx, order), e in _decode(m):
                if idx >= AUX_BASE:
                    raise ValueError("compiled expressions may only reference curvature jets")
                factors.append(((idx, order), e))
                self.jets.add((idx, order))
            self.terms.append((float(c), tuple(factors)))

    def __call__(self, jets: dict, shape) -> np.ndarray:
        out = np.zeros(shape)
        for c, factors in self.terms:
            t = np.full(shape, c)
            for v, e in factors:
                t = t * (jets[v] if e == 1 else jets[v] ** e)
            out += t
        return out


def _jet_table(u: np.ndarray, grid: Grid, jets: set) -> dict:
    table = {}
    by_var: dict = {}
    for idx, order in jets:
        by_var[idx] = max(by_var.get(idx, 0), order)
    for idx, top in by_var.items():
        if idx >= u.shape[0]:
            raise ValueError(f"expression references u{idx} but the field has {u.shape[0]} components")
        for order, arr in enumerate(derivatives(u[idx], grid, top)):
            table[(idx, order)] = arr
    return table


class CompiledRHS:
    """Pointwise evaluator for a vector of differential polynomials."""

    def __init__(self, rhs):
        self.components = [CompiledPoly(p) for p in rhs]
        self.jets = set().union(*(c.jets for c in self.components)) if self.components else set()
        self.n = len(self.components)

    def __call__(self, u: np.ndarray, grid: Grid) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        table = _jet_table(u, grid, self.jets)
        return np.stack([c(table, u.shape[-1:]) for c in self.components])


def compile_rhs(rhs) -> CompiledRHS:
    return CompiledRHS(rhs)


def split_linear(rhs) -> tuple:
    """(linear, rest): constant-coefficient linear terms {(i, k, m): c} and the remainder."""
    lin = {}
    rest = []
    for i, p in enumerate(rhs):
        keep = {}
        for m, c in p._t.items():
            dec = _decode(m)
            if len(dec) == 1 and dec[0][1] == 1 and dec[0][0][0] < AUX_BASE:
                (k, order), _ = dec[0]
                lin[(i, k, order)] = float(c)
            else:
                keep[m] = c
        rest.append(DiffPoly(keep, _trusted=True))
    return lin, rest


@dataclass
class Trajectory:
    grid: Grid
    times: np.ndarray
    fields: np.ndarray  # S x n x N
    dt: float
    steps: int
    save_every: int
    label: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return self.fields.shape[1]

    def snapshot(self, i: int) -> CurvatureField:
        return CurvatureField(self.grid, self.fields[i])

    def __len__(self):
        return len(self.times)

    def masses(self) -> np.ndarray:
        """Period integral of u_0 per snapshot."""
        return self.fields[:, 0, :].sum(axis=-1) * self.grid.h


def _linear_symbol(lin: dict, n: int, grid: Grid) -> np.ndarray:
    kappa = 2 * np.pi / grid.length * np.arange(grid.N // 2 + 1)
    A = np.zeros((kappa.size, n, n), dtype=complex)
    for (i, k, m), c in lin.items():
        mult = (1j * kappa) ** m
        if m % 2:
            mult[-1] = 0.0
        A[:, i, k] += c * mult
    return A


def evolve(
    u0: CurvatureField,
    rhs,
    dt: float,
    steps: int,
    save_every: int = 1,
    method: str = "ifrk4",
    blowup: float = 1e8,
    label: dict | None = None,
) -> Trajectory:
    """Integrate u_t = rhs(u) on a periodic grid.

    ``ifrk4`` moves the constant-coefficient linear part into Fourier space
    (integrating factor, Lawson RK4); ``rk4`` is the plain classical scheme.
    """
    grid = u0.grid
    if not grid.periodic:
        raise ValueError("evolve needs a periodic grid")
    if dt <= 0 or steps < 0 or save_every < 1:
        raise ValueError("need dt > 0, steps >= 0, save_every >= 1")
    rhs = list(rhs)
    n = u0.n
    if len(rhs) != n:
        raise ValueError("rhs length does not match the field")
    u = np.array(u0.u, dtype=float)
    saves = [u.copy()]
    times = [0.0]

    def check(arr, s):
        if not np.all(np.isfinite(arr)):
            raise BlowUp(s)
        if np.max(np.abs(arr)) > blowup:
            raise BlowUp(s, f"|u| exceeded {blowup:g}")

    if method == "rk4":
        f = compile_rhs(rhs)
        for s in range(1, steps + 1):
            k1 = f(u, grid)
            k2 = f(u + 0.5 * dt * k1, grid)
            k3 = f(u + 0.5 * dt * k2, grid)
            k4 = f(u + dt * k3, grid)
            u = u + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
            check(u, s)
            if s % save_every == 0:
                saves.append(u.copy())
                times.append(s * dt)
    elif method == "ifrk4":
        lin, rest = split_linear(rhs)
        A = _linear_symbol(lin, n, grid)
        E = expm(A * dt)
        E2 = expm(A * (dt / 2))
        nl = compile_rhs(rest)
        has_nl = any(bool(p) for p in rest)

        def to_hat(x):
            return np.fft.rfft(x, axis=-1).T[..., None]  # K x n x 1

        def from_hat(xh):
            return np.fft.irfft(xh[..., 0].T, n=grid.N, axis=-1)

        def N_hat(vh):
            if not has_nl:
                return np.zeros_like(vh)
            return to_hat(nl(from_hat(vh), grid))

        v = to_hat(u)
        for s in range(1, steps + 1):
            k1 = N_hat(v)
            k2 = N_hat(E2 @ (v + 0.5 * dt * k1))
            k3 = N_hat(E2 @ v + 0.5 * dt * k2)
            k4 = N_hat(E @ v + dt * (E2 @ k3))
            v = E @ v + dt / 6.0 * (E @ k1 + 2 * (E2 @ (k2 + k3)) + k4)
            if s % save_every == 0 or s == steps:
                u = from_hat(v)
                check(u, s)
            if s % save_every == 0:
                saves.append(u.copy())
                times.append(s * dt)
    else:
        raise ValueError(f"unknown method {method!r}")
    return Trajectory(grid, np.array(times), np.stack(saves), dt, steps, save_every, dict(label or {}))
