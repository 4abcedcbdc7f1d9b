"""Dual cosets, the adjoint curve, the bilinear concomitant and pairing identities."""
from __future__ import annotations

from typing import Sequence

from .diffpoly import ONE, ZERO, DiffPoly, aux, d_x, poly_sum
from .diffop import (
    DiffOp,
    adjoint,
    d_action,
    hat_and_remainder,
    horner,
    matrix_rep,
)


class DualCoset:
    """Components of a dual element along delta_0 .. delta_{n-1}."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Sequence):
        self.coeffs = tuple(c if isinstance(c, DiffPoly) else DiffPoly.const(c) for c in coeffs)

    @classmethod
    def delta(cls, i: int, n: int) -> "DualCoset":
        return cls([ONE if k == i else ZERO for k in range(n)])

    @property
    def n(self) -> int:
        return len(self.coeffs)

    def __eq__(self, other) -> bool:
        return isinstance(other, DualCoset) and self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def __add__(self, other):
        return DualCoset([a + b for a, b in zip(self.coeffs, other.coeffs)])

    def __sub__(self, other):
        return DualCoset([a - b for a, b in zip(self.coeffs, other.coeffs)])

    def scale(self, f) -> "DualCoset":
        return DualCoset([f * c for c in self.coeffs])

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def pair(self, row: Sequence) -> DiffPoly:
        """Evaluate on a reduced coset given by its components."""
        return poly_sum(a * b for a, b in zip(self.coeffs, row))

    def to_text(self) -> list:
        return [c.to_text() for c in self.coeffs]

    def __repr__(self):
        return f"DualCoset({self.to_text()})"


def _check_order(q: DualCoset, L: DiffOp) -> None:
    if q.n != L.degree:
        raise ValueError(f"dual coset of length {q.n} against an operator of order {L.degree}")


def dual_d_action(q: DualCoset, L: DiffOp) -> DualCoset:
    """D acting on the dual module: q' - F q with F the companion matrix."""
    _check_order(q, L)
    n = q.n
    c = q.coeffs
    out = [c[i].dx() - c[i + 1] for i in range(n - 1)]
    out.append(c[n - 1].dx() + poly_sum(L.coeff(k) * c[k] for k in range(n)))
    return DualCoset(out)


def dual_apply(A: DiffOp, q: DualCoset, L: DiffOp) -> DualCoset:
    """Left action sum a_i D^i on a dual coset."""
    acc = [ZERO] * q.n
    cur = q
    for i, a in enumerate(A.coeffs):
        if i:
            cur = dual_d_action(cur, L)
        if a:
            acc = [x + a * y for x, y in zip(acc, cur.coeffs)]
    return DualCoset(acc)


def coset_apply(A: DiffOp, row: Sequence, L: DiffOp) -> list:
    """Left action of A on the reduced coset with components ``row``."""
    acc = [ZERO] * L.degree
    cur = list(row)
    for i, a in enumerate(A.coeffs):
        if i:
            cur = d_action(cur, L)
        if a:
            acc = [x + a * y for x, y in zip(acc, cur)]
    return acc


def adjoint_curve(L: DiffOp) -> DiffOp:
    """(-1)^n L*, again monic of order n."""
    n = L.degree
    A = adjoint(L)
    return -A if n % 2 else A


def phi_factor(L: DiffOp) -> list:
    """Matrix S whose transpose has row n-1-k equal to the coefficients of H_k(L)*."""
    n = L.degree
    St = [None] * n
    for k in range(n):
        St[n - 1 - k] = adjoint(horner(L, k)).padded(n)
    return [[St[j][i] for j in range(n)] for i in range(n)]


def concomitant(L: DiffOp, z="z", y="y") -> DiffPoly:
    """Bilinear form B(z, y) with d/dx B = z L(y) - y L*(z)."""
    zf = aux(z) if isinstance(z, str) else z
    yf = aux(y) if isinstance(y, str) else y
    n = L.degree
    terms = []
    for j in range(n):
        w = L.coeff(j + 1) * zf
        for k in range(j + 1):
            t = yf.dx(j - k) * w.dx(k)
            terms.append(-t if k % 2 else t)
    return poly_sum(terms)


def lagrange_residual(L: DiffOp) -> DiffPoly:
    zf, yf = aux("z"), aux("y")
    B = concomitant(L, zf, yf)
    return d_x(B) - (zf * L.apply(yf) - yf * adjoint(L).apply(zf))


def sigma_hat(L: DiffOp, sigma: DualCoset) -> list:
    """Columns H_{n-1}(L)* sigma, ..., H_0(L)* sigma = sigma (as a matrix)."""
    n = L.degree
    cols = [dual_apply(adjoint(horner(L, n - 1 - i)), sigma, L).coeffs for i in range(n)]
    return [[cols[j][i] for j in range(n)] for i in range(n)]


def trace_pairing_residual(L: DiffOp, X: DiffOp, sigma: DualCoset) -> DiffPoly:
    """d/dx tr(X Sigma) - [sigma(L.[X]) - (L* sigma)([X])]; identically zero."""
    _check_order(sigma, L)
    n = L.degree
    M = matrix_rep(X, L)
    S = sigma_hat(L, sigma)
    tr = poly_sum(M[i][k] * S[k][i] for i in range(n) for k in range(n))
    row = X.padded(n)
    lhs = sigma.pair(coset_apply(L, row, L))
    rhs = dual_apply(adjoint(L), sigma, L).pair(row)
    return d_x(tr) - (lhs - rhs)


class DualRepMismatch(ArithmeticError):
    pass


def dual_rep(X: DiffOp, L: DiffOp) -> list:
    """Matrix representation rebuilt column by column from its last column.

    Column n-1-k is H_k(L)* applied to the last column, minus a correction
    generated by the remainder h of X; the result must coincide with
    :func:`matrix_rep`.
    """
    n = L.degree
    M = matrix_rep(X, L)
    _, h = hat_and_remainder(X, L)
    hc = h.padded(n)
    delta = DualCoset.delta(n - 1, n)
    last = DualCoset([M[i][n - 1] for i in range(n)])
    cols = [None] * n
    cols[n - 1] = last.coeffs
    corr = DualCoset([ZERO] * n)
    minus_d = DiffOp([0, -1])
    for k in range(1, n):
        # column recursion c_{m-1} = -D c_m + u_m c_{n-1} - h_m delta_{n-1}, m = n-k
        corr = dual_apply(minus_d, corr, L) + delta.scale(hc[n - k])
        col = dual_apply(adjoint(horner(L, k)), last, L) - corr
        cols[n - 1 - k] = col.coeffs
    Y = [[cols[j][i] for j in range(n)] for i in range(n)]
    if Y != M:
        raise DualRepMismatch("column construction disagrees with the matrix representation")
    return Y
