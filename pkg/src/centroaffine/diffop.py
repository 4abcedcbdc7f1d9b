"""Linear differential operators sum a_i D^i with DiffPoly coefficients."""
from __future__ import annotations

from functools import lru_cache
from math import comb
from typing import Sequence

from .diffpoly import ONE, ZERO, DiffPoly, poly_sum, u as u_var


class DiffOp:
    """Element of the Ore ring F[D] with D f = f D + f'.

    ``coeffs[i]`` multiplies ``D^i`` from the left.  Trailing zeros are
    trimmed so ``degree`` is exact; the zero operator has degree -1.
    """

    __slots__ = ("coeffs", "_hash")

    def __init__(self, coeffs: Sequence = ()):
        cs = [c if isinstance(c, DiffPoly) else DiffPoly.const(c) for c in coeffs]
        while cs and not cs[-1]:
            cs.pop()
        self.coeffs = tuple(cs)
        self._hash = None

    @classmethod
    def D(cls, k: int = 1) -> "DiffOp":
        return cls([ZERO] * k + [ONE])

    @classmethod
    def mult(cls, f) -> "DiffOp":
        return cls([f])

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def coeff(self, i: int) -> DiffPoly:
        return self.coeffs[i] if 0 <= i < len(self.coeffs) else ZERO

    def padded(self, n: int) -> list:
        if self.degree >= n:
            raise ValueError(f"operator of degree {self.degree} does not fit in {n} slots")
        return [self.coeff(i) for i in range(n)]

    def is_monic(self) -> bool:
        return self.degree >= 0 and self.coeffs[-1] == ONE

    def __bool__(self) -> bool:
        return bool(self.coeffs)

    def __eq__(self, other) -> bool:
        if not isinstance(other, DiffOp):
            return NotImplemented
        return self.coeffs == other.coeffs

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(self.coeffs)
        return self._hash

    def __add__(self, other: "DiffOp") -> "DiffOp":
        m = max(len(self.coeffs), len(other.coeffs))
        return DiffOp([self.coeff(i) + other.coeff(i) for i in range(m)])

    def __sub__(self, other: "DiffOp") -> "DiffOp":
        m = max(len(self.coeffs), len(other.coeffs))
        return DiffOp([self.coeff(i) - other.coeff(i) for i in range(m)])

    def __neg__(self) -> "DiffOp":
        return DiffOp([-c for c in self.coeffs])

    def scale(self, f) -> "DiffOp":
        """Left multiplication by a function (or rational)."""
        return DiffOp([f * c for c in self.coeffs])

    def __mul__(self, other):
        if isinstance(other, DiffOp):
            return compose(self, other)
        return self.scale(other)

    def __rmul__(self, other):
        return self.scale(other)

    def apply(self, f: DiffPoly) -> DiffPoly:
        """Act on a function: sum a_i f^(i)."""
        return poly_sum(c * f.dx(i) for i, c in enumerate(self.coeffs))

    def to_text(self) -> str:
        if not self.coeffs:
            return "0"
        out = ""
        for i in range(self.degree, -1, -1):
            c = self.coeffs[i]
            if not c:
                continue
            dpart = "" if i == 0 else ("D" if i == 1 else f"D^{i}")
            txt = c.to_text()
            neg = False
            if len(c) == 1:
                if txt.startswith("-"):
                    neg, txt = True, txt[1:]
                if dpart:
                    txt = dpart if txt == "1" else f"{txt}*{dpart}"
            elif dpart:
                txt = f"({txt})*{dpart}"
            elif txt.startswith("-"):
                neg, txt = True, txt[1:]
            if not out:
                out = ("-" if neg else "") + txt
            else:
                out += (" - " if neg else " + ") + txt
        return out

    __str__ = to_text

    def __repr__(self) -> str:
        return f"DiffOp({self.to_text()!r})"

    def to_json(self) -> list:
        return [c.to_json() for c in self.coeffs]

    @classmethod
    def from_json(cls, obj) -> "DiffOp":
        return cls([DiffPoly.from_json(c) for c in obj])


def _d_power_times(i: int, f: DiffPoly) -> list:
    # D^i f = sum_k C(i,k) f^(k) D^(i-k), returned indexed by D-power
    out = [ZERO] * (i + 1)
    for k in range(i + 1):
        fk = f.dx(k)
        if fk:
            out[i - k] = fk * comb(i, k)
    return out


def compose(A: DiffOp, B: DiffOp) -> DiffOp:
    if not A or not B:
        return DiffOp()
    size = A.degree + B.degree + 1
    buckets = [[] for _ in range(size)]
    for i, a in enumerate(A.coeffs):
        if not a:
            continue
        for j, b in enumerate(B.coeffs):
            if not b:
                continue
            for p, t in enumerate(_d_power_times(i, b)):
                if t:
                    buckets[p + j].append(a * t)
    return DiffOp([poly_sum(b) for b in buckets])


def adjoint(A: DiffOp) -> DiffOp:
    """Formal adjoint sum (-D)^i a_i."""
    if not A:
        return A
    buckets = [[] for _ in range(A.degree + 1)]
    for i, a in enumerate(A.coeffs):
        sign = -1 if i % 2 else 1
        for p, t in enumerate(_d_power_times(i, a)):
            if t:
                buckets[p].append(t * sign)
    return DiffOp([poly_sum(b) for b in buckets])


def horner(A: DiffOp, k: int) -> DiffOp:
    """Partial left factor sum_{j<=k} a_{n-j} D^{k-j}, n = deg A."""
    n = A.degree
    if not 0 <= k <= n:
        raise ValueError(f"horner index {k} outside 0..{n}")
    return DiffOp([A.coeff(n - k + p) for p in range(k + 1)])


@lru_cache(maxsize=4096)
def _shifted_modulus(L: DiffOp, s: int) -> DiffOp:
    if s == 0:
        return L
    return compose(DiffOp.D(), _shifted_modulus(L, s - 1))


def _require_monic(L: DiffOp) -> None:
    if L.degree < 1 or not L.is_monic():
        raise ValueError("modulus must be monic of order >= 1")


def divide_right(A: DiffOp, L: DiffOp) -> tuple:
    """Return (Q, R) with A = Q L + R and deg R < deg L."""
    _require_monic(L)
    n = L.degree
    rem = list(A.coeffs)
    quot = [ZERO] * max(A.degree - n + 1, 0)
    for top in range(A.degree, n - 1, -1):
        c = rem[top]
        if not c:
            continue
        s = top - n
        quot[s] = c
        shifted = _shifted_modulus(L, s)
        for p, t in enumerate(shifted.coeffs):
            if t:
                rem[p] = rem[p] - c * t
    return DiffOp(quot), DiffOp(rem[:n])


def reduce_mod(A: DiffOp, L: DiffOp) -> DiffOp:
    return divide_right(A, L)[1]


def hat_and_remainder(X: DiffOp, L: DiffOp) -> tuple:
    """Return (Xhat, h) with L X = Xhat L - h and deg h < n."""
    if X.degree >= L.degree:
        raise ValueError("coset representative must have degree < n")
    q, r = divide_right(compose(L, X), L)
    return q, -r


def symbolic_L(n: int, traceless: bool = False) -> DiffOp:
    """D^n + sum u_k D^k with symbolic curvature (u_{n-1} = 0 if traceless)."""
    if n < 1:
        raise ValueError("order must be positive")
    cs = [u_var(k) for k in range(n)] + [ONE]
    if traceless:
        cs[n - 1] = ZERO
    return DiffOp(cs)


def companion(L: DiffOp) -> list:
    _require_monic(L)
    n = L.degree
    if n < 2:
        raise ValueError("companion matrix needs n >= 2")
    F = [[ZERO] * n for _ in range(n)]
    for i in range(n - 1):
        F[i][i + 1] = ONE
    F[n - 1] = [-L.coeff(k) for k in range(n)]
    return F


def d_action(row: Sequence, L: DiffOp) -> list:
    """Components of D.[a] mod L for a reduced coset with components ``row``."""
    n = L.degree
    top = row[n - 1]
    out = []
    for m in range(n):
        v = row[m].dx()
        if m > 0:
            v = v + row[m - 1]
        if top:
            v = v - top * L.coeff(m)
        out.append(v)
    return out


def matrix_rep(X: DiffOp, L: DiffOp) -> list:
    """Row i holds the components of D^i.[X] reduced mod L."""
    _require_monic(L)
    n = L.degree
    row = X.padded(n)
    rows = [row]
    for _ in range(n - 1):
        row = d_action(row, L)
        rows.append(row)
    return rows


def trace_of_rep(X: DiffOp, L: DiffOp) -> DiffPoly:
    M = matrix_rep(X, L)
    return poly_sum(M[i][i] for i in range(len(M)))


def mat_mul(A: list, B: list) -> list:
    n, m, p = len(A), len(B), len(B[0])
    return [[poly_sum(A[i][k] * B[k][j] for k in range(m)) for j in range(p)] for i in range(n)]


def mat_sub(A: list, B: list) -> list:
    return [[a - b for a, b in zip(ra, rb)] for ra, rb in zip(A, B)]


def mat_is_zero(A: list) -> bool:
    return all(not x for row in A for x in row)


def mat_text(A: list) -> list:
    return [[x.to_text() for x in row] for row in A]
