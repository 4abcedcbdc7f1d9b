"""Formal pseudodifferential operators sum_{e <= top} a_e D^e, truncated below.

``low`` is the lowest D-exponent whose coefficient is certified (``None``
for an operator known exactly, e.g. a differential operator).  Products
propagate certification conservatively.
"""
from __future__ import annotations

from typing import Mapping

from gmpy2 import mpq

from .diffpoly import ONE, ZERO, DiffPoly, poly_sum
from .diffop import DiffOp


class DepthError(ValueError):
    """Requested coefficients are not certified at the available depth."""


def gen_binomial(i: int, k: int) -> mpq:
    """Binomial coefficient C(i, k) for any integer i and k >= 0."""
    out = mpq(1)
    for r in range(k):
        out = out * (i - r) / (r + 1)
    return out


class PsiDO:
    __slots__ = ("terms", "low")

    def __init__(self, terms: Mapping[int, DiffPoly] | None = None, low: int | None = None):
        t = {int(e): c for e, c in (terms or {}).items() if c}
        if low is not None:
            t = {e: c for e, c in t.items() if e >= low}
        self.terms = t
        self.low = low

    @classmethod
    def from_diffop(cls, A: DiffOp) -> "PsiDO":
        return cls(dict(enumerate(A.coeffs)), None)

    @classmethod
    def D(cls, e: int) -> "PsiDO":
        return cls({e: ONE}, None)

    def top(self) -> int:
        return max(self.terms, default=0 if self.low is None else self.low)

    def coeff(self, e: int) -> DiffPoly:
        if self.low is not None and e < self.low:
            raise DepthError(f"D^{e} coefficient below certified order {self.low}")
        return self.terms.get(e, ZERO)

    def __eq__(self, other):
        return isinstance(other, PsiDO) and self.terms == other.terms and self.low == other.low

    def _lowmin(self, other):
        lows = [x for x in (self.low, other.low) if x is not None]
        return max(lows) if lows else None

    def __add__(self, other: "PsiDO") -> "PsiDO":
        out = dict(self.terms)
        for e, c in other.terms.items():
            out[e] = out[e] + c if e in out else c
        return PsiDO(out, self._lowmin(other))

    def __neg__(self):
        return PsiDO({e: -c for e, c in self.terms.items()}, self.low)

    def __sub__(self, other):
        return self + (-other)

    def truncate(self, low: int) -> "PsiDO":
        if self.low is not None and low < self.low:
            raise DepthError("cannot certify below the available order")
        return PsiDO(self.terms, low)

    def is_zero(self) -> bool:
        return not self.terms

    def to_text(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for e in sorted(self.terms, reverse=True):
            c = self.terms[e].to_text()
            d = "" if e == 0 else ("D" if e == 1 else f"D^{e}")
            if not d:
                parts.append(c)
            elif c == "1":
                parts.append(d)
            else:
                parts.append(f"({c})*{d}")
        tail = "" if self.low is None else f" + O(D^{self.low - 1})"
        return " + ".join(parts) + tail

    __str__ = to_text

    def __repr__(self):
        return f"PsiDO({self.to_text()!r})"

    def to_json(self) -> dict:
        return {
            "low": self.low,
            "terms": {str(e): self.terms[e].to_json() for e in sorted(self.terms, reverse=True)},
        }


def psido_mul(A: PsiDO, B: PsiDO, depth: int) -> PsiDO:
    """A B keeping D-exponents >= -depth, using D^i f = sum_k C(i,k) f^(k) D^(i-k)."""
    if depth < 0:
        raise ValueError("depth must be non-negative")
    low = -depth
    if A.low is not None:
        low = max(low, A.low + B.top())
    if B.low is not None:
        low = max(low, B.low + A.top())
    buckets: dict = {}
    for i, a in A.terms.items():
        for j, b in B.terms.items():
            k = 0
            while i - k + j >= low:
                if i >= 0 and k > i:
                    break
                bk = b.dx(k)
                if bk:
                    buckets.setdefault(i - k + j, []).append(a * bk * gen_binomial(i, k))
                k += 1
    return PsiDO({e: poly_sum(v) for e, v in buckets.items()}, low)


def psido_pow(A: PsiDO, k: int, depth: int) -> PsiDO:
    """A**k certified to D^-depth where the factors allow it."""
    # intermediate products carry extra orders, since dropped terms climb
    # by top(A) with every further factor
    guard = max(k - 1, 0) * max(A.top(), 0)
    out = PsiDO({0: ONE})
    for _ in range(k):
        out = psido_mul(out, A, depth + guard)
    if out.low is None or out.low < -depth:
        out = PsiDO(out.terms, -depth)
    return out


def plus_part(A: PsiDO) -> DiffOp:
    if A.low is not None and A.low > 0:
        raise DepthError("differential part is not certified")
    top = max((e for e in A.terms if e >= 0), default=-1)
    return DiffOp([A.terms.get(e, ZERO) for e in range(top + 1)])


def minus_part(A: PsiDO) -> PsiDO:
    return PsiDO({e: c for e, c in A.terms.items() if e < 0}, A.low)


def from_right_coeffs(coeffs, depth: int) -> PsiDO:
    """sum_j D^(-1-j) X_j rewritten with coefficients on the left."""
    acc = PsiDO({}, None)
    for j, x in enumerate(coeffs):
        if x:
            acc = acc + psido_mul(PsiDO.D(-1 - j), PsiDO({0: x}), depth)
    if acc.low is None:
        acc = PsiDO(acc.terms, -depth)
    return acc


def nth_root(L: DiffOp, depth: int) -> PsiDO:
    """The unique root D + a_0 + a_1 D^-1 + ... of the monic L, certified to D^-depth."""
    n = L.degree
    if n < 1 or not L.is_monic():
        raise ValueError("nth_root needs a monic operator")
    root = {1: ONE}
    for k in range(depth + 1):
        # with a_0..a_{k-1} fixed, the D^(n-1-k) coefficient of the n-th power
        # is n a_k plus already-determined terms
        target = n - 1 - k
        power = psido_pow(PsiDO(root, None), n, max(-target, 0))
        have = power.terms.get(target, ZERO)
        want = L.coeff(target) if target >= 0 else ZERO
        a = (want - have) / n
        if a:
            root[-k] = a
    return PsiDO(root, -depth)


def fractional_plus(L: DiffOp, j: int, depth: int | None = None) -> DiffOp:
    """(L^(j/n))_+ from the n-th root."""
    n = L.degree
    if j < 1 or j % n == 0:
        raise ValueError("need j >= 1 with j not a multiple of n")
    need = j - 1
    if depth is None:
        depth = need
    if depth < need:
        raise DepthError(f"depth {depth} cannot certify (L^({j}/{n}))_+; need {need}")
    root = nth_root(L, depth)
    return plus_part(psido_pow(root, j, depth))


def oracle_flow(L: DiffOp, j: int, depth: int | None = None) -> list:
    """Coefficients of [(L^(j/n))_+, L], which must have order < n."""
    from .diffop import compose

    n = L.degree
    B = fractional_plus(L, j, depth)
    comm = compose(B, L) - compose(L, B)
    if comm.degree >= n:
        raise ArithmeticError("commutator has order >= n")
    return comm.padded(n)
