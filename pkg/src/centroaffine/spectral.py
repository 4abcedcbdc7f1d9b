"""Truncated Laurent series in 1/lam of operators, and their cosets mod (L - lam).

A series stores ``terms[e]`` as the coefficient of ``lam**e``.  The
``truncation`` T certifies every exponent ``e >= -T``; ``None`` marks an
exact (finite) series.  Asking for an uncertified coefficient raises
:class:`TruncationError` rather than silently returning zero.
"""
from __future__ import annotations

from typing import Mapping

from .diffop import DiffOp, compose, divide_right


class TruncationError(ValueError):
    """A coefficient below the certified order was requested."""


class ModulusMismatch(ValueError):
    pass


def _tmin(*ts):
    vals = [t for t in ts if t is not None]
    return min(vals) if vals else None


class LambdaOp:
    """Laurent series in 1/lam with DiffOp coefficients (not reduced)."""

    def __init__(self, terms: Mapping[int, DiffOp] | None = None, truncation: int | None = None):
        self.terms = {int(e): op for e, op in (terms or {}).items() if op}
        self.truncation = truncation
        if truncation is not None:
            self.terms = {e: op for e, op in self.terms.items() if e >= -truncation}

    def top(self) -> int:
        return max(self.terms, default=0)

    def max_degree(self) -> int:
        return max((op.degree for op in self.terms.values()), default=0)

    def coefficient(self, e: int) -> DiffOp:
        if self.truncation is not None and e < -self.truncation:
            raise TruncationError(f"lam^{e} is below the certified order -{self.truncation}")
        return self.terms.get(e, DiffOp())

    def exponents(self) -> list:
        return sorted(self.terms, reverse=True)

    def _new(self, terms, truncation):
        return LambdaOp(terms, truncation)

    def _combine(self, other, sign):
        self._check_compatible(other)
        out = dict(self.terms)
        for e, op in other.terms.items():
            op = op if sign > 0 else -op
            out[e] = out[e] + op if e in out else op
        return self._new(out, _tmin(self.truncation, other.truncation))

    def _check_compatible(self, other):
        if type(self) is not type(other):
            raise TypeError("mixed series kinds")

    def __add__(self, other):
        return self._combine(other, 1)

    def __sub__(self, other):
        return self._combine(other, -1)

    def __neg__(self):
        return self._new({e: -op for e, op in self.terms.items()}, self.truncation)

    def shift(self, k: int):
        """Multiply by lam**k."""
        t = None if self.truncation is None else self.truncation - k
        return self._new({e + k: op for e, op in self.terms.items()}, t)

    def is_zero(self) -> bool:
        return not self.terms

    def to_json(self) -> dict:
        return {
            "truncation": self.truncation,
            "terms": {str(e): self.terms[e].to_json() for e in self.exponents()},
        }

    def to_text_rows(self) -> dict:
        return {str(e): self.terms[e].to_text() for e in self.exponents()}

    def __repr__(self):
        return f"{type(self).__name__}({self.to_text_rows()}, T={self.truncation})"


class LambdaCoset(LambdaOp):
    """Series of reduced cosets (degree < n) modulo the left ideal of L - lam."""

    def __init__(self, terms, truncation, modulus: DiffOp):
        super().__init__(terms, truncation)
        self.modulus = modulus
        n = modulus.degree
        for e, op in self.terms.items():
            if op.degree >= n:
                raise ValueError(f"coefficient at lam^{e} is not reduced")

    @property
    def n(self) -> int:
        return self.modulus.degree

    @classmethod
    def one(cls, L: DiffOp) -> "LambdaCoset":
        return cls({0: DiffOp([1])}, None, L)

    @classmethod
    def from_ops(cls, L: DiffOp, terms: Mapping[int, DiffOp], truncation=None) -> "LambdaCoset":
        return reduce_spectral(LambdaOp(terms, truncation), L)

    def _new(self, terms, truncation):
        return LambdaCoset(terms, truncation, self.modulus)

    def _check_compatible(self, other):
        super()._check_compatible(other)
        if other.modulus != self.modulus:
            raise ModulusMismatch("cosets over different moduli")

    def __mul__(self, other):
        return coset_mul(self, other)

    def certify(self, truncation: int) -> "LambdaCoset":
        """Restrict to a (not larger) certified order."""
        if self.truncation is not None and truncation > self.truncation:
            raise TruncationError("cannot certify beyond the available order")
        return self._new(self.terms, truncation)


def _lift(deg_a: int, deg_b: int, n: int) -> int:
    # reducing an operator of degree d mod (L - lam) raises lam-exponents by at most d // n
    return max(deg_a + deg_b, 0) // n


def reduce_spectral(A: LambdaOp, L: DiffOp) -> LambdaCoset:
    """Reduce each coefficient using D^n = lam - sum u_k D^k modulo (L - lam)."""
    n = L.degree
    pending = {e: op for e, op in A.terms.items()}
    out: dict = {}
    while pending:
        e = min(pending)
        op = pending.pop(e)
        q, r = divide_right(op, L)
        if r:
            out[e] = out[e] + r if e in out else r
        if q:
            pending[e + 1] = pending[e + 1] + q if e + 1 in pending else q
    t = A.truncation
    if t is not None:
        # an uncertified tail term of the same shape may lift into the window
        t = t - A.max_degree() // n
    return LambdaCoset(out, t, L)


def coset_mul(A: LambdaCoset, B: LambdaCoset, *, truncation=None, keep_from=None) -> LambdaCoset:
    """Product of cosets: [A][B] = [A B] with certified truncation.

    ``truncation`` overrides the step-wise certificate when the caller has
    a sharper whole-product bound; ``keep_from`` is the lowest exponent to
    compute (defaults to minus the certified truncation).
    """
    A._check_compatible(B)
    L = A.modulus
    n = L.degree
    t_ab = []
    if A.truncation is not None:
        # unknown A-tail (degree < n) times known B
        t_ab.append(A.truncation - B.top() - _lift(n - 1, B.max_degree(), n))
    if B.truncation is not None:
        t_ab.append(B.truncation - A.top() - _lift(A.max_degree(), n - 1, n))
    if A.truncation is not None and B.truncation is not None:
        t_ab.append(A.truncation + B.truncation)
    trunc = min(t_ab) if t_ab else None
    if truncation is not None:
        trunc = truncation
    floor_e = keep_from if keep_from is not None else (None if trunc is None else -trunc)
    smax = _lift(A.max_degree(), B.max_degree(), n)
    raw: dict = {}
    for ea, opa in A.terms.items():
        for eb, opb in B.terms.items():
            if floor_e is not None and ea + eb + smax < floor_e:
                continue
            prod = compose(opa, opb)
            if not prod:
                continue
            raw.setdefault(ea + eb, []).append(prod)
    summed = {}
    for e, ops in raw.items():
        acc = ops[0]
        for op in ops[1:]:
            acc = acc + op
        summed[e] = acc
    red = reduce_spectral(LambdaOp(summed, None), L)
    terms = red.terms
    if floor_e is not None:
        terms = {e: op for e, op in terms.items() if e >= floor_e}
    return LambdaCoset(terms, trunc, L)


def lambda_poly_part(A: LambdaOp) -> LambdaOp:
    """Keep exactly the non-negative lam-exponents (an exact, finite series)."""
    if A.truncation is not None and A.truncation < 0:
        raise TruncationError("lam^0 coefficient is not certified")
    return A._new({e: op for e, op in A.terms.items() if e >= 0}, None)
