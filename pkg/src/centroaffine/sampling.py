"""Seeded generators of random symbolic objects for self-checks."""
from __future__ import annotations

import random

from gmpy2 import mpq

from .diffop import DiffOp
from .diffpoly import DiffPoly, u
from .duality import DualCoset


def random_rational(rng: random.Random, span: int = 5) -> mpq:
    num = rng.randint(-span, span) or 1
    return mpq(num, rng.randint(1, 4))


def random_diffpoly(rng: random.Random, n: int, terms: int = 3, degree: int = 2, order: int = 2,
                    constant: bool = False) -> DiffPoly:
    out = DiffPoly.const(random_rational(rng)) if constant else DiffPoly()
    for _ in range(terms):
        t = DiffPoly.const(random_rational(rng))
        for _ in range(rng.randint(1, degree)):
            t = t * u(rng.randrange(n), rng.randint(0, order))
        out = out + t
    return out


def random_diffop(rng: random.Random, n: int, degree: int, **kw) -> DiffOp:
    return DiffOp([random_diffpoly(rng, n, **kw) for _ in range(degree + 1)])


def random_coset(rng: random.Random, n: int, **kw) -> DiffOp:
    return random_diffop(rng, n, n - 1, **kw)


def random_monic(rng: random.Random, n: int, **kw) -> DiffOp:
    return DiffOp([random_diffpoly(rng, n, **kw) for _ in range(n)] + [1])


def random_dual(rng: random.Random, n: int, **kw) -> DualCoset:
    return DualCoset([random_diffpoly(rng, n, **kw) for _ in range(n)])
