"""Hypothesis strategies built on the seeded generators."""
import random

from hypothesis import strategies as st

from centroaffine.sampling import random_coset, random_diffop, random_diffpoly, random_dual, random_monic

seeds = st.integers(min_value=0, max_value=2**32 - 1)


def polys(n=2, **kw):
    return seeds.map(lambda s: random_diffpoly(random.Random(s), n, **kw))


def ops(n=2, max_degree=3, **kw):
    return st.tuples(seeds, st.integers(0, max_degree)).map(
        lambda t: random_diffop(random.Random(t[0]), n, t[1], **kw))


def cosets(n=2, **kw):
    return seeds.map(lambda s: random_coset(random.Random(s), n, **kw))


def monics(n=2, **kw):
    return seeds.map(lambda s: random_monic(random.Random(s), n, **kw))


def duals(n=2, **kw):
    return seeds.map(lambda s: random_dual(random.Random(s), n, **kw))
