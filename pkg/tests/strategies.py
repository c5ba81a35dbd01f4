"""Shared hypothesis strategies."""

import numpy as np
from hypothesis import strategies as st

from reachkit.core import ReachSpec


@st.composite
def specs(draw, max_blocks=3, max_r=4, max_d=6, symmetric=False):
    r = draw(st.lists(st.integers(1, max_r), min_size=1, max_size=max_blocks).filter(lambda r: sum(r) <= max_d))
    m, d = len(r), sum(r)
    if symmetric:
        alpha, beta = (-1.0,) * m, (1.0,) * m
    else:
        lo = draw(st.lists(st.floats(-3, 1), min_size=m, max_size=m))
        span = draw(st.lists(st.floats(0.1, 3), min_size=m, max_size=m))
        alpha, beta = tuple(lo), tuple(a + s for a, s in zip(lo, span))
    x0 = draw(st.lists(st.floats(-2, 2), min_size=d, max_size=d))
    t = draw(st.floats(0.1, 3))
    return ReachSpec.create(tuple(r), alpha=alpha, beta=beta, x0=tuple(x0), t=t)


def unit_vectors(d):
    return (
        st.lists(st.floats(-1, 1), min_size=d, max_size=d)
        .map(np.array)
        .filter(lambda v: np.linalg.norm(v) > 1e-3)
        .map(lambda v: v / np.linalg.norm(v))
    )


@st.composite
def spec_and_direction(draw, **kw):
    spec = draw(specs(**kw))
    return spec, draw(unit_vectors(spec.d))
