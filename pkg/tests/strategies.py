"""Shared hypothesis strategies."""

from __future__ import annotations

import numpy as np
from hypothesis import strategies as st

from wedit.align_graph import WeightFunction


def strings(alphabet: bytes = b"ab", min_size: int = 0, max_size: int = 20):
    return st.lists(st.sampled_from(list(alphabet)), min_size=min_size, max_size=max_size).map(bytes)


@st.composite
def weights(draw, alphabet: bytes = b"ab", max_w: int = 5):
    W = draw(st.integers(1, max_w))
    seed = draw(st.integers(0, 2**31))
    return WeightFunction.random(list(alphabet), W, np.random.default_rng(seed))
