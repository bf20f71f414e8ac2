import numpy as np
import pytest
from hypothesis import strategies as st

from collision_gap.models import ModelSpec, Variant


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def probs(n, eps=0.05):
    return st.lists(st.floats(eps, 1 - eps), min_size=n, max_size=n).map(tuple)


@st.composite
def exclusion_specs(draw, max_n=6):
    n = draw(st.integers(2, max_n))
    return ModelSpec(Variant.DISORDERED_EXCLUSION, n, p=draw(probs(n)), omega=draw(st.integers(0, n)))


@st.composite
def colored_specs(draw, max_n=5, gamma=None):
    n = draw(st.integers(2, max_n))
    m = draw(st.integers(1, 3))
    counts = draw(st.lists(st.integers(0, n), min_size=m, max_size=m).filter(lambda c: 1 <= sum(c) <= n - 1))
    g = draw(st.sampled_from([0, 1])) if gamma is None else gamma
    return ModelSpec(Variant.COLORED_EXCLUSION, n, p=draw(probs(n)), omega=tuple(counts), m=m, gamma=g)


@st.composite
def permutation_specs(draw, max_n=4):
    n = draw(st.integers(2, max_n))
    row = st.lists(st.floats(-2, 2), min_size=n, max_size=n)
    b = draw(st.lists(row, min_size=n, max_size=n))
    return ModelSpec(Variant.BIASED_PERMUTATIONS, n, b=b)


finite_specs = st.one_of(exclusion_specs(), colored_specs(), permutation_specs())


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
