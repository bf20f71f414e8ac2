import itertools
import json
import math

import numpy as np
import pytest
from hypothesis import given, settings

from collision_gap.errors import EmptySpaceError, ModelError, SpecParseError, UnsupportedVariantError
from collision_gap.models import (
    ModelSpec,
    Variant,
    conditional_law_marginal,
    conditional_law_product,
    conserved_quantity,
    enumerate_space,
    expected_cardinality,
    load_spec,
    occupancy_projection,
    particle_hole,
    site_values,
    spec_from_dict,
    stationary_measure,
)

from conftest import exclusion_specs, finite_specs


def brute_force_states(spec):
    """Every point of X^N satisfying the conservation law, by filtering."""
    target = conserved_quantity(spec, [])  # shape only
    vals = site_values(spec)
    out = []
    for combo in itertools.product(vals, repeat=spec.n):
        q = conserved_quantity(spec, combo)
        want = (spec.omega,) if spec.variant is Variant.DISORDERED_EXCLUSION else tuple(spec.omega)
        if q == want:
            out.append(combo)
    assert len(target) == len(want)
    return out


def test_exclusion_one_particle_three_sites():
    space = enumerate_space(ModelSpec("DisorderedExclusion", 3, p=(0.2, 0.5, 0.7), omega=1))
    assert set(space.states) == {(1, 0, 0), (0, 1, 0), (0, 0, 1)}


def test_colored_three_sites_two_colors():
    spec = ModelSpec("ColoredExclusion", 3, p=(0.3, 0.5, 0.6), omega=(1, 1), m=2)
    space = enumerate_space(spec)
    assert len(space) == 6
    assert sorted(space.states) == sorted(brute_force_states(spec))


def test_permutations_three():
    space = enumerate_space(ModelSpec("BiasedPermutations", 3))
    assert len(space) == 6
    assert space.states == tuple(itertools.permutations((1, 2, 3)))


@settings(max_examples=40, deadline=None)
@given(finite_specs)
def test_enumeration_complete_and_lexicographic(spec):
    space = enumerate_space(spec)
    assert list(space.states) == sorted(space.states)
    assert len(set(space.states)) == len(space)
    assert len(space) == expected_cardinality(spec)
    assert sorted(space.states) == sorted(brute_force_states(spec))
    assert all(space.index[s] == k for k, s in enumerate(space.states))


def test_enumeration_errors():
    with pytest.raises(UnsupportedVariantError):
        enumerate_space(ModelSpec("KacSphere", 3, omega=1.0))
    with pytest.raises(EmptySpaceError):
        enumerate_space(ModelSpec("ColoredExclusion", 3, p=(0.5,) * 3, omega=(2, 2), m=2))
    with pytest.raises(ModelError):
        enumerate_space(ModelSpec("BiasedPermutations", 9))


def test_spec_validation():
    with pytest.raises(ModelError):
        ModelSpec("DisorderedExclusion", 1, p=(0.5,), omega=0)
    with pytest.raises(ModelError):
        ModelSpec("DisorderedExclusion", 2, p=(0.0, 0.5), omega=1)
    with pytest.raises(ModelError):
        ModelSpec("DisorderedExclusion", 2, p=(0.5, 0.5), omega=3)
    with pytest.raises(ModelError):
        ModelSpec("KacSphere", 3, omega=0.0)
    with pytest.raises(ModelError):
        ModelSpec("ColoredExclusion", 3, p=(0.5,) * 3, omega=(1, 1), m=2, gamma=2)


def test_uniform_exclusion_measure():
    for omega in range(5):
        spec = ModelSpec("DisorderedExclusion", 4, p=(0.5,) * 4, omega=omega)
        w = stationary_measure(spec, enumerate_space(spec)).weights
        np.testing.assert_allclose(w, 1 / math.comb(4, omega), rtol=0, atol=1e-15)


def test_one_particle_position_law():
    p1, p2, p3 = 0.2, 0.55, 0.85
    spec = ModelSpec("DisorderedExclusion", 3, p=(p1, p2, p3), omega=1)
    space = enumerate_space(spec)
    w = stationary_measure(spec, space).weights
    a = p1 * (1 - p2) * (1 - p3)
    b = (1 - p1) * p2 * (1 - p3)
    c = (1 - p1) * (1 - p2) * p3
    assert w[space.index[(1, 0, 0)]] == pytest.approx(a / (a + b + c), abs=1e-15)


def test_uniform_permutations():
    spec = ModelSpec("BiasedPermutations", 4)
    w = stationary_measure(spec, enumerate_space(spec)).weights
    np.testing.assert_allclose(w, 1 / 24, atol=1e-16)


def test_large_bias_is_finite():
    b = np.full((3, 3), -800.0)  # exp(800) overflows if exponentiated directly
    b[0, 0] = -200.0
    spec = ModelSpec("BiasedPermutations", 3, b=b.tolist())
    w = stationary_measure(spec, enumerate_space(spec)).weights
    assert np.all(w > 0)
    assert w[0] == pytest.approx(w[2] * math.exp(-600), rel=1e-9, abs=0)
    assert w.sum() == pytest.approx(1.0, abs=1e-14)


def test_scale_invariance():
    spec = ModelSpec("DisorderedExclusion", 4, p=(0.1, 0.3, 0.6, 0.8), omega=2)
    space = enumerate_space(spec)
    w1 = stationary_measure(spec, space).weights
    w2 = stationary_measure(spec, space, scale=1e6).weights
    np.testing.assert_allclose(w1, w2, rtol=1e-14)


@settings(max_examples=40, deadline=None)
@given(finite_specs)
def test_normalization_and_non_interference(spec):
    space = enumerate_space(spec)
    measure = stationary_measure(spec, space)
    assert np.all(measure.weights > 0)
    assert abs(measure.weights.sum() - 1) < 1e-14
    rng = np.random.default_rng(len(space))
    state = space.states[rng.integers(len(space))]
    for size in range(1, min(spec.n, 3) + 1):
        sites = sorted(rng.choice(spec.n, size, replace=False).tolist())
        outside = {i: state[i] for i in range(spec.n) if i not in sites}
        direct = conditional_law_product(spec, sites, outside)
        marg = conditional_law_marginal(space, measure, sites, state)
        assert direct.keys() == marg.keys()
        for k in direct:
            assert abs(direct[k] - marg[k]) < 1e-12


@settings(max_examples=30, deadline=None)
@given(exclusion_specs())
def test_particle_hole_symmetry(spec):
    dual = particle_hole(spec)
    s1, s2 = enumerate_space(spec), enumerate_space(dual)
    w1 = stationary_measure(spec, s1).weights
    w2 = stationary_measure(dual, s2).weights
    for s, w in zip(s1.states, w1):
        flipped = tuple(1 - x for x in s)
        assert w2[s2.index[flipped]] == pytest.approx(w, rel=1e-12, abs=0)


def test_occupancy_projection():
    spec = ModelSpec("ColoredExclusion", 3, p=(0.3, 0.5, 0.6), omega=(1, 1), m=2)
    space = enumerate_space(spec)
    psi = occupancy_projection(space)
    groups = {}
    for s, pattern in psi.items():
        groups.setdefault(pattern, []).append(s)
    assert len(groups) == 3 and all(len(g) == 2 for g in groups.values())

    spec3 = ModelSpec("ColoredExclusion", 3, p=(0.3, 0.5, 0.6), omega=(1, 1, 0), m=3)
    space3 = enumerate_space(spec3)
    assert occupancy_projection(space3)[(0, 2, 1)] == (0, 1, 1)

    one = ModelSpec("ColoredExclusion", 4, p=(0.3, 0.5, 0.6, 0.2), omega=(2,), m=1)
    assert all(k == v for k, v in occupancy_projection(enumerate_space(one)).items())

    with pytest.raises(UnsupportedVariantError):
        occupancy_projection(enumerate_space(ModelSpec("BiasedPermutations", 3)))


def test_degenerate_space():
    space = enumerate_space(ModelSpec("DisorderedExclusion", 3, p=(0.2, 0.4, 0.6), omega=0))
    assert space.is_degenerate


def test_spec_file_roundtrip(tmp_path):
    specs = [
        ModelSpec("DisorderedExclusion", 3, p=(0.2, 0.4, 0.6), omega=1),
        ModelSpec("ColoredExclusion", 4, p=(0.2, 0.4, 0.6, 0.5), omega=(1, 2), m=2, gamma=0),
        ModelSpec("BiasedPermutations", 3, b=[[0.1, 0, 0], [0, 0.2, 0], [0, 0, 0.3]]),
        ModelSpec("KacSphere", 4, omega=2.0),
        ModelSpec("FlatKac", 3, omega=1.5),
    ]
    for k, spec in enumerate(specs):
        path = tmp_path / f"s{k}.json"
        path.write_text(json.dumps(spec.to_dict()))
        assert load_spec(path) == spec


def test_spec_file_errors(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{\n  "variant": "DisorderedExclusion",\n  "n": 3,\n  "p": [0.1, 0.2 0.3]\n}')
    with pytest.raises(SpecParseError) as exc:
        load_spec(bad)
    assert exc.value.line == 4
    with pytest.raises(ModelError):
        spec_from_dict({"variant": "DisorderedExclusion", "n": 3, "p": [0.1] * 3, "omega": 1, "extra": 1})
    with pytest.raises(ModelError):
        spec_from_dict({"variant": "Nope", "n": 3})
