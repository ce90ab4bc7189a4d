import numpy as np
import pytest

from dampedqbm.grid import DensityField, Quadrant, make_grid, quadrant_integral, trace
from dampedqbm.observables import (
    ObservableSeries,
    l1_coherence,
    left_probability,
    purity,
    relative_coherence,
    right_probability,
)
from dampedqbm.states import GaussianSpec, double_gaussian, gaussian_pure


def test_l1_full_range_equals_quadrant(grid8):
    f = double_gaussian(2.5, 0.35, grid8)
    assert l1_coherence(f) == quadrant_integral(f, Quadrant.OFF_RIGHT_LEFT)
    assert l1_coherence(f, 8.0) == l1_coherence(f)


def test_l1_sign_flip_invariant(grid8):
    f = double_gaussian(2.5, 0.35, grid8)
    assert l1_coherence(DensityField(grid8, -f.values)) == l1_coherence(f)
    assert l1_coherence(DensityField(grid8, 1j * f.values)) == pytest.approx(l1_coherence(f), rel=1e-15)


def test_l1_of_diagonal_state_is_zero(grid8):
    f = gaussian_pure(GaussianSpec(5.0, 0.35), grid8)
    assert l1_coherence(f) < 1e-12


def test_l1_restricted_range(grid8):
    f = double_gaussian(2.5, 0.35, grid8)
    full = l1_coherence(f)
    # |psi| has decayed by exp(-25) at 6 A
    assert l1_coherence(f, 6.0) == pytest.approx(full, rel=1e-9)
    assert l1_coherence(f, 2.5) < 0.5 * full
    with pytest.raises(ValueError):
        l1_coherence(f, 9.0)


def test_relative_coherence_identity():
    s = ObservableSeries("C", np.arange(5.0), np.linspace(0.5, 0.1, 5))
    r = relative_coherence(s, s)
    assert r.label == "C_R"
    assert np.all(r.values == 1.0)
    assert not r.truncated


def test_relative_coherence_mismatched_times():
    a = ObservableSeries("C", np.arange(5.0), np.ones(5))
    b = ObservableSeries("C", np.arange(5.0) * 2, np.ones(5))
    with pytest.raises(ValueError):
        relative_coherence(a, b)


def test_relative_coherence_truncates_below_floor():
    t = np.arange(6.0)
    a = ObservableSeries("C", t, np.full(6, 1e-3))
    b = ObservableSeries("C", t, np.array([1.0, 0.5, 0.1, 1e-9, 1e-12, 1.0]))
    r = relative_coherence(a, b)
    assert r.truncated
    np.testing.assert_array_equal(r.times, [0.0, 1.0, 2.0])


def test_left_probability_examples(grid8):
    single = gaussian_pure(GaussianSpec(2.7386, 0.35), grid8)
    assert left_probability(single) < 1e-8
    mirrored = DensityField(grid8, single.values[::-1, ::-1].copy())
    assert left_probability(mirrored) == right_probability(single)
    assert left_probability(mirrored) == pytest.approx(1.0 - left_probability(single), abs=1e-12)
    assert left_probability(double_gaussian(2.5, 0.35, grid8)) == pytest.approx(0.5, abs=1e-9)


def test_left_plus_right_is_trace(grid8, rng):
    f = double_gaussian(1.0, 0.6, grid8)
    assert left_probability(f) + right_probability(f) == pytest.approx(trace(f), abs=1e-12)


def test_purity_of_mixture(grid8):
    f = double_gaussian(2.5, 0.35, grid8)
    v = f.values.copy()
    c = grid8.center
    v[: c + 1, c:] = 0
    v[c:, : c + 1] = 0
    assert purity(DensityField(grid8, v)) == pytest.approx(0.5, abs=1e-3)
    assert purity(gaussian_pure(GaussianSpec(0.0, 0.35), grid8)) == pytest.approx(1.0, abs=1e-6)


def test_series_container():
    s = ObservableSeries("P_left", [0.0, 5.0], [0.1, 0.2], sweep_value="0.5")
    assert s.column == "P_left@0.5"
    assert s.at(5.0) == 0.2
    with pytest.raises(KeyError):
        s.at(2.0)
    with pytest.raises(ValueError):
        ObservableSeries("x", [1.0, 0.0], [0.0, 0.0])
