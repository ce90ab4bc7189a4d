import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.optimize import brentq

from dampedqbm.potentials import (
    DampingParams,
    Free,
    Linear,
    PotentialSpec,
    QuarticDoubleWell,
    barrier_height,
    dv_full_dx,
    linear_spec,
    reference_gradient,
    v_damping,
    v_full,
    v_renormalized,
    well_minima,
)
from dampedqbm.units import C_LIGHT, PROTON_MASS, mass_from_mev

from oracles import mass_via_si

WELL = PotentialSpec(QuarticDoubleWell(0.025, 2.5))
REF_DAMP = DampingParams(2.5e-4, 1.0)
TRANSFER = PotentialSpec(QuarticDoubleWell(0.005, 2.5))


def test_proton_mass_units():
    assert PROTON_MASS == pytest.approx(mass_via_si(938.0), rel=1e-12)
    assert PROTON_MASS == pytest.approx(104.37, abs=0.01)
    assert mass_from_mev(938.0) == 938e6 / C_LIGHT**2


def test_quartic_roots():
    assert v_renormalized(2.5, WELL) == 0.0
    assert v_renormalized(-2.5, WELL) == 0.0


def test_quartic_barrier_top():
    expected = PROTON_MASS * 0.025**2 * 2.5**2 / 2
    assert v_renormalized(0.0, WELL) == pytest.approx(expected, rel=1e-14)
    assert v_renormalized(0.0, WELL) == pytest.approx(0.2039, abs=1e-4)


def test_quartic_even(rng):
    x = rng.uniform(-10, 10, 100)
    np.testing.assert_array_equal(v_renormalized(x, WELL), v_renormalized(-x, WELL))


def test_damping_potential():
    assert v_damping(0.0, PROTON_MASS, REF_DAMP) == 0.0
    assert v_damping(3.7, PROTON_MASS, DampingParams(2.5e-4, 0.0)) == 0.0
    assert v_damping(2.5, PROTON_MASS, REF_DAMP) == pytest.approx(-0.5 * PROTON_MASS * 2.5e-4 * 6.25, rel=1e-14)
    assert v_damping(2.5, PROTON_MASS, REF_DAMP) == pytest.approx(-0.0816, abs=2e-4)


def test_undamped_full_equals_renormalized(rng):
    x = rng.uniform(-10, 10, 200)
    np.testing.assert_array_equal(v_full(x, WELL, DampingParams(2.5e-4, 0.0)), v_renormalized(x, WELL))


def test_full_potential_barrier_shape():
    v0 = v_full(0.0, WELL, REF_DAMP)
    assert v0 == pytest.approx(0.2039, abs=1e-4)
    assert v0 > v_full(2.5, WELL, REF_DAMP)
    assert v0 > v_full(-2.5, WELL, REF_DAMP)


def test_free_variant_keeps_damping_term():
    free = PotentialSpec(Free())
    d = DampingParams(2.5e-4, 1.0)
    assert v_full(1.0, free, d) == pytest.approx(-0.5 * PROTON_MASS * 2.5e-4, rel=1e-14)
    assert v_full(1.0, free, d) == pytest.approx(-0.01305, abs=1e-5)


@pytest.mark.parametrize(
    "spec, damp, expected",
    [
        (WELL, DampingParams(2.5e-4, 0.0), 2.5),
        (WELL, REF_DAMP, 2.7386),
        (TRANSFER, REF_DAMP, 6.1237),
    ],
)
def test_well_minima_examples(spec, damp, expected):
    lo, hi = well_minima(spec, damp)
    assert lo == -hi
    assert hi == pytest.approx(expected, abs=1e-4)
    if damp.mu > 0:
        root = brentq(lambda x: float(dv_full_dx(x, spec, damp)), 2.5 + 1e-9, 50.0, xtol=1e-14)
        assert abs(root - hi) < 1e-8


@settings(max_examples=50)
@given(
    omega=st.floats(0.002, 0.05),
    x0=st.floats(1.0, 4.0),
    gamma=st.floats(0.0, 1e-3),
    mu=st.floats(0.0, 2.0),
)
def test_minima_zero_the_gradient(omega, x0, gamma, mu):
    spec = PotentialSpec(QuarticDoubleWell(omega, x0))
    d = DampingParams(gamma, mu)
    xm = well_minima(spec, d)[1]
    h = 1e-5
    fd = (v_full(xm + h, spec, d) - v_full(xm - h, spec, d)) / (2 * h)
    assert abs(fd) < 1e-10 * max(1.0, xm**3 * spec.mass * omega**2 / x0**2)
    if gamma * mu > 1e-8:
        assert v_full(xm, spec, d) < v_full(x0, spec, d) <= v_full(0.0, spec, d)


def test_finite_difference_gradient_at_minima():
    for spec in (WELL, TRANSFER):
        xm = well_minima(spec, REF_DAMP)[1]
        h = 1e-5
        fd = (v_full(xm + h, spec, REF_DAMP) - v_full(xm - h, spec, REF_DAMP)) / (2 * h)
        assert abs(fd) < 1e-10


def test_barrier_grows_with_damping():
    assert barrier_height(TRANSFER, REF_DAMP) > barrier_height(TRANSFER, DampingParams(2.5e-4, 0.1))
    r = 2.5e-4 * 1.0 / (2 * 0.005**2)
    closed = PROTON_MASS * 0.005**2 * 2.5**2 * (1 + r) ** 2 / 2
    assert barrier_height(TRANSFER, REF_DAMP) == pytest.approx(closed, rel=1e-12)


def test_reference_gradient():
    # V_R is flat at its well bottom, so only the damping term contributes at 2.5 A
    assert reference_gradient() == pytest.approx(PROTON_MASS * 2.5e-4 * 1.0 * 2.5, rel=1e-12)
    h = 1e-5
    fd = (v_full(2.5 + h, WELL, REF_DAMP) - v_full(2.5 - h, WELL, REF_DAMP)) / (2 * h)
    assert reference_gradient() == pytest.approx(abs(fd), rel=1e-8)


@given(g=st.floats(0.1, 5.0), x=st.floats(-8, 8))
def test_linear_variant_is_linear(g, x):
    spec = linear_spec(g)
    d = DampingParams(2.5e-4, 0.0)
    assert isinstance(spec.variant, Linear)
    assert v_full(x, spec, d) - v_full(0.0, spec, d) == pytest.approx(g * spec.variant.reference_gradient * x, rel=1e-14, abs=1e-15)


def test_invalid_parameters():
    with pytest.raises(ValueError):
        QuarticDoubleWell(0.0, 2.5)
    with pytest.raises(ValueError, match="μ"):
        DampingParams(1e-4, -1.0)
    with pytest.raises(TypeError):
        well_minima(PotentialSpec(Free()), REF_DAMP)
