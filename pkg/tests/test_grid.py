import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dampedqbm.grid import (
    CorruptedStateError,
    DensityField,
    Quadrant,
    SpatialGrid,
    abs_integral,
    hermiticity_defect,
    make_grid,
    quadrant_integral,
    trace,
)
from dampedqbm.states import GaussianSpec, double_gaussian, gaussian_pure, gaussian_wavefunction


def test_five_point_grid():
    g = make_grid(8.0, 5, min_points=5)
    np.testing.assert_array_equal(g.points, [-8, -4, 0, 4, 8])
    assert g.spacing == 4.0


def test_spacing_257():
    assert make_grid(8.0, 257).spacing == 0.0625


@pytest.mark.parametrize("n", [4, 256])
def test_even_point_count_rejected(n):
    with pytest.raises(ValueError, match="even point count"):
        make_grid(8.0, n)


@pytest.mark.parametrize("L", [0.0, -1.0])
def test_nonpositive_half_width_rejected(L):
    with pytest.raises(ValueError):
        make_grid(L, 33)


def test_minimum_point_count():
    with pytest.raises(ValueError):
        make_grid(8.0, 31)


@given(L=st.floats(0.5, 50), m=st.integers(16, 400))
def test_grid_symmetry(L, m):
    g = make_grid(L, 2 * m + 1)
    x = g.points
    assert x[g.center] == 0.0
    assert np.all(np.diff(x) > 0)
    np.testing.assert_array_equal(x, -x[::-1])
    np.testing.assert_allclose(x, -L + np.arange(g.n_points) * g.spacing, rtol=0, atol=1e-12 * L)


def test_field_shape_checked(grid8):
    with pytest.raises(ValueError):
        DensityField(grid8, np.zeros((3, 3)))


def test_trace_zero_field(grid8):
    assert trace(DensityField(grid8, np.zeros((257, 257)))) == 0.0


def test_trace_single_gaussian(grid8):
    assert trace(gaussian_pure(GaussianSpec(1.0, 0.35), grid8)) == pytest.approx(1.0, abs=1e-6)


def test_trace_double_gaussian_against_quadrature(grid8):
    # closed-form state with analytic normalization; trace must come out as 1
    from scipy.integrate import quad

    xc, s = 2.5, 0.35
    norm_sq = 1.0 / quad(lambda x: (gaussian_wavefunction(x, xc, s) + gaussian_wavefunction(x, -xc, s)) ** 2, -20, 20, epsabs=1e-14, points=[-xc, xc])[0]
    assert trace(double_gaussian(xc, s, grid8)) == pytest.approx(1.0, abs=1e-6)
    from dampedqbm.states import double_gaussian_norm

    assert double_gaussian_norm(xc, s) ** 2 == pytest.approx(norm_sq, abs=1e-12)


def test_trace_flags_imaginary_diagonal(grid8):
    v = np.zeros((257, 257), complex)
    v[128, 128] = 1j
    with pytest.raises(CorruptedStateError):
        trace(DensityField(grid8, v))


def test_hermiticity_defect_examples(grid8, rng):
    a = rng.standard_normal((257, 257)) + 1j * rng.standard_normal((257, 257))
    assert hermiticity_defect(DensityField(grid8, a + a.conj().T)) == 0.0
    assert hermiticity_defect(DensityField(grid8, np.full((257, 257), 1j))) == 2.0


def test_quadrants_of_diagonal_field(grid8):
    f = DensityField(grid8, np.diag(np.exp(-grid8.points**2)).astype(complex))
    assert quadrant_integral(f, Quadrant.OFF_RIGHT_LEFT) == 0.0


def test_symmetric_state_off_diagonal_quadrants_equal(grid8):
    f = double_gaussian(2.5, 0.35, grid8)
    a = quadrant_integral(f, "x>0,y<0")
    b = quadrant_integral(f, "x<0,y>0")
    assert abs(a - b) < 1e-12


def test_quadrant_integral_against_1d_quadrature(grid8):
    from scipy.integrate import quad

    s = 0.35
    one = quad(lambda x: gaussian_wavefunction(x, 0.0, s), -10, 10, epsabs=1e-14)[0]
    f = double_gaussian(2.5, s, grid8)
    assert quadrant_integral(f, Quadrant.OFF_RIGHT_LEFT) == pytest.approx(0.5 * one**2, rel=1e-5)


def test_quadrants_add_up(grid8, rng):
    a = rng.standard_normal((257, 257)) + 1j * rng.standard_normal((257, 257))
    f = DensityField(grid8, a)
    total = sum(quadrant_integral(f, q) for q in Quadrant)
    assert total == pytest.approx(abs_integral(f), rel=1e-13)


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_reflection_preserves_integrals(seed):
    g = make_grid(8.0, 65)
    r = np.random.default_rng(seed)
    a = r.standard_normal((65, 65)) + 1j * r.standard_normal((65, 65))
    a = a + a.conj().T
    f = DensityField(g, a)
    assert trace(f.reflected()) == trace(f)
    assert abs_integral(f.reflected()) == abs_integral(f)


def test_states_trace_to_1e6_on_production_grids():
    for L, n in [(8.0, 129), (8.0, 257), (14.0, 257)]:
        g = make_grid(L, n)
        assert abs(trace(double_gaussian(2.5, 0.35, g)) - 1) < 1e-6
        assert abs(trace(gaussian_pure(GaussianSpec(2.5, 0.35), g)) - 1) < 1e-6
