import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from zakharov_lab.functionals import (
    action, deviation, functional_record, g_functional, k_functional, mass, nls_energy,
    second_order_energy, zakharov_energy,
)
from zakharov_lab.grid import apply_D_power, make_grid
from zakharov_lab.state import State, from_second_order, to_second_order

from conftest import gaussian

PI32 = np.pi**1.5


@pytest.mark.parametrize("amp", [0.3, 1.0, 2.5])
def test_gaussian_functionals(ref_grid, amp):
    # closed forms: ||u||^2 = a^2 pi^1.5, ||grad u||^2 = 1.5 a^2 pi^1.5,
    # ||u||_4^4 = a^4 pi^1.5 / 2^1.5
    u = gaussian(ref_grid, amp)
    g2, l2, q4 = 1.5 * amp**2 * PI32, amp**2 * PI32, amp**4 * PI32 / 2**1.5
    assert mass(u) == pytest.approx(0.5 * l2, rel=1e-12)
    assert nls_energy(u) == pytest.approx(0.5 * g2 - 0.25 * q4, rel=1e-11)
    assert k_functional(u) == pytest.approx(g2 - 0.75 * q4, rel=1e-11)
    assert action(u, 2.0) == pytest.approx(0.5 * g2 - 0.25 * q4 + 2.0 * l2, rel=1e-11)
    assert g_functional(u, 2.0) == pytest.approx(g2 / 6 + 2.0 * l2, rel=1e-11)


def test_zakharov_energy_forms(ref_grid):
    r = ref_grid.r
    u = gaussian(ref_grid, 1.2)
    n = ref_grid.field(0.7 * np.exp(-r**2) + 0.2j * np.exp(-0.25 * r**2))
    s = State(u, n)
    rec = functional_record(s)
    nu_c, nu_r = deviation(s)
    expected = nls_energy(u) + 0.25 * (nu_r.values**2 * ref_grid.weights).sum() \
        + 0.25 * (n.values.imag**2 * ref_grid.weights).sum()
    assert zakharov_energy(s) == pytest.approx(expected, rel=1e-12)
    assert rec.e_z == zakharov_energy(s)
    np.testing.assert_allclose(nu_c.values.imag, n.values.imag)


def test_matched_data_energy_is_nls_energy(ref_grid):
    u = gaussian(ref_grid, 0.8)
    s = State(u, u * u)
    assert zakharov_energy(s) == pytest.approx(nls_energy(u), rel=1e-12)


@pytest.mark.parametrize("alpha", [0.5, 1.0, 2.0])
def test_second_order_energy_is_twice(small_grid, alpha):
    r = small_grid.r
    u = gaussian(small_grid, 0.9)
    n0 = small_grid.field(0.4 * np.exp(-r**2))
    n1 = small_grid.field(0.3 * (r**2 - 1.5) * np.exp(-r**2 / 2))
    s = from_second_order(u, n0, n1, alpha)
    assert second_order_energy(u, n0, n1, alpha) == pytest.approx(2 * zakharov_energy(s),
                                                                  rel=1e-11)
    n_back, dn_back = to_second_order(s)
    np.testing.assert_allclose(n_back.values.real, n0.values.real, atol=1e-13)
    np.testing.assert_allclose(dn_back.values.real, n1.values.real, atol=1e-10)


@settings(max_examples=30, deadline=None)
@given(st.floats(0.05, 3.0), st.floats(0.3, 3.0), st.floats(0.0, 2 * np.pi))
def test_phase_and_scaling_invariance(amp, sigma, theta):
    g = make_grid(511, 40.0)
    u = gaussian(g, amp, sigma)
    v = u * np.exp(1j * theta)
    assert mass(v) == pytest.approx(mass(u), rel=1e-12)
    assert nls_energy(v) == pytest.approx(nls_energy(u), rel=1e-10, abs=1e-12)
    # K is the derivative of E_S along the L^2-preserving scaling mu^1.5 u(mu x)
    def scaled(mu):
        return g.field(mu**1.5 * amp * np.exp(-0.5 * (mu * g.r / sigma) ** 2))

    eps = 1e-4
    slope = (nls_energy(scaled(1 + eps)) - nls_energy(scaled(1 - eps))) / (2 * eps)
    g2 = k_functional(u) + 0.75 * np.sum(np.abs(u.values) ** 4 * g.weights)
    assert slope == pytest.approx(k_functional(u), abs=1e-7 * g2)


def test_lambda_must_be_positive(small_grid):
    u = gaussian(small_grid)
    with pytest.raises(ValueError):
        action(u, 0.0)
    with pytest.raises(ValueError):
        g_functional(u, -1.0)


def test_d_minus_one_of_second_order(small_grid):
    # Im N = -D^{-1} n1 / alpha
    r = small_grid.r
    u = gaussian(small_grid)
    n1 = small_grid.field(np.exp(-r**2))
    s = from_second_order(u, small_grid.zeros(), n1, 2.0)
    np.testing.assert_allclose(s.n_field.values.imag,
                               -apply_D_power(n1, -1.0).values.real / 2.0, atol=1e-13)
