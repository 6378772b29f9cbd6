import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from zakharov_lab.diagnostics import (
    NormSpec, besov_norm, growup_indicator, h1_l2_norm, pullback, scattering_indicator,
    spacetime_norm, z_norm,
)
from zakharov_lab.evolution import evolve, linear_flow
from zakharov_lab.grid import gradient_norm, lp_norm, make_grid
from zakharov_lab.state import State

from conftest import gaussian

GRID = make_grid(1023, 48.0)


def _profile(c1, c2, s1, s2):
    r = GRID.r
    return GRID.field(c1 * np.exp(-0.5 * (r / s1) ** 2) + c2 * np.cos(2 * r) * np.exp(-(r / s2) ** 2))


profiles = st.builds(_profile, st.floats(-2, 2), st.floats(-2, 2), st.floats(0.5, 3), st.floats(0.5, 3))


@settings(max_examples=30, deadline=None)
@given(profiles)
def test_l2_equivalence(f):
    # 1/2 <= sum phi_k^2 <= 1 gives 1/2 ||f||^2 <= B^0_{2,2}(f)^2 <= ||f||^2
    b = besov_norm(f, 0.0, 2.0) ** 2
    l2 = lp_norm(f, 2) ** 2
    assert 0.5 * l2 * (1 - 1e-12) <= b <= l2 * (1 + 1e-12)


@settings(max_examples=30, deadline=None)
@given(profiles)
def test_gradient_equivalence(f):
    # the block scale 2^k is within 2^{3/4} of every frequency in the block
    b = besov_norm(f, 1.0, 2.0)
    g = gradient_norm(f)
    assert 2**-0.75 * np.sqrt(0.5) * g * (1 - 1e-12) <= b <= 2**0.75 * g * (1 + 1e-12)


@settings(max_examples=30, deadline=None)
@given(profiles, profiles, st.floats(-3, 3).filter(lambda c: c == 0 or abs(c) > 1e-6),
       st.sampled_from([-0.6, 0.0, 1.0]),
       st.sampled_from([2.0, 4.0, np.inf]))
def test_norm_axioms(f, g, c, s, p):
    nf, ng = besov_norm(f, s, p), besov_norm(g, s, p)
    assert besov_norm(f * c, s, p) == pytest.approx(abs(c) * nf, rel=1e-10, abs=1e-300)
    assert besov_norm(f + g, s, p) <= (nf + ng) * (1 + 1e-12)
    assert besov_norm(f * 1j, s, p) == pytest.approx(nf, rel=1e-12, abs=1e-300)


def test_inhomogeneous_low_block():
    u = gaussian(GRID, 1.0, 4.0)
    hom = besov_norm(u, -0.6, np.inf)
    inh = besov_norm(u, -0.6, np.inf, homogeneous=False)
    # low blocks get weight 1 instead of 2^{-2 s k} >= 1, so the norm can only drop
    assert inh < hom
    assert besov_norm(GRID.zeros(), -0.6, np.inf) == 0.0
    with pytest.raises(ValueError):
        besov_norm(u, 0.0, 0.5)


@pytest.mark.parametrize("b,d", [(-0.1, 0.5), (1.5, 0.5), (0.5, 0.0), (0.5, 1.5)])
def test_normspec_validation(b, d):
    with pytest.raises(ValueError):
        NormSpec(b, d, 0.0)


def _free_trajectory():
    s = State(gaussian(GRID, 1e-5), GRID.field(1e-5 * np.exp(-GRID.r**2)))
    return evolve(s, 1.0, 0.01, sample_every=10)


def test_spacetime_norms_of_free_flow():
    traj = _free_trajectory()
    per_time = [besov_norm(s.u, 0.0, 2.0) for s in traj.states]
    # the LP multipliers commute with the flow, so the L^2-based norm is constant
    assert np.ptp(per_time) < 1e-6 * per_time[0]
    assert spacetime_norm(traj, NormSpec(0.0, 0.5, 0.0)) == pytest.approx(max(per_time))
    assert spacetime_norm(traj, NormSpec(0.5, 0.5, 0.0)) == pytest.approx(per_time[0], rel=1e-6)
    with pytest.raises(ValueError):
        spacetime_norm(traj, NormSpec(0.0, 0.5, 0.0), component="x")


def test_pullback_is_constant_for_free_flow():
    s = State(gaussian(GRID, 1.0), GRID.field(np.exp(-GRID.r**2)))
    u0, n0 = pullback(s)
    u1, n1 = pullback(linear_flow(s, 0.7))
    np.testing.assert_allclose(u1, u0, atol=1e-12)
    np.testing.assert_allclose(n1, n0, atol=1e-12)
    assert h1_l2_norm(linear_flow(s, 0.7)) == pytest.approx(h1_l2_norm(s), rel=1e-12)


def test_z_norm():
    z = z_norm(_free_trajectory())
    assert z["x"] == max(z["x_series"]) and z["y"] == max(z["y_series"])
    with pytest.raises(ValueError):
        z_norm(_free_trajectory(), delta=0.5)


def test_scattering_indicator_small_data():
    s = State(gaussian(GRID, 0.3), GRID.zeros())
    ind = scattering_indicator(evolve(s, 4.0, 1e-2, sample_every=20))
    assert ind.l4_decreasing and ind.cauchy_decreasing and ind.consistent
    assert ind.l4_slope < 0


def test_growup_indicator_flags():
    traj = _free_trajectory()
    ind = growup_indicator(traj)
    assert not ind.consistent
    traj.blowup_suspected = True
    assert growup_indicator(traj).consistent
    with pytest.raises(ValueError):
        scattering_indicator(evolve(State(gaussian(GRID, 0.1), GRID.zeros()), 0.02, 0.01))
