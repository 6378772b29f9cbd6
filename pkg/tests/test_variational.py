import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from zakharov_lab.evolution import evolve
from zakharov_lab.functionals import k_functional
from zakharov_lab.grid import make_grid
from zakharov_lab.ground_state import scale_ground_state
from zakharov_lab.state import State
from zakharov_lab.variational import (
    THRESHOLD_RTOL, Verdict, admissible_lambda, b_function, classify, lemma24_audit,
    lemma24_margin, minimality_probe, mu_root, sign_persistence_audit,
)

from conftest import gaussian


def test_b_function_values():
    assert b_function(0.0) == pytest.approx(2.0, abs=1e-12)
    assert b_function(1.0) == pytest.approx(np.sqrt(6.0), abs=1e-12)
    mu = np.linspace(0.0, 20.0, 4001)
    assert np.all(np.diff(b_function(mu)) > 0)
    with pytest.raises(ValueError):
        b_function(-0.1)


def _scaled_q(gs, a):
    u = scale_ground_state(gs, 1.0) * a
    return State(u, u * u)


@pytest.mark.parametrize("a,verdict", [
    (0.3, Verdict.SCATTERING), (0.9, Verdict.SCATTERING), (0.999, Verdict.SCATTERING),
    (1.0, Verdict.NOT_BELOW), (1.001, Verdict.GROWUP), (1.4, Verdict.GROWUP),
])
def test_classify_scaled_ground_state(gs, a, verdict):
    c = classify(_scaled_q(gs, a), gs)
    assert c.verdict is verdict
    if verdict is not Verdict.NOT_BELOW:
        assert c.product < gs.threshold * (1 - THRESHOLD_RTOL)
        # the vertex of M lam^2 - J lam + E_Z is 1/a^2 for these data
        assert c.lambda_star == pytest.approx(1 / a**2, rel=1e-9)
    assert c.as_dict()["verdict"] == verdict.value


def test_classify_zero_and_small(gs):
    g = gs.profile.grid
    assert classify(State(g.zeros(), g.zeros()), gs).verdict is Verdict.ZERO
    assert classify(State(gaussian(g, 0.1), g.zeros()), gs).verdict is Verdict.SCATTERING


def test_admissible_lambda():
    assert admissible_lambda(1.0, 1.0, 3.0) == pytest.approx(1.5)
    assert admissible_lambda(3.0, 1.0, 3.0) is None
    with pytest.raises(ValueError):
        admissible_lambda(1.0, 0.0, 3.0)


@settings(max_examples=25, deadline=None)
@given(st.floats(0.2, 3.0), st.floats(0.4, 3.0))
def test_mu_root_zeroes_k(amp, sigma):
    g = make_grid(1023, 48.0)
    u = gaussian(g, amp, sigma)
    mu = mu_root(u)
    # keep the rescaled profile resolved and inside the box
    assume(0.5 < sigma / mu < 6.0)
    scaled = g.field(mu**1.5 * amp * np.exp(-0.5 * (mu * g.r / sigma) ** 2))
    g2 = k_functional(scaled) + 0.75 * np.sum(np.abs(scaled.values) ** 4 * g.weights)
    assert abs(k_functional(scaled)) < 1e-8 * g2


def test_mu_root_zero_field(small_grid):
    with pytest.raises(ValueError):
        mu_root(small_grid.zeros())


def test_lemma24_margin_on_ground_state(gs):
    m = lemma24_margin(gs.profile, 1.0, 0.0, gs.j)
    assert m.k == pytest.approx(0.0, abs=1e-6)
    small = lemma24_margin(gs.profile * 0.5, 1.0, 0.5, gs.j)
    assert small.hypothesis_ok and small.k > 0 and small.margin >= 0
    with pytest.raises(ValueError):
        lemma24_margin(gs.profile, 0.0, 0.0, gs.j)


def test_lemma24_audit_small(gs):
    a = lemma24_audit(gs.j, samples=2000, seed=3)
    b = lemma24_audit(gs.j, samples=2000, seed=3)
    assert a["samples"] == 2000 and not a["violations"]
    assert a["counts"]["k_nonneg"] > 0 and a["counts"]["k_neg"] > 0
    assert a == b


def test_sign_persistence_below_threshold(gs):
    traj = evolve(_scaled_q(gs, 0.5), 0.2, 1e-3, sample_every=20)
    rep = sign_persistence_audit(traj)
    assert rep.initial_sign == 1 and not rep.sign_changed and rep.k_min > 0


def test_ground_state_minimizes_rescaled_action(gs):
    ratios = minimality_probe(gs, count=60, seed=1)
    assert np.all(ratios >= 1.0 - 1e-9)
