import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import assume, given, strategies as st

from conftest import SEED, sigma3
from hvlab import bell_sim, boolean_model as bm, oracles
from hvlab.bell_sim import RunConfig
from hvlab.hv_core import BellState, Discipline

PI = math.pi
N = 1_000_000


def cfg(**kw):
    return RunConfig(seed=SEED, discipline=Discipline.BERNOULLI, **{"n_intervals": N, **kw})


def test_transmit_examples():
    assert bm.transmit(0.0, PI / 4) == 1
    assert bm.transmit(0.0, 3 * PI / 4) == 0


def test_transmit_half_for_uniform_tokens(rng):
    lam = rng.uniform(0, PI, N)
    for alpha in (0.0, 0.5, 1.7, 2.9):
        assert abs(bm.transmit(alpha, lam).mean() - 0.5) < 0.0015


def off_boundary(alpha, lam):
    d = (lam - alpha) % (PI / 2)
    return min(d, PI / 2 - d) > 1e-9


@given(st.floats(-10, 10), st.floats(0, PI, exclude_max=True))
def test_arc_complementarity(alpha, lam):
    assume(off_boundary(alpha, lam))
    assert bm.transmit(alpha, lam) + bm.transmit(alpha + PI / 2, lam) == 1


@given(st.floats(-10, 10), st.floats(-10, 10))
def test_transmit_periodic_mod_pi(alpha, lam):
    assume(off_boundary(alpha, lam))
    assert bm.transmit(alpha, lam) == bm.transmit(alpha + PI, lam)


def test_partner_examples():
    assert bm.boolean_partner(PI / 2, BellState.PSI_MINUS) == pytest.approx(0.0, abs=1e-15)
    assert bm.boolean_partner(1.234, BellState.PHI_PLUS) == pytest.approx(1.234)
    assert bm.boolean_partner(PI / 3, BellState.PHI_MINUS) == pytest.approx(2 * PI / 3)
    assert bm.boolean_partner(0.2, BellState.PSI_PLUS) == pytest.approx(0.2 + PI / 2)


@given(st.floats(0, PI, exclude_max=True))
def test_partners_land_in_range(lam):
    for s in BellState:
        assert 0 <= bm.boolean_partner(lam, s) < PI


def test_overlap_examples():
    assert bm.boolean_overlap(0.3, 0.3) == 0.5
    assert bm.boolean_overlap(PI / 4, 0.0) == pytest.approx(0.25)


@given(st.floats(-5, 5), st.floats(-5, 5))
def test_overlap_matches_quadrature(alpha, beta):
    assert bm.boolean_overlap(alpha, beta) == pytest.approx(oracles.arc_overlap_quadrature(alpha, beta, 20_000), abs=2e-4)


@given(st.floats(0, PI / 2))
def test_overlap_sawtooth(delta):
    assert bm.boolean_overlap(delta, 0.0) == pytest.approx((PI / 2 - delta) / PI, abs=1e-12)


def test_psi_minus_quarter():
    c = bm.run_boolean_bell(cfg(alpha=PI / 4, beta=0.0))
    assert abs(c.fraction("pp") - 0.25) < 0.0015


def test_psi_minus_aligned_exact_zero():
    assert bm.run_boolean_bell(cfg(alpha=0.7, beta=0.7)).n_pp == 0


def test_psi_minus_crossed_matches_vector():
    c = cfg(alpha=PI / 2, beta=0.0)
    b, v = bm.run_boolean_bell(c).fraction("pp"), bell_sim.run_bell(c).fraction("pp")
    assert abs(b - 0.5) < 0.0015 and abs(v - 0.5) < 0.0015


def test_sawtooth_grid():
    for k in range(17):
        delta = k * PI / 16
        c = bm.run_boolean_bell(cfg(alpha=0.3, beta=0.3 - delta, n_intervals=200_000))
        expected = bm.analytic_joint(BellState.PSI_MINUS, 0.3, 0.3 - delta)["pp"]
        d = delta % PI
        assert expected == pytest.approx(min(d, PI - d) / PI, abs=1e-12)
        tol = sigma3(expected, 200_000)
        assert abs(c.fraction("pp") - expected) <= (tol if tol > 0 else 0.0)


@pytest.mark.parametrize("state", list(BellState))
def test_joint_table_matches_analytic(state):
    alpha, beta = 0.4, 1.9
    c = bm.run_boolean_bell(cfg(state=state, alpha=alpha, beta=beta, n_intervals=300_000))
    exp = bm.analytic_joint(state, alpha, beta)
    assert sum(exp.values()) == pytest.approx(1.0)
    for k, p in exp.items():
        assert abs(c.fraction(k) - p) <= max(sigma3(p, 300_000), 1e-12)


def test_phi_minus_partner_rule_at_origin():
    # The mirror partner starts its arc at -beta - pi/2, so aligned analyzers at 0 never coincide.
    assert bm.analytic_joint(BellState.PHI_MINUS, 0.0, 0.0)["pp"] == 0.0
    assert bm.run_boolean_bell(cfg(state=BellState.PHI_MINUS, n_intervals=100_000)).n_pp == 0


def test_chsh_canonical():
    assert abs(bm.boolean_chsh(cfg()).S - 2.0) < 0.01
    assert bm.analytic_chsh(BellState.PSI_MINUS, *bell_sim.CANONICAL_CHSH) == pytest.approx(2.0, abs=1e-12)


def test_chsh_equal_angles():
    # Only the minus term cancels: S = |E - E + E + E| = 2|E(0)| = 2.
    r = bm.boolean_chsh(cfg(n_intervals=200_000), 0.5, 0.5, 0.5, 0.5)
    assert r.E[0] == -1.0
    assert abs(r.S - 2 * abs(r.E[0])) < 1e-12


def test_chsh_random_quadruples_bounded():
    rng = np.random.default_rng(11)
    for _ in range(20):
        a = rng.uniform(0, PI, 4)
        assert bm.boolean_chsh(cfg(n_intervals=50_000), *a).S <= 2.01
        assert bm.analytic_chsh(BellState.PSI_MINUS, *a) <= 2 + 1e-12


@given(st.floats(0, PI / 2))
def test_analytic_correlation_linear(delta):
    assert bm.analytic_correlation(BellState.PSI_MINUS, delta, 0.0) == pytest.approx(4 * delta / PI - 1, abs=1e-12)


def test_agreement_and_dominance_with_vector_model():
    n = 400_000
    for delta in (0.0, PI / 4, PI / 2, 3 * PI / 4):
        assert bm.analytic_joint(BellState.PSI_MINUS, delta, 0)["pp"] == pytest.approx(
            bell_sim.analytic_joint(BellState.PSI_MINUS, delta, 0)["pp"], abs=1e-12)
    for delta, sign in ((PI / 8, -1), (3 * PI / 8, 1)):
        c = cfg(alpha=0.2, beta=0.2 - delta, n_intervals=n)
        v, b = bell_sim.run_bell(c).fraction("pp"), bm.run_boolean_bell(c).fraction("pp")
        assert sign * (v - b) > 3 * math.sqrt((v * (1 - v) + b * (1 - b)) / n)


@pytest.mark.parametrize("k", [2, 8])
def test_partition_invariance(k):
    c = cfg(beta=1.0, n_intervals=200_000)
    assert bm.run_boolean_bell(c, k) == bm.run_boolean_bell(c)
