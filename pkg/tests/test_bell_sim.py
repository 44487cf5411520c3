import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import SEED, sigma3
from hvlab import bell_sim
from hvlab.bell_sim import CoincidenceCounts, RunConfig, Semantics
from hvlab.errors import ConfigError, StatisticsError
from hvlab.hv_core import BellState, Discipline, GeneratorConfig, UniformIntegral

PI = math.pi
N = 1_000_000


def bern(**kw):
    return RunConfig(seed=SEED, discipline=Discipline.BERNOULLI, **{"n_intervals": N, **kw})


def pp(cfg):
    return bell_sim.run_bell(cfg).fraction("pp")


# run_bell examples

@pytest.mark.parametrize("discipline", list(Discipline))
def test_psi_minus_aligned_is_zero(discipline):
    c = bell_sim.run_bell(RunConfig(seed=SEED, alpha=0.4, beta=0.4, discipline=discipline))
    assert c.n_pp == 0 and c.n_mm == 0


def test_psi_minus_crossed_half():
    assert abs(pp(bern(alpha=PI / 2, beta=0.0)) - 0.5) < 0.0015


def test_phi_plus_pi_over_3():
    assert abs(pp(bern(state=BellState.PHI_PLUS, alpha=PI / 3, beta=0.0)) - 0.125) < 0.0015


def test_accumulator_default_tracks_law():
    cfg = RunConfig(seed=SEED, alpha=0.0, beta=-PI / 3)
    assert cfg.discipline is Discipline.ACCUMULATOR
    assert abs(pp(cfg) - 0.375) < 0.002


def joint_fractions(c):
    return np.array([c.fraction(k) for k in ("pp", "pm", "mp", "mm")])


@pytest.mark.parametrize("state", list(BellState))
def test_joint_table(state):
    alpha, beta = PI / 7, PI / 7 - 0.6
    c = bell_sim.run_bell(bern(state=state, alpha=alpha, beta=beta, n_intervals=400_000))
    law = {BellState.PSI_MINUS: math.sin(alpha - beta) ** 2, BellState.PHI_PLUS: math.cos(alpha - beta) ** 2,
           BellState.PSI_PLUS: math.sin(alpha + beta) ** 2, BellState.PHI_MINUS: math.cos(alpha + beta) ** 2}[state]
    expected = np.array([law / 2, (1 - law) / 2, (1 - law) / 2, law / 2])
    assert c.n_joint == c.n_intervals
    for got, p in zip(joint_fractions(c), expected):
        assert abs(got - p) < sigma3(p, c.n_intervals)
    np.testing.assert_allclose(list(bell_sim.analytic_joint(state, alpha, beta).values()), expected, atol=1e-15)


def test_joint_events_never_exceed_intervals():
    gen = GeneratorConfig(modulus_mode=UniformIntegral(0.5, 1.5))
    for d in Discipline:
        c = bell_sim.run_bell(RunConfig(seed=1, n_intervals=50_000, generator=gen, discipline=d, beta=0.3))
        assert c.n_joint <= c.n_intervals


@pytest.mark.parametrize("remote", [0.0, 0.5, 1.0, 2.0, 3.0])
def test_marginals_independent_of_remote_angle(remote):
    c = bell_sim.run_bell(bern(alpha=0.3, beta=remote, n_intervals=400_000))
    for singles in (c.a_plus, c.a_minus, c.b_plus, c.b_minus):
        assert abs(singles / c.n_intervals - 0.5) < sigma3(0.5, c.n_intervals)


def test_psi_minus_matches_phi_plus_shifted():
    n = 400_000
    for delta in (0.2, 0.7, 1.3):
        a = pp(bern(alpha=0.0, beta=-delta, n_intervals=n))
        b = pp(bern(state=BellState.PHI_PLUS, alpha=0.0, beta=-(delta + PI / 2), n_intervals=n))
        p = 0.5 * math.sin(delta) ** 2
        assert abs(a - b) < 3 * math.sqrt(2 * p * (1 - p) / n)


# determinism and partitions

def test_same_seed_same_counts():
    cfg = bern(beta=0.4, n_intervals=100_000)
    assert bell_sim.run_bell(cfg) == bell_sim.run_bell(cfg)
    assert bell_sim.run_bell(cfg) != bell_sim.run_bell(replace(cfg, seed=SEED + 1))


@pytest.mark.parametrize("k", [2, 3, 8])
def test_bernoulli_partition_invariance(k):
    cfg = bern(beta=0.9, n_intervals=300_001)
    assert bell_sim.run_bell(cfg, partitions=k) == bell_sim.run_bell(cfg, partitions=1)


@pytest.mark.parametrize("k", [2, 5])
def test_accumulator_partitions_singles_bound(k):
    # With every interval at u no channel fires twice, so singles are particle counts.
    cfg = RunConfig(seed=4, beta=0.9, n_intervals=6 * 65536)
    one, many = bell_sim.run_bell(cfg), bell_sim.run_bell(cfg, partitions=k)
    for name in ("a_plus", "a_minus", "b_plus", "b_minus"):
        assert abs(getattr(one, name) - getattr(many, name)) <= k - 1


# counts record

def test_counts_add_and_fraction():
    a = CoincidenceCounts(1, 2, 3, 4, 20, 5, 6, 7, 8)
    b = CoincidenceCounts(1, 1, 1, 1, 10, 1, 1, 1, 1)
    s = a + b
    assert (s.n_pp, s.n_mm, s.n_intervals, s.b_minus) == (2, 5, 30, 9)
    assert s.n_joint == 14
    assert s.fraction("mp") == pytest.approx(4 / 30)


def test_tally_counts_multi_particle_as_one():
    c = bell_sim.tally(np.array([2, 0, 1]), np.array([0, 1, 0]), np.array([3, 1, 0]), np.array([0, 0, 1]), 3)
    assert (c.n_pp, c.n_pm, c.n_mp, c.n_mm) == (1, 1, 1, 0)
    assert c.a_plus == 2


# correlation

def test_correlation_example():
    assert bell_sim.correlation(CoincidenceCounts(0, 500, 500, 0, 1000)) == -1.0


def test_correlation_no_events():
    with pytest.raises(StatisticsError):
        bell_sim.correlation(CoincidenceCounts(n_intervals=10))


@pytest.mark.parametrize("delta,expected", [(PI / 4, 0.0), (PI / 8, -math.sqrt(2) / 2)])
def test_correlation_psi_minus(delta, expected):
    e = bell_sim.correlation(bell_sim.run_bell(bern(alpha=0.2, beta=0.2 - delta)))
    assert abs(e - expected) < 0.005


@given(st.floats(-PI, PI))
def test_analytic_correlation_psi_minus(delta):
    assert bell_sim.analytic_correlation(BellState.PSI_MINUS, delta, 0.0) == pytest.approx(-math.cos(2 * delta), abs=1e-12)


# CHSH

def test_chsh_projection():
    r = bell_sim.chsh(bern())
    assert abs(r.S - 2 * math.sqrt(2)) < 0.01
    assert r.S_stderr < 0.005
    assert float(r) == r.S


def test_chsh_naive_uniform_control():
    r = bell_sim.chsh(bern(semantics=Semantics.NAIVE_UNIFORM))
    assert r.S <= 2.01


def test_chsh_degenerate_angles():
    r = bell_sim.chsh(bern(n_intervals=200_000), 0.3, 0.3, 0.3, 0.3)
    assert len(set(r.E)) == 1
    assert r.S == pytest.approx(2 * abs(r.E[0]), abs=1e-12)
    assert r.S <= 2 + 0.01


def test_chsh_control_separation_same_seed():
    base = bern(n_intervals=300_000)
    assert bell_sim.chsh(base).S >= 2.8 - 0.01
    assert bell_sim.chsh(replace(base, semantics=Semantics.NAIVE_UNIFORM)).S <= 2 + 0.01


def test_chsh_settings_order():
    assert bell_sim.chsh_settings(1, 2, 3, 4) == ((1, 3), (1, 4), (2, 3), (2, 4))
    assert bell_sim.chsh_from_correlations(-0.7, 0.7, -0.7, -0.7) == pytest.approx(2.8)


@given(st.tuples(*[st.floats(0, PI)] * 4))
def test_analytic_chsh_bounded_by_tsirelson(a):
    assert bell_sim.analytic_chsh(BellState.PSI_MINUS, *a) <= 2 * math.sqrt(2) + 1e-12


def test_analytic_chsh_canonical():
    assert bell_sim.analytic_chsh(BellState.PSI_MINUS, *bell_sim.CANONICAL_CHSH) == pytest.approx(2 * math.sqrt(2), abs=1e-12)


# Malus

def test_malus_aligned_and_crossed_exact():
    for d in Discipline:
        cfg = RunConfig(seed=SEED, n_intervals=200_000, discipline=d)
        assert bell_sim.run_malus(cfg, 0.3, 0.3) == 1.0
        assert bell_sim.run_malus(cfg, 0.3, 0.3 - PI / 2) == 0.0


def test_malus_pi_over_6():
    assert abs(bell_sim.run_malus(bern(), 0.0, PI / 6) - 0.75) < 0.005


def test_malus_subset_weight_half():
    for alpha in (0.0, 0.8, 2.2):
        mc = bell_sim.malus_counts(bern(n_intervals=400_000), alpha, alpha)
        assert abs(mc.subset_fraction - 0.5) < sigma3(0.5, 400_000)


# sweep

def test_sweep_psi_minus_analytic_column():
    rows = bell_sim.sweep_coincidence(bern(n_intervals=1000), [0, PI / 4, PI / 2])
    np.testing.assert_allclose([r.analytic for r in rows], [0.0, 0.25, 0.5], atol=1e-15)
    assert [r.beta for r in rows] == pytest.approx([r.alpha - r.delta for r in rows])


def test_sweep_phi_minus_zero():
    rows = bell_sim.sweep_coincidence(bern(state=BellState.PHI_MINUS, n_intervals=1000), [0.0])
    assert rows[0].analytic == 0.5


def test_sweep_within_three_sigma():
    grid = [k * PI / 8 for k in range(9)]
    for r in bell_sim.sweep_coincidence(bern(n_intervals=200_000, alpha=0.1), grid):
        tol = sigma3(r.analytic, 200_000)
        assert abs(r.fraction - r.analytic) <= (tol if tol > 0 else 0.0)


def test_sweep_empty_grid():
    with pytest.raises(ConfigError):
        bell_sim.sweep_coincidence(bern(), [])


# config

@pytest.mark.parametrize("kw", [{"n_intervals": 0}, {"n_intervals": 1.5}, {"seed": "x"}, {"alpha": math.inf},
                                {"state": "psi-zero"}])
def test_run_config_rejects(kw):
    with pytest.raises((ConfigError, ValueError)):
        RunConfig(**{"seed": 1, **kw})
