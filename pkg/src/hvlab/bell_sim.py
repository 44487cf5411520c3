"""Two-station Bell experiments under the vector hidden-variable model."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields, replace
from enum import Enum
from typing import Sequence

import numpy as np

from hvlab import streams
from hvlab.errors import ConfigError, StatisticsError
from hvlab.hv_core import (
    BellState,
    DetectorState,
    Discipline,
    GeneratorConfig,
    detect_many,
    generate_batch,
    modulus_integral,
    partner_hv,
    project,
)

CANONICAL_CHSH = (0.0, math.pi / 4, math.pi / 8, 3 * math.pi / 8)

# Stream tags keep the Bell, Malus and Boolean drivers on disjoint substreams.
TAG_BELL = 1
TAG_MALUS = 2


class Semantics(str, Enum):
    PROJECTION = "projection"
    NAIVE_UNIFORM = "naive-uniform"


@dataclass(frozen=True)
class CoincidenceCounts:
    """Joint tallies by (A output, B output); ``+`` transmitted, ``-`` reflected.

    The ``a_*``/``b_*`` fields are singles: intervals in which that channel
    registered at least one particle, whatever the other station did.
    """

    n_pp: int = 0
    n_pm: int = 0
    n_mp: int = 0
    n_mm: int = 0
    n_intervals: int = 0
    a_plus: int = 0
    a_minus: int = 0
    b_plus: int = 0
    b_minus: int = 0

    def __add__(self, other: CoincidenceCounts) -> CoincidenceCounts:
        return CoincidenceCounts(*(getattr(self, f.name) + getattr(other, f.name) for f in fields(self)))

    @property
    def n_joint(self) -> int:
        return self.n_pp + self.n_pm + self.n_mp + self.n_mm

    def fraction(self, key: str = "pp") -> float:
        return getattr(self, f"n_{key}") / self.n_intervals

    def stderr(self, key: str = "pp") -> float:
        p = self.fraction(key)
        return math.sqrt(p * (1 - p) / self.n_intervals)


@dataclass(frozen=True)
class RunConfig:
    seed: int
    state: BellState = BellState.PSI_MINUS
    semantics: Semantics = Semantics.PROJECTION
    alpha: float = 0.0
    beta: float = 0.0
    n_intervals: int = 1_000_000
    generator: GeneratorConfig = field(default_factory=GeneratorConfig)
    discipline: Discipline = Discipline.ACCUMULATOR

    def __post_init__(self):
        object.__setattr__(self, "state", BellState(self.state))
        object.__setattr__(self, "semantics", Semantics(self.semantics))
        object.__setattr__(self, "discipline", Discipline(self.discipline))
        if not isinstance(self.n_intervals, (int, np.integer)) or self.n_intervals < 1:
            raise ConfigError(f"n_intervals must be a positive integer, got {self.n_intervals!r}")
        if not isinstance(self.seed, (int, np.integer)) or not -(1 << 63) <= self.seed < (1 << 64):
            raise ConfigError(f"seed must be a 64-bit integer, got {self.seed!r}")
        for name in ("alpha", "beta"):
            if not math.isfinite(getattr(self, name)):
                raise ConfigError(f"{name} must be finite")


# -- station helpers -----------------------------------------------------------

def _source_angles(rng: np.random.Generator, semantics: Semantics, alpha: float, n: int):
    """Station-A directions. Projection: alpha or alpha + pi/2 with equal weight."""
    if semantics is Semantics.PROJECTION:
        orth = rng.random(n) < 0.5
        return alpha + orth * (np.pi / 2)
    return rng.uniform(0.0, np.pi, n)


class _Station:
    """Two-output analyzer with one detector per output."""

    def __init__(self, discipline: Discipline):
        self.discipline = discipline
        self.plus = DetectorState(discipline)
        self.minus = DetectorState(discipline)

    def counts(self, hv, angle: float, rng: np.random.Generator):
        par, orth = project(hv, angle)
        m_plus, m_minus = modulus_integral(par), modulus_integral(orth)
        if self.discipline is Discipline.BERNOULLI:
            # One uniform per station: with m+ + m- = u the outputs are exclusive.
            r = rng.random(m_plus.shape)
            return detect_many(self.plus, m_plus, uniforms=r), detect_many(self.minus, m_minus, uniforms=1.0 - r)
        return detect_many(self.plus, m_plus), detect_many(self.minus, m_minus)


def tally(a_plus, a_minus, b_plus, b_minus, n: int) -> CoincidenceCounts:
    ap, am, bp, bm = (x > 0 for x in (a_plus, a_minus, b_plus, b_minus))
    return CoincidenceCounts(
        n_pp=int(np.count_nonzero(ap & bp)),
        n_pm=int(np.count_nonzero(ap & bm)),
        n_mp=int(np.count_nonzero(am & bp)),
        n_mm=int(np.count_nonzero(am & bm)),
        n_intervals=n,
        a_plus=int(np.count_nonzero(ap)),
        a_minus=int(np.count_nonzero(am)),
        b_plus=int(np.count_nonzero(bp)),
        b_minus=int(np.count_nonzero(bm)),
    )


# -- Bell runs -----------------------------------------------------------------

def _bell_partition(cfg: RunConfig, group: list[streams.Block]) -> CoincidenceCounts:
    sta, stb = _Station(cfg.discipline), _Station(cfg.discipline)
    total = CoincidenceCounts()
    for blk in group:
        rng = streams.block_rng(cfg.seed, blk.index, TAG_BELL)
        angles = _source_angles(rng, cfg.semantics, cfg.alpha, blk.size)
        hv_a = generate_batch(rng, cfg.generator, blk.size, angles)
        hv_b = partner_hv(hv_a, cfg.state)
        a_plus, a_minus = sta.counts(hv_a, cfg.alpha, rng)
        b_plus, b_minus = stb.counts(hv_b, cfg.beta, rng)
        total = total + tally(a_plus, a_minus, b_plus, b_minus, blk.size)
    return total


def run_bell(cfg: RunConfig, partitions: int = 1) -> CoincidenceCounts:
    """Run ``cfg.n_intervals`` intervals and tally joint outcomes.

    Each partition gets fresh detectors; Bernoulli results do not depend on
    ``partitions`` at all, accumulator results by at most one count per
    detector per partition.
    """
    parts = streams.map_partitions(lambda g: _bell_partition(cfg, g), cfg.n_intervals, partitions)
    return sum(parts, CoincidenceCounts())


def coincidence_law(state: BellState, alpha: float, beta: float) -> float:
    """Probability that station B transmits given that station A transmitted."""
    state = BellState(state)
    if state is BellState.PSI_MINUS:
        return math.sin(alpha - beta) ** 2
    if state is BellState.PHI_PLUS:
        return math.cos(alpha - beta) ** 2
    if state is BellState.PSI_PLUS:
        return math.sin(alpha + beta) ** 2
    return math.cos(alpha + beta) ** 2


def analytic_joint(state: BellState, alpha: float, beta: float) -> dict[str, float]:
    """Expected joint fractions under projection semantics with every interval at u."""
    law = coincidence_law(state, alpha, beta)
    return {"pp": law / 2, "pm": (1 - law) / 2, "mp": (1 - law) / 2, "mm": law / 2}


def analytic_correlation(state: BellState, alpha: float, beta: float) -> float:
    return 2 * coincidence_law(state, alpha, beta) - 1


def correlation(counts: CoincidenceCounts) -> float:
    n = counts.n_joint
    if n == 0:
        raise StatisticsError("correlation undefined: no joint detections")
    return (counts.n_pp + counts.n_mm - counts.n_pm - counts.n_mp) / n


def correlation_stderr(counts: CoincidenceCounts) -> float:
    e = correlation(counts)
    return math.sqrt(max(0.0, 1 - e * e) / counts.n_joint)


@dataclass(frozen=True)
class ChshResult:
    S: float
    angles: tuple[float, float, float, float]
    E: tuple[float, float, float, float]
    E_stderr: tuple[float, float, float, float]
    counts: tuple[CoincidenceCounts, ...]

    @property
    def S_stderr(self) -> float:
        return math.sqrt(sum(s * s for s in self.E_stderr))

    def __float__(self) -> float:
        return self.S


def chsh_from_correlations(e_ab: float, e_abp: float, e_apb: float, e_apbp: float) -> float:
    return abs(e_ab - e_abp + e_apb + e_apbp)


def chsh_settings(a, a_prime, b, b_prime):
    """Setting pairs in estimator order: (a,b), (a,b'), (a',b), (a',b')."""
    return ((a, b), (a, b_prime), (a_prime, b), (a_prime, b_prime))


def chsh_from_counts(angles, counts: Sequence[CoincidenceCounts]) -> ChshResult:
    es = tuple(correlation(c) for c in counts)
    return ChshResult(
        S=chsh_from_correlations(*es),
        angles=tuple(angles),
        E=es,
        E_stderr=tuple(correlation_stderr(c) for c in counts),
        counts=tuple(counts),
    )


def chsh(
    cfg_base: RunConfig,
    a: float = CANONICAL_CHSH[0],
    a_prime: float = CANONICAL_CHSH[1],
    b: float = CANONICAL_CHSH[2],
    b_prime: float = CANONICAL_CHSH[3],
    partitions: int = 1,
) -> ChshResult:
    """S = |E(a,b) - E(a,b') + E(a',b) + E(a',b')| from four independent runs."""
    counts = [
        run_bell(replace(cfg_base, alpha=x, beta=y), partitions)
        for x, y in chsh_settings(a, a_prime, b, b_prime)
    ]
    return chsh_from_counts((a, a_prime, b, b_prime), counts)


def analytic_chsh(state: BellState, a, a_prime, b, b_prime) -> float:
    return chsh_from_correlations(
        *(analytic_correlation(state, x, y) for x, y in chsh_settings(a, a_prime, b, b_prime))
    )


# -- single-beam chain ---------------------------------------------------------

@dataclass(frozen=True)
class MalusCounts:
    n_intervals: int
    n_subset: int  # detected after the first analyzer
    n_both: int  # ... and again after the second

    @property
    def subset_fraction(self) -> float:
        return self.n_subset / self.n_intervals

    @property
    def fraction(self) -> float:
        if self.n_subset == 0:
            raise StatisticsError("no interval passed the first analyzer")
        return self.n_both / self.n_subset

    @property
    def stderr(self) -> float:
        p = self.fraction
        return math.sqrt(p * (1 - p) / self.n_subset)


def _malus_partition(cfg: RunConfig, alpha: float, beta: float, group) -> MalusCounts:
    first = DetectorState(cfg.discipline)
    second = DetectorState(cfg.discipline)
    n = n_subset = n_both = 0
    for blk in group:
        rng = streams.block_rng(cfg.seed, blk.index, TAG_MALUS)
        angles = _source_angles(rng, cfg.semantics, alpha, blk.size)
        hv = generate_batch(rng, cfg.generator, blk.size, angles)
        passed, _ = project(hv, alpha)
        subset = detect_many(first, modulus_integral(passed), rng) > 0
        again, _ = project(passed, beta)
        hit = detect_many(second, modulus_integral(again), rng) > 0
        n += blk.size
        n_subset += int(np.count_nonzero(subset))
        n_both += int(np.count_nonzero(subset & hit))
    return MalusCounts(n, n_subset, n_both)


def malus_counts(cfg: RunConfig, alpha: float | None = None, beta: float | None = None,
                 partitions: int = 1) -> MalusCounts:
    """Two analyzers in series on one beam; the second sees the first's transmitted field."""
    alpha = cfg.alpha if alpha is None else alpha
    beta = cfg.beta if beta is None else beta
    parts = streams.map_partitions(lambda g: _malus_partition(cfg, alpha, beta, g), cfg.n_intervals, partitions)
    return MalusCounts(
        sum(p.n_intervals for p in parts),
        sum(p.n_subset for p in parts),
        sum(p.n_both for p in parts),
    )


def run_malus(cfg: RunConfig, alpha: float | None = None, beta: float | None = None,
              partitions: int = 1) -> float:
    return malus_counts(cfg, alpha, beta, partitions).fraction


# -- sweeps ------------------------------------------------------------------

@dataclass(frozen=True)
class SweepRow:
    delta: float
    alpha: float
    beta: float
    counts: CoincidenceCounts
    fraction: float
    analytic: float
    stderr: float


def sweep_coincidence(cfg: RunConfig, delta_grid: Sequence[float], partitions: int = 1) -> list[SweepRow]:
    """One run per grid point with beta = alpha - delta."""
    if len(delta_grid) == 0:
        raise ConfigError("delta grid is empty")
    rows = []
    for delta in delta_grid:
        run_cfg = replace(cfg, beta=cfg.alpha - delta)
        counts = run_bell(run_cfg, partitions)
        rows.append(SweepRow(
            delta=float(delta),
            alpha=run_cfg.alpha,
            beta=run_cfg.beta,
            counts=counts,
            fraction=counts.fraction("pp"),
            analytic=coincidence_law(cfg.state, run_cfg.alpha, run_cfg.beta) / 2,
            stderr=counts.stderr("pp"),
        ))
    return rows
