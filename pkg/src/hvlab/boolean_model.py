"""Boolean (set-membership) hidden-variable comparator.

Each interval carries one scalar angle ``lam`` drawn uniformly on [0, pi).
An analyzer at ``alpha`` transmits iff ``lam`` lies in the half-open arc
[alpha, alpha + pi/2) taken mod pi, and reflects otherwise.
"""

from __future__ import annotations

import math
from dataclasses import replace

import numpy as np

from hvlab import streams
from hvlab.bell_sim import (
    CANONICAL_CHSH,
    ChshResult,
    CoincidenceCounts,
    RunConfig,
    chsh_from_correlations,
    chsh_from_counts,
    chsh_settings,
    tally,
)
from hvlab.hv_core import BellState

TAG_BOOLEAN = 3

HALF_PI = math.pi / 2


def transmit(alpha, lam):
    """1 if ``lam`` is in the analyzer's transmitting arc, else 0 (array-friendly)."""
    inside = np.mod(np.asarray(lam, dtype=float) - alpha, np.pi) < HALF_PI
    return inside.astype(np.int64) if np.ndim(inside) else int(inside)


def boolean_partner(lam, state: BellState):
    """Station-B token value for station A's ``lam``, reduced to [0, pi)."""
    state = BellState(state)
    lam = np.asarray(lam, dtype=float)
    if state is BellState.PSI_MINUS:
        out = lam - HALF_PI
    elif state is BellState.PSI_PLUS:
        out = lam + HALF_PI
    elif state is BellState.PHI_MINUS:
        out = -lam
    else:
        out = lam
    out = np.mod(out, np.pi)
    out = np.where(out >= np.pi, 0.0, out)  # mod of a tiny negative rounds up to pi
    return float(out) if out.ndim == 0 else out


def fold_angle(delta: float) -> float:
    """Distance between two analyzer settings as directions, in [0, pi/2]."""
    d = math.fmod(delta, math.pi)
    d = d + math.pi if d < 0 else d
    return min(d, math.pi - d)


def boolean_overlap(alpha: float, beta: float) -> float:
    """Length of the intersection of the two transmitting arcs, divided by pi."""
    return (HALF_PI - fold_angle(alpha - beta)) / math.pi


def _partner_arc_start(state: BellState, beta: float) -> float:
    """Start of the station-A arc of ``lam`` values whose partner B transmits."""
    state = BellState(state)
    if state in (BellState.PSI_MINUS, BellState.PSI_PLUS):
        return beta + HALF_PI
    if state is BellState.PHI_MINUS:
        # -lam in [beta, beta + pi/2)  <=>  lam in (-beta - pi/2, -beta]
        return -beta - HALF_PI
    return beta


def analytic_joint(state: BellState, alpha: float, beta: float) -> dict[str, float]:
    """Exact joint fractions from arc intersections."""
    pp = boolean_overlap(alpha, _partner_arc_start(state, beta))
    return {"pp": pp, "pm": 0.5 - pp, "mp": 0.5 - pp, "mm": pp}


def analytic_correlation(state: BellState, alpha: float, beta: float) -> float:
    j = analytic_joint(state, alpha, beta)
    return j["pp"] + j["mm"] - j["pm"] - j["mp"]


def analytic_chsh(state: BellState, a, a_prime, b, b_prime) -> float:
    return chsh_from_correlations(
        *(analytic_correlation(state, x, y) for x, y in chsh_settings(a, a_prime, b, b_prime))
    )


def _boolean_partition(cfg: RunConfig, group) -> CoincidenceCounts:
    total = CoincidenceCounts()
    for blk in group:
        rng = streams.block_rng(cfg.seed, blk.index, TAG_BOOLEAN)
        lam = rng.uniform(0.0, np.pi, blk.size)
        a = transmit(cfg.alpha, lam)
        b = transmit(cfg.beta, boolean_partner(lam, cfg.state))
        total = total + tally(a, 1 - a, b, 1 - b, blk.size)
    return total


def run_boolean_bell(cfg: RunConfig, partitions: int = 1) -> CoincidenceCounts:
    """Boolean-model Bell run; semantics, generator and detector settings are unused."""
    parts = streams.map_partitions(lambda g: _boolean_partition(cfg, g), cfg.n_intervals, partitions)
    return sum(parts, CoincidenceCounts())


def boolean_chsh(
    cfg_base: RunConfig,
    a: float = CANONICAL_CHSH[0],
    a_prime: float = CANONICAL_CHSH[1],
    b: float = CANONICAL_CHSH[2],
    b_prime: float = CANONICAL_CHSH[3],
    partitions: int = 1,
) -> ChshResult:
    counts = [
        run_boolean_bell(replace(cfg_base, alpha=x, beta=y), partitions)
        for x, y in chsh_settings(a, a_prime, b, b_prime)
    ]
    return chsh_from_counts((a, a_prime, b, b_prime), counts)
