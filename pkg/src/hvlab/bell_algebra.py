"""Bell-vector algebra, beam-splitter calculus and the swapping-identity reporter.

A two-party Bell vector is the tensor product of station A's vector with the
partner of station B's vector, written on the ordered basis
``(xA xB, xA yB, yA xB, yA yB)``. Four-party products use the party-major
basis ``(b1, b2, b3, b4)`` with ``x = 0``, ``y = 1`` and flat index
``8*b1 + 4*b2 + 2*b3 + b4``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from hvlab.errors import StatisticsError
from hvlab.hv_core import (
    THRESHOLD_RTOL,
    BellState,
    GeneratorConfig,
    IntervalHV,
    UniformAngle,
    draw_integrals,
    generate_batch,
    modulus_integral,
)

STATE_ORDER = (BellState.PSI_MINUS, BellState.PSI_PLUS, BellState.PHI_PLUS, BellState.PHI_MINUS)

MIN_GRAM_ENSEMBLE = 10_000


@dataclass(frozen=True)
class BellVector4:
    c_xx: float
    c_xy: float
    c_yx: float
    c_yy: float

    @classmethod
    def from_array(cls, a) -> BellVector4:
        return cls(*(float(x) for x in np.asarray(a).reshape(4)))

    def as_array(self) -> np.ndarray:
        return np.array([self.c_xx, self.c_xy, self.c_yx, self.c_yy])

    def norm_sq(self) -> float:
        return dot(self, self)


def bell_array(state: BellState, fA, gA, fB, gB) -> np.ndarray:
    """Coefficients as an array of shape (..., 4); inputs broadcast."""
    va = np.stack(np.broadcast_arrays(np.asarray(fA, float), np.asarray(gA, float)), axis=-1)
    vb = np.stack(np.broadcast_arrays(np.asarray(fB, float), np.asarray(gB, float)), axis=-1)
    pb = vb @ BellState(state).partner_matrix.T
    return np.einsum("...i,...j->...ij", va, pb).reshape(va.shape[:-1] + (4,))


def bell_vector(state: BellState, fA: float, gA: float, fB: float, gB: float) -> BellVector4:
    return BellVector4.from_array(bell_array(state, fA, gA, fB, gB))


def dot(u: BellVector4, v: BellVector4) -> float:
    return float(np.dot(u.as_array(), v.as_array()))


# -- ensemble ortho-normality --------------------------------------------------

@dataclass(frozen=True)
class GramResult:
    matrix: np.ndarray  # rows/cols in STATE_ORDER
    mean_fg: float
    mean_f2: float
    mean_g2: float
    n: int

    @property
    def max_offdiag(self) -> float:
        return float(np.max(np.abs(self.matrix - np.diag(np.diag(self.matrix)))))

    @property
    def max_diag_error(self) -> float:
        return float(np.max(np.abs(np.diag(self.matrix) - 1.0)))


def draw_pairs(rng: np.random.Generator, n: int, modulus_mode=None) -> np.ndarray:
    """``n`` independent (fA, gA, fB, gB) draws with uniform angles and <V^2> = 1."""
    cfg = GeneratorConfig() if modulus_mode is None else GeneratorConfig(modulus_mode=modulus_mode)
    out = np.empty((n, 4))
    for k in (0, 2):
        angle = rng.uniform(0.0, np.pi, n)
        v = np.sqrt(draw_integrals(rng, cfg.modulus_mode, n))
        out[:, k] = v * np.cos(angle)
        out[:, k + 1] = v * np.sin(angle)
    return out


def gram_average(draws: np.ndarray) -> GramResult:
    """Average the pairwise dot products of the four Bell vectors over ``draws``."""
    draws = np.asarray(draws, dtype=float)
    if draws.ndim != 2 or draws.shape[1] != 4:
        raise ValueError("draws must have shape (n, 4)")
    n = draws.shape[0]
    if n < MIN_GRAM_ENSEMBLE:
        raise StatisticsError(f"ensemble of {n} draws is too small (need >= {MIN_GRAM_ENSEMBLE})")
    vecs = np.stack([bell_array(s, *draws.T) for s in STATE_ORDER], axis=1)  # (n, 4 states, 4)
    gram = np.einsum("nik,njk->ij", vecs, vecs) / n
    f = draws[:, [0, 2]]
    g = draws[:, [1, 3]]
    return GramResult(
        matrix=gram,
        mean_fg=float(np.mean(f * g)),
        mean_f2=float(np.mean(f * f)),
        mean_g2=float(np.mean(g * g)),
        n=n,
    )


# -- beam splitter and HOM -----------------------------------------------------

def beamsplitter(hvA: IntervalHV, hvB: IntervalHV) -> tuple[IntervalHV, IntervalHV]:
    """Balanced beam splitter: C = (A + B)/sqrt2, D = (A - B)/sqrt2 sample-wise."""
    if hvA.samples.shape != hvB.samples.shape or not math.isclose(hvA.dt, hvB.dt, rel_tol=1e-12):
        raise ValueError("beam-splitter inputs need equal sample counts and time steps")
    r = 1 / math.sqrt(2)
    return (
        IntervalHV((hvA.samples + hvB.samples) * r, hvA.dt),
        IntervalHV((hvA.samples - hvB.samples) * r, hvA.dt),
    )


def hom_inputs(state: BellState, f, g, dt: float = 1.0) -> tuple[IntervalHV, IntervalHV]:
    """Input modes built from one (f, g) stream: A = (f, g), B = its Bell partner."""
    a = np.stack(np.broadcast_arrays(np.asarray(f, float), np.asarray(g, float)), axis=-1)
    if a.ndim == 1:
        a = a[None, :]
    b = a @ BellState(state).partner_matrix.T
    return IntervalHV(a, dt), IntervalHV(b, dt)


def hom_outputs(state: BellState, f, g, dt: float = 1.0) -> tuple[float, float]:
    """Integrated output-mode moduli (mC, mD) for one interval's (f, g) samples."""
    c, d = beamsplitter(*hom_inputs(state, f, g, dt))
    return modulus_integral(c), modulus_integral(d)


def hom_closed_form(state: BellState, f, g, dt: float = 1.0) -> tuple[float, float]:
    """The same outputs from the per-state closed forms, without a beam splitter."""
    f = np.atleast_1d(np.asarray(f, float))
    g = np.atleast_1d(np.asarray(g, float))
    m = float(np.sum(f * f + g * g) * dt)
    state = BellState(state)
    if state is BellState.PHI_PLUS:
        return 2 * m, 0.0
    if state is BellState.PSI_MINUS:
        return m, m
    if state is BellState.PHI_MINUS:
        f2 = float(np.sum(f * f) * dt)
        return 2 * f2, 2 * m - 2 * f2
    cross = float(np.sum(f * g) * dt)
    return m + 2 * cross, m - 2 * cross


def apply_routing_rule(mC, mD):
    """Send the smaller output's share along the larger one (ties go to C)."""
    total = mC + mD
    to_c = mC >= mD
    if np.ndim(to_c) == 0:
        return (total, 0.0) if to_c else (0.0, total)
    zero = np.zeros_like(total)
    return np.where(to_c, total, zero), np.where(to_c, zero, total)


ROUTED_STATES = frozenset({BellState.PHI_MINUS, BellState.PSI_PLUS})


def hom_classifier(
    state: BellState,
    rng: np.random.Generator,
    n_intervals: int,
    cfg: GeneratorConfig | None = None,
    routing: bool = True,
    u: float = 1.0,
) -> float:
    """Fraction of intervals with a detection in both C and D.

    Detectors are memoryless threshold counters (``q`` counts when m >= q*u).
    The routing rule is applied to the two states it was introduced for and
    never to psi-minus.
    """
    cfg = cfg or GeneratorConfig(angle_mode=UniformAngle())
    state = BellState(state)
    hv = generate_batch(rng, cfg, n_intervals)
    c, d = beamsplitter(*hom_inputs(state, hv.f, hv.g, hv.dt))
    m_c, m_d = modulus_integral(c), modulus_integral(d)
    if routing and state in ROUTED_STATES:
        m_c, m_d = apply_routing_rule(m_c, m_d)
    q_c = np.floor(m_c / u + THRESHOLD_RTOL)
    q_d = np.floor(m_d / u + THRESHOLD_RTOL)
    return float(np.mean((q_c >= 1) & (q_d >= 1)))


# -- entanglement swapping ------------------------------------------------------

# Axis permutation taking a tensor indexed by parties (1, 4, 2, 3) to
# party-major order (1, 2, 3, 4).
PAIR_14_23_TO_PARTY_MAJOR = (0, 2, 3, 1)

# Coefficients of the swapped-pair terms, in STATE_ORDER.
HV_SWAP_SIGNS = {BellState.PSI_PLUS: -0.5, BellState.PSI_MINUS: 0.5,
                 BellState.PHI_PLUS: -0.5, BellState.PHI_MINUS: -0.5}
QM_SWAP_SIGNS = {BellState.PSI_PLUS: 0.5, BellState.PSI_MINUS: -0.5,
                 BellState.PHI_PLUS: -0.5, BellState.PHI_MINUS: 0.5}


def four_party(pair_12: np.ndarray, pair_34: np.ndarray) -> np.ndarray:
    """Product of a (1,2) and a (3,4) two-party vector as 16 party-major coefficients."""
    return np.einsum("ab,cd->abcd", pair_12.reshape(2, 2), pair_34.reshape(2, 2)).reshape(16)


def four_party_swapped(pair_14: np.ndarray, pair_23: np.ndarray) -> np.ndarray:
    """Product of a (1,4) and a (2,3) two-party vector, reindexed to party-major."""
    t = np.multiply.outer(pair_14.reshape(2, 2), pair_23.reshape(2, 2))  # parties (1, 4, 2, 3)
    return np.transpose(t, PAIR_14_23_TO_PARTY_MAJOR).reshape(16)


def swap_rhs(terms: dict[BellState, tuple[np.ndarray, np.ndarray]], signs: dict[BellState, float]) -> np.ndarray:
    return sum(signs[s] * four_party_swapped(*terms[s]) for s in STATE_ORDER)


@dataclass(frozen=True)
class SwapReport:
    regime: str
    inputs: tuple[float, ...]
    lhs: np.ndarray
    rhs: np.ndarray

    @property
    def diff(self) -> np.ndarray:
        return self.lhs - self.rhs

    @property
    def max_abs_discrepancy(self) -> float:
        return float(np.max(np.abs(self.diff)))

    def rows(self) -> list[dict]:
        out = []
        for k in range(16):
            bits = "".join("xy"[(k >> (3 - p)) & 1] for p in range(4))
            out.append({"regime": self.regime, "index": k, "basis": bits,
                        "lhs": float(self.lhs[k]), "rhs": float(self.rhs[k]), "diff": float(self.diff[k])})
        return out


def swap_identity_check(f1, g1, f2, g2, f3, g3, f4, g4, regime: str = "given") -> SwapReport:
    """Expand both sides of the hidden-variable swapping identity and compare.

    LHS = Psi-_12 Psi-_34; RHS = (1/2){-Psi+_14 Psi+_23 + Psi-_14 Psi-_23
    - Phi+_14 Phi+_23 - Phi-_14 Phi-_23}. Nothing is asserted here.
    """
    lhs = four_party(bell_array(BellState.PSI_MINUS, f1, g1, f2, g2),
                     bell_array(BellState.PSI_MINUS, f3, g3, f4, g4))
    terms = {s: (bell_array(s, f1, g1, f4, g4), bell_array(s, f2, g2, f3, g3)) for s in STATE_ORDER}
    return SwapReport(regime, (f1, g1, f2, g2, f3, g3, f4, g4), lhs, swap_rhs(terms, HV_SWAP_SIGNS))


def psi_minus_constrained(f1, g1, f3, g3) -> tuple[float, ...]:
    """Inputs with pairs (1,2) and (3,4) related as psi-minus partners."""
    return (f1, g1, g1, -f1, f3, g3, g3, -f3)


SWAP_REGIMES = ("unconstrained", "psi-minus-constrained")


def swap_reports(rng: np.random.Generator, n_draws: int = 1) -> list[SwapReport]:
    """One report per regime per draw, angles uniform, unit moduli."""
    reports = []
    for _ in range(n_draws):
        ang = rng.uniform(0.0, np.pi, 4)
        fg = np.column_stack([np.cos(ang), np.sin(ang)]).ravel()
        reports.append(swap_identity_check(*fg, regime="unconstrained"))
        reports.append(swap_identity_check(*psi_minus_constrained(fg[0], fg[1], fg[4], fg[5]),
                                           regime="psi-minus-constrained"))
    return reports


# Computational basis kets for the quantum check: x -> |0>, y -> |1>.
def qm_bell_ket(state: BellState) -> np.ndarray:
    r = 1 / math.sqrt(2)
    return {
        BellState.PSI_MINUS: np.array([0.0, r, -r, 0.0]),
        BellState.PSI_PLUS: np.array([0.0, r, r, 0.0]),
        BellState.PHI_PLUS: np.array([r, 0.0, 0.0, r]),
        BellState.PHI_MINUS: np.array([r, 0.0, 0.0, -r]),
    }[BellState(state)]


def qm_swap_check() -> SwapReport:
    """The textbook four-qubit identity on amplitudes; its discrepancy should be 0."""
    lhs = four_party(qm_bell_ket(BellState.PSI_MINUS), qm_bell_ket(BellState.PSI_MINUS))
    terms = {s: (qm_bell_ket(s), qm_bell_ket(s)) for s in STATE_ORDER}
    return SwapReport("quantum", (), lhs, swap_rhs(terms, QM_SWAP_SIGNS))
