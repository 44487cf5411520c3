"""Vector hidden variable: generation, time integral, analyzer projection, detection.

Units are scaled so that the detection threshold is ``u = 1``. An interval's
trajectory is stored as ``samples[..., j, :] = (f_j, g_j)`` on a fixed time
step ``dt``; any leading axes are a batch of independent intervals, which is
how the Monte Carlo drivers push 10**6 intervals through the same code.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Union

import numpy as np

from hvlab.errors import ConfigError

# Relative slack on the threshold comparison. A vector built parallel to the
# analyzer projects to 1 - O(1e-16); without slack it would miss its count.
THRESHOLD_RTOL = 1e-9


class BellState(str, Enum):
    PSI_MINUS = "psi-minus"
    PSI_PLUS = "psi-plus"
    PHI_PLUS = "phi-plus"
    PHI_MINUS = "phi-minus"

    @property
    def partner_matrix(self) -> np.ndarray:
        """Linear map taking station A's (f, g) to station B's (f, g)."""
        return _PARTNER[self]


_PARTNER = {
    BellState.PSI_MINUS: np.array([[0.0, 1.0], [-1.0, 0.0]]),  # (g, -f)
    BellState.PHI_PLUS: np.array([[1.0, 0.0], [0.0, 1.0]]),  # (f, g)
    BellState.PSI_PLUS: np.array([[0.0, 1.0], [1.0, 0.0]]),  # (g, f)
    BellState.PHI_MINUS: np.array([[1.0, 0.0], [0.0, -1.0]]),  # (f, -g)
}


@dataclass(frozen=True, eq=False)
class IntervalHV:
    """One interval's sampled trajectory (or a batch of them along leading axes)."""

    samples: np.ndarray
    dt: float

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=float)
        if s.ndim < 2 or s.shape[-1] != 2:
            raise ValueError(f"samples must have shape (..., n, 2), got {s.shape}")
        if s.shape[-2] < 1:
            raise ValueError("an interval needs at least one sample")
        if not (self.dt > 0 and math.isfinite(self.dt)):
            raise ValueError(f"dt must be positive and finite, got {self.dt}")
        if not np.all(np.isfinite(s)):
            raise ValueError("amplitudes must be finite")
        object.__setattr__(self, "samples", s)

    @property
    def f(self) -> np.ndarray:
        return self.samples[..., 0]

    @property
    def g(self) -> np.ndarray:
        return self.samples[..., 1]

    @property
    def n_samples(self) -> int:
        return self.samples.shape[-2]

    @property
    def duration(self) -> float:
        return self.dt * self.n_samples

    @property
    def batch_shape(self) -> tuple[int, ...]:
        return self.samples.shape[:-2]

    def __len__(self) -> int:
        if not self.batch_shape:
            raise TypeError("a single interval has no length")
        return self.batch_shape[0]

    def __getitem__(self, idx) -> IntervalHV:
        if not self.batch_shape:
            raise TypeError("a single interval cannot be indexed")
        return IntervalHV(self.samples[idx], self.dt)

    def modulus_sq(self) -> np.ndarray:
        return self.f ** 2 + self.g ** 2

    def angle(self) -> np.ndarray:
        """Per-sample direction in [0, pi)."""
        return np.mod(np.arctan2(self.g, self.f), np.pi)


# -- generator configuration -------------------------------------------------

@dataclass(frozen=True)
class FixedAngle:
    v: float = 0.0


@dataclass(frozen=True)
class UniformAngle:
    pass


@dataclass(frozen=True)
class FixedIntegral:
    m: float = 1.0

    def __post_init__(self):
        if not (self.m >= 0 and math.isfinite(self.m)):
            raise ConfigError(f"interval integral must be finite and >= 0, got {self.m}")


@dataclass(frozen=True)
class UniformIntegral:
    """Interval integral drawn uniformly on [lo, hi]; the mean must equal u = 1."""

    lo: float = 0.5
    hi: float = 1.5

    def __post_init__(self):
        if not (0 <= self.lo <= self.hi and math.isfinite(self.hi)):
            raise ConfigError(f"need 0 <= lo <= hi, got lo={self.lo}, hi={self.hi}")
        if abs(self.lo + self.hi - 2.0) > 1e-12:
            raise ConfigError(f"mean integral (lo+hi)/2 must be 1, got {(self.lo + self.hi) / 2}")


@dataclass(frozen=True)
class Constant:
    pass


@dataclass(frozen=True)
class Harmonic:
    cycles_per_interval: int = 1

    def __post_init__(self):
        if self.cycles_per_interval < 1:
            raise ConfigError("cycles_per_interval must be a positive integer")


AngleMode = Union[FixedAngle, UniformAngle]
ModulusMode = Union[FixedIntegral, UniformIntegral]
Waveform = Union[Constant, Harmonic]


@dataclass(frozen=True)
class GeneratorConfig:
    angle_mode: AngleMode = field(default_factory=UniformAngle)
    modulus_mode: ModulusMode = field(default_factory=FixedIntegral)
    samples_per_interval: int = 1
    waveform: Waveform = field(default_factory=Constant)
    duration: float = 1.0

    def __post_init__(self):
        if not isinstance(self.samples_per_interval, (int, np.integer)) or self.samples_per_interval < 1:
            raise ConfigError(f"samples_per_interval must be a positive integer, got {self.samples_per_interval!r}")
        if not (self.duration > 0 and math.isfinite(self.duration)):
            raise ConfigError("interval duration must be positive")

    @property
    def dt(self) -> float:
        return self.duration / self.samples_per_interval


def _profile(cfg: GeneratorConfig) -> np.ndarray:
    """Amplitude envelope over one interval, scaled so that sum(p**2) * dt == 1."""
    n = cfg.samples_per_interval
    if isinstance(cfg.waveform, Harmonic):
        phase = 2 * np.pi * cfg.waveform.cycles_per_interval * (np.arange(n) + 0.5) / n
        p = 1.0 + 0.5 * np.sin(phase)
    else:
        p = np.ones(n)
    return p / math.sqrt(np.sum(p ** 2) * cfg.dt)


def draw_integrals(rng: np.random.Generator, mode: ModulusMode, n: int) -> np.ndarray:
    if isinstance(mode, UniformIntegral):
        return rng.uniform(mode.lo, mode.hi, n)
    return np.full(n, float(mode.m))


def generate_batch(
    rng: np.random.Generator,
    cfg: GeneratorConfig,
    n: int,
    angles: np.ndarray | None = None,
) -> IntervalHV:
    """Draw ``n`` independent intervals.

    ``angles`` overrides the configured angle mode; the Bell drivers use it to
    impose a sampling semantics. Draw order is angle, then integral.
    """
    if angles is None:
        if isinstance(cfg.angle_mode, FixedAngle):
            angles = np.full(n, float(cfg.angle_mode.v))
        else:
            angles = rng.uniform(0.0, np.pi, n)
    else:
        angles = np.broadcast_to(np.asarray(angles, dtype=float), (n,))
    m = draw_integrals(rng, cfg.modulus_mode, n)
    amp = np.sqrt(m)[:, None] * _profile(cfg)[None, :]
    samples = np.stack([amp * np.cos(angles)[:, None], amp * np.sin(angles)[:, None]], axis=-1)
    return IntervalHV(samples, cfg.dt)


def generate_interval(rng: np.random.Generator, cfg: GeneratorConfig) -> IntervalHV:
    return generate_batch(rng, cfg, 1)[0]


# -- operations --------------------------------------------------------------

def modulus_integral(hv: IntervalHV) -> np.ndarray | float:
    """Time integral of |V|^2 over the interval (per interval for a batch)."""
    m = np.sum(hv.modulus_sq(), axis=-1) * hv.dt
    return float(m) if np.ndim(m) == 0 else m


def project(hv: IntervalHV, alpha: float) -> tuple[IntervalHV, IntervalHV]:
    """Split ``hv`` into components parallel and orthogonal to the analyzer axis."""
    c, s = math.cos(alpha), math.sin(alpha)
    p = hv.f * c + hv.g * s
    o = -hv.f * s + hv.g * c
    par = np.stack([p * c, p * s], axis=-1)
    orth = np.stack([-o * s, o * c], axis=-1)
    return IntervalHV(par, hv.dt), IntervalHV(orth, hv.dt)


def partner_hv(hv: IntervalHV, state: BellState) -> IntervalHV:
    """Station-B trajectory paired with station A's ``hv`` under ``state``."""
    return IntervalHV(hv.samples @ BellState(state).partner_matrix.T, hv.dt)


# -- detection ---------------------------------------------------------------

class Discipline(str, Enum):
    ACCUMULATOR = "accumulator"
    BERNOULLI = "bernoulli"


@dataclass
class DetectorState:
    """Threshold detector. ``residual`` is the carried integral (accumulator only)."""

    discipline: Discipline = Discipline.ACCUMULATOR
    residual: float = 0.0
    u: float = 1.0

    def __post_init__(self):
        self.discipline = Discipline(self.discipline)
        if not self.u > 0:
            raise ConfigError("threshold u must be positive")
        if not 0 <= self.residual < self.u:
            raise ConfigError("residual must lie in [0, u)")


def detect(det: DetectorState, m: float, rng: np.random.Generator | None = None) -> int:
    """Feed one interval's integral to the detector; return the particle count."""
    if not (m >= 0 and math.isfinite(m)):
        raise ValueError(f"integral must be finite and >= 0, got {m}")
    if det.discipline is Discipline.BERNOULLI:
        if rng is None:
            raise ValueError("Bernoulli detection needs a random stream")
        return int(rng.random() < min(1.0, m / det.u))
    total = det.residual + m
    count = math.floor(total / det.u + THRESHOLD_RTOL)
    det.residual = max(0.0, total - count * det.u)
    return count


_CHUNK = 4096


def detect_many(
    det: DetectorState,
    m: np.ndarray,
    rng: np.random.Generator | None = None,
    uniforms: np.ndarray | None = None,
) -> np.ndarray:
    """Vectorised ``detect`` over a sequence of interval integrals.

    Bernoulli detection consumes one uniform per interval, either drawn from
    ``rng`` or supplied in ``uniforms`` (so two detectors can share draws).
    """
    m = np.asarray(m, dtype=float)
    if np.any(m < 0) or not np.all(np.isfinite(m)):
        raise ValueError("integrals must be finite and >= 0")
    if det.discipline is Discipline.BERNOULLI:
        if uniforms is None:
            if rng is None:
                raise ValueError("Bernoulli detection needs a random stream")
            uniforms = rng.random(m.shape)
        return (uniforms < np.minimum(1.0, m / det.u)).astype(np.int64)

    counts = np.empty(m.shape, dtype=np.int64)
    # Re-base the running sum every chunk so it stays small and exact enough.
    for lo in range(0, m.size, _CHUNK):
        s = det.residual + np.cumsum(m[lo:lo + _CHUNK])
        k = np.floor(s / det.u + THRESHOLD_RTOL)
        counts[lo:lo + _CHUNK] = np.diff(k, prepend=0.0).astype(np.int64)
        det.residual = max(0.0, float(s[-1] - k[-1] * det.u))
    return counts
