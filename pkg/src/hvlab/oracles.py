"""Reference computations that avoid the library's own code paths.

Used by the acceptance runner and the test-suite to check the vectorised
implementations: explicit term tables instead of partner matrices, loops
instead of einsum, quadrature instead of closed-form arc lengths.
"""

from __future__ import annotations

import math
from collections import defaultdict

import numpy as np

# Two-party Bell vectors written term by term: (sign, A factor, B factor, basis).
BELL_TERMS = {
    "psi-minus": [(+1, "fA", "gB", "xx"), (-1, "fA", "fB", "xy"), (+1, "gA", "gB", "yx"), (-1, "gA", "fB", "yy")],
    "psi-plus": [(+1, "fA", "gB", "xx"), (+1, "fA", "fB", "xy"), (+1, "gA", "gB", "yx"), (+1, "gA", "fB", "yy")],
    "phi-plus": [(+1, "fA", "fB", "xx"), (+1, "fA", "gB", "xy"), (+1, "gA", "fB", "yx"), (+1, "gA", "gB", "yy")],
    "phi-minus": [(+1, "fA", "fB", "xx"), (-1, "fA", "gB", "xy"), (+1, "gA", "fB", "yx"), (-1, "gA", "gB", "yy")],
}

BASIS4 = ["".join(b) for b in ((p, q, r, s) for p in "xy" for q in "xy" for r in "xy" for s in "xy")]


def bell_terms(state: str, fA, gA, fB, gB) -> dict[str, float]:
    vals = {"fA": fA, "gA": gA, "fB": fB, "gB": gB}
    return {basis: sign * vals[a] * vals[b] for sign, a, b, basis in BELL_TERMS[state]}


def expand_product(first: dict[str, float], second: dict[str, float], parties: tuple[int, int, int, int]):
    """Multiply two two-party expansions; ``parties`` places (first A, first B, second A, second B)."""
    out = defaultdict(float)
    for b1, c1 in first.items():
        for b2, c2 in second.items():
            slot = [""] * 4
            for party, letter in zip(parties, b1 + b2):
                slot[party - 1] = letter
            out["".join(slot)] += c1 * c2
    return out


def swap_expansion(f1, g1, f2, g2, f3, g3, f4, g4) -> tuple[dict[str, float], dict[str, float]]:
    """Both sides of the hidden-variable swapping identity, coefficient by basis label."""
    lhs = expand_product(bell_terms("psi-minus", f1, g1, f2, g2), bell_terms("psi-minus", f3, g3, f4, g4), (1, 2, 3, 4))
    rhs = defaultdict(float)
    for state, w in (("psi-plus", -0.5), ("psi-minus", 0.5), ("phi-plus", -0.5), ("phi-minus", -0.5)):
        term = expand_product(bell_terms(state, f1, g1, f4, g4), bell_terms(state, f2, g2, f3, g3), (1, 4, 2, 3))
        for k, v in term.items():
            rhs[k] += w * v
    return dict(lhs), dict(rhs)


def qm_swap_amplitudes() -> tuple[dict[str, float], dict[str, float]]:
    """Four-qubit amplitudes of both sides of the textbook swapping identity."""
    r = 1 / math.sqrt(2)
    kets = {
        "psi-minus": {"xy": r, "yx": -r},
        "psi-plus": {"xy": r, "yx": r},
        "phi-plus": {"xx": r, "yy": r},
        "phi-minus": {"xx": r, "yy": -r},
    }
    lhs = expand_product(kets["psi-minus"], kets["psi-minus"], (1, 2, 3, 4))
    rhs = defaultdict(float)
    for state, w in (("psi-plus", 0.5), ("psi-minus", -0.5), ("phi-plus", -0.5), ("phi-minus", 0.5)):
        for k, v in expand_product(kets[state], kets[state], (1, 4, 2, 3)).items():
            rhs[k] += w * v
    return dict(lhs), dict(rhs)


def arc_overlap_quadrature(alpha: float, beta: float, n: int = 200_000) -> float:
    """Midpoint-rule measure (over pi) of lam in both transmitting arcs."""
    lam = (np.arange(n) + 0.5) * (math.pi / n)

    def inside(a):
        return ((lam - a) % math.pi) < math.pi / 2

    return float(np.mean(inside(alpha) & inside(beta)))


def integral_loop(samples, dt: float) -> float:
    total = 0.0
    for f, g in samples:
        total += (f * f + g * g) * dt
    return total


def accumulator_loop(ms, u: float = 1.0) -> list[int]:
    """Integrate-and-fire on exact rationals (inputs should be exactly representable)."""
    from fractions import Fraction

    residual = Fraction(0)
    uu = Fraction(u)
    out = []
    for m in ms:
        residual += Fraction(m)
        q = residual // uu
        residual -= q * uu
        out.append(int(q))
    return out
