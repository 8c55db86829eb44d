"""Closed-form minimax rate formulas by entropy-growth regime.

All rates use constant 1 in front (regime comparisons only); upper and
lower rates are normalized by the horizon, the optimistic bound is an
unnormalized regret. Logarithmic factors suppressed by the lower bounds
are omitted here and noted in the docstrings.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class RateSpec:
    regime: str  # "finite" | "parametric" | "nonparametric"
    horizon_n: int
    bound_B: float = 1.0
    p: float | None = None
    d: int | None = None
    size: int | None = None

    def __post_init__(self):
        if self.horizon_n < 1:
            raise ValueError("horizon must be at least 1")
        if self.regime == "nonparametric":
            if self.p is None or self.p <= 0:
                raise ValueError("nonparametric regime needs an exponent p > 0")
        elif self.regime == "parametric":
            if self.d is None or self.d < 1:
                raise ValueError("parametric regime needs a dimension d >= 1")
        elif self.regime == "finite":
            if self.size is None or self.size < 1:
                raise ValueError("finite regime needs a class size >= 1")
        else:
            raise ValueError(f"unknown regime {self.regime!r}")


def minimax_upper_rate(spec: RateSpec) -> float:
    """Normalized minimax regret rate, constants set to 1.

    Nonparametric: n^(-1/p) for p > 2, log(n) n^(-1/2) at p = 2,
    n^(-2/(2+p)) for p < 2. Parametric: d log(n)/n. Finite: log|F|/n.
    """
    n = spec.horizon_n
    if spec.regime == "nonparametric":
        p = spec.p
        if p > 2:
            return float(n ** (-1.0 / p))
        if p == 2:
            return float(np.log(n) * n**-0.5)
        return float(n ** (-2.0 / (2.0 + p)))
    if spec.regime == "parametric":
        return float(spec.d * np.log(n) / n)
    return float(np.log(spec.size) / n)


def minimax_lower_rate(spec: RateSpec) -> float:
    """Lower-bound rate mirror: n^(-1/p) for p >= 2, n^(-2/(2+p)) for p < 2,
    d log(n)/n parametric. Logarithmic factors omitted. The finite regime
    has no matching lower statement.
    """
    n = spec.horizon_n
    if spec.regime == "nonparametric":
        p = spec.p
        if p >= 2:
            return float(n ** (-1.0 / p))
        return float(n ** (-2.0 / (2.0 + p)))
    if spec.regime == "parametric":
        return float(spec.d * np.log(n) / n)
    raise ValueError("no lower-bound rate for the finite regime")


def optimistic_regret_bound(spec: RateSpec, L_star: float) -> float:
    """Unnormalized optimistic regret, constants set to 1.

    p < 2: sqrt(L* log n) + log n, with an extra log n factor at p = 2;
    p > 2: sqrt(L* r) + r for r = n^(1 - 1/(p-1)) log n;
    parametric: sqrt(L* d log n) + d log n.
    """
    if L_star < 0:
        raise ValueError("L* must be nonnegative")
    n = spec.horizon_n
    logn = float(np.log(n))
    if spec.regime == "nonparametric":
        p = spec.p
        if p > 2:
            r = n ** (1.0 - 1.0 / (p - 1.0)) * logn
        elif p == 2:
            r = logn * logn
        else:
            r = logn
        return float(np.sqrt(L_star * r) + r)
    if spec.regime == "parametric":
        r = spec.d * logn
        return float(np.sqrt(L_star * r) + r)
    r = float(np.log(spec.size))
    return float(np.sqrt(L_star * r) + r)


@dataclass(frozen=True)
class BesovRate:
    exponent: float
    regime: str


def besov_rate_exponent(s: float, d: int, p_besov: float) -> BesovRate:
    """Minimax-rate exponent for a smoothness-s ball in d dimensions.

    The rate is n^(2s/(2s+d)) when s >= d/2, and also below d/2 whenever
    the norm index satisfies p > 1 + d/(2s); otherwise it degrades to
    n^(1 - 1/p). The regime table is evaluated as displayed; membership
    conditions tying s, d and p are the caller's concern.
    """
    if s <= 0 or d < 1 or p_besov <= 0:
        raise ValueError("need s > 0, d >= 1, p > 0")
    if s >= d / 2.0 or p_besov > 1.0 + d / (2.0 * s):
        return BesovRate(2.0 * s / (2.0 * s + d), "smooth")
    return BesovRate(1.0 - 1.0 / p_besov, "convexity-limited")


def sparse_combination_entropy(M: int, s: int, beta: float) -> float:
    """log of the cover bound (e M / s)^s beta^(-s) for s-sparse convex
    combinations of M base predictors."""
    if not 1 <= s <= M:
        raise ValueError("need 1 <= s <= M")
    if beta <= 0:
        raise ValueError("beta must be positive")
    return float(s * np.log(np.e * M / s) + s * np.log(1.0 / beta))
