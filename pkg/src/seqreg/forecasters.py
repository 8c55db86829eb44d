"""Relaxation-based forecasters: finite experts and Vovk-Azoury-Warmuth.

Both forecasters are instances of one recipe: keep a scalar relaxation
value over the observed data, and predict the clipped scaled difference of
the relaxation evaluated at the two extreme responses +B and -B. The
recursive admissibility inequality makes the per-round values telescope
into a regret bound; `admissibility_check` verifies it numerically.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .function_class import FunctionClass


class NumericalError(RuntimeError):
    """A linear solve became untrustworthy (ill-conditioned system)."""


def clip(v: float, B: float) -> float:
    """Project v onto [-B, B]."""
    if B <= 0:
        raise ValueError("clip bound must be positive")
    return float(min(B, max(-B, v)))


@dataclass(frozen=True)
class RelaxationValue:
    value: float
    conditioned_rounds: int

    def __post_init__(self):
        if not np.isfinite(self.value):
            raise ValueError("relaxation value must be finite")


class Forecaster:
    """Online forecaster contract: predict reads state, observe mutates it."""

    def predict(self, x) -> float:
        raise NotImplementedError

    def observe(self, x, y) -> None:
        raise NotImplementedError


class FiniteClassForecaster(Forecaster):
    """Soft-min aggregation over a finite comparator class.

    State is the vector of cumulative square losses L_t(f). The prediction
    is Clip((s B/4) log of the ratio of the two aggregates obtained by
    extending the history with y_t = +B and y_t = -B), with aggregate
    weights exp(-L/(s B^2)).

    mixability_scale s tunes the aggregate: s = 1 is the classic weighting
    with the B^2 log|F| regret target, which adversarial responses spanning
    the full [-B, B] range can breach; s = 2 is the largest tuning whose
    relaxation is admissible for all such responses, at the price of the
    weaker guarantee 2 B^2 log|F|.
    """

    def __init__(
        self,
        function_class: FunctionClass,
        bound_B: float = 1.0,
        mixability_scale: float = 1.0,
    ):
        if len(function_class) == 0:
            raise ValueError("need at least one expert")
        if bound_B <= 0 or mixability_scale <= 0:
            raise ValueError("bound_B and mixability_scale must be positive")
        self.function_class = function_class
        self.bound_B = float(bound_B)
        self.mixability_scale = float(mixability_scale)
        self._losses = np.zeros(len(function_class))
        self._observed = 0

    @property
    def cumulative_losses(self) -> np.ndarray:
        return self._losses.copy()

    def relaxation_value(self) -> RelaxationValue:
        """s B^2 log sum_f exp(-L_t(f)/(s B^2)), via max-shifted log-sum-exp."""
        sB2 = self.mixability_scale * self.bound_B**2
        value = sB2 * float(logsumexp(-self._losses / sB2))
        return RelaxationValue(value, self._observed)

    def predict(self, x) -> float:
        B = self.bound_B
        sB2 = self.mixability_scale * B * B
        col = self.function_class.column(int(x))
        up = logsumexp(-(self._losses + (col - B) ** 2) / sB2)
        dn = logsumexp(-(self._losses + (col + B) ** 2) / sB2)
        return clip(sB2 / (4.0 * B) * float(up - dn), B)

    def observe(self, x, y) -> None:
        col = self.function_class.column(int(x))
        self._losses = self._losses + (col - float(y)) ** 2
        self._observed += 1


class VAWForecaster(Forecaster):
    """Clipped Vovk-Azoury-Warmuth ridge forecaster in R^d.

    The round-t solve uses the gram matrix including the current x_t x_t^T
    while the moment vector still lags one round; that asymmetry is the
    forecaster's signature. predict is read-only, so it forms
    gram + x x^T on the fly and observe commits both updates afterwards.

    Covariates may be d-vectors, or integer ids resolved through
    `covariate_map` (an (m, d) lookup table) so the forecaster can play the
    finite-domain game protocol.
    """

    def __init__(
        self,
        dim: int,
        lam: float = 1.0,
        bound_B: float = 1.0,
        covariate_map=None,
        use_sherman_morrison: bool = False,
        cond_limit: float = 1e12,
    ):
        if lam <= 0:
            raise ValueError("ridge parameter must be positive")
        if bound_B <= 0:
            raise ValueError("bound_B must be positive")
        self.dim = int(dim)
        self.lam = float(lam)
        self.bound_B = float(bound_B)
        self.cond_limit = float(cond_limit)
        self.use_sherman_morrison = bool(use_sherman_morrison)
        self._gram = self.lam * np.eye(self.dim)
        self._inv = np.eye(self.dim) / self.lam
        self._moment = np.zeros(self.dim)
        if covariate_map is not None:
            covariate_map = np.asarray(covariate_map, dtype=float)
            if covariate_map.ndim != 2 or covariate_map.shape[1] != self.dim:
                raise ValueError("covariate_map must have shape (m, dim)")
        self._covariate_map = covariate_map

    @property
    def gram(self) -> np.ndarray:
        """lambda I + sum of x x^T over observed rounds."""
        return self._gram.copy()

    @property
    def moment(self) -> np.ndarray:
        return self._moment.copy()

    def _vector(self, x) -> np.ndarray:
        if np.isscalar(x) and self._covariate_map is not None:
            return self._covariate_map[int(x)]
        v = np.asarray(x, dtype=float)
        if v.shape != (self.dim,):
            raise ValueError(f"covariate must be a vector of dimension {self.dim}")
        return v

    def predict(self, x) -> float:
        v = self._vector(x)
        G = self._gram + np.outer(v, v)
        if np.linalg.cond(G) > self.cond_limit:
            raise NumericalError("gram matrix condition number exceeds the guard")
        if self.use_sherman_morrison:
            iv = self._inv @ v
            inv_with_x = self._inv - np.outer(iv, iv) / (1.0 + v @ iv)
            raw = float(v @ (inv_with_x @ self._moment))
        else:
            raw = float(v @ np.linalg.solve(G, self._moment))
        return clip(raw, self.bound_B)

    def observe(self, x, y) -> None:
        v = self._vector(x)
        y = float(y)
        if abs(y) > self.bound_B + 1e-12:
            raise ValueError("response outside [-B, B]")
        iv = self._inv @ v
        self._inv = self._inv - np.outer(iv, iv) / (1.0 + v @ iv)
        self._gram = self._gram + np.outer(v, v)
        self._moment = self._moment + y * v


def vaw_regret_bound(n: int, d: int, lam: float, B: float, f_norm_sq: float = 0.0) -> float:
    """Unnormalized ridge-regret bound (lam/2)||f||^2 + 4 d B^2 log(n/(lam d)).

    The logarithm is floored at zero for horizons n <= lam*d.
    """
    if n < 0 or d < 1 or lam <= 0 or B <= 0 or f_norm_sq < 0:
        raise ValueError("invalid bound parameters")
    log_term = 0.0 if n <= 0 else max(0.0, np.log(n / (lam * d)))
    return 0.5 * lam * f_norm_sq + 4.0 * d * B * B * log_term


class FiniteClassRelaxation:
    """Soft-min relaxation over a finite class, evaluated from raw history.

    Value s B^2 log sum_f exp(-L_t(f)/(s B^2)); see FiniteClassForecaster
    for the role of the mixability scale s.
    """

    convex_in_y = True

    def __init__(
        self, function_class: FunctionClass, bound_B: float, mixability_scale: float = 1.0
    ):
        if len(function_class) == 0:
            raise ValueError("need at least one expert")
        if mixability_scale <= 0:
            raise ValueError("mixability_scale must be positive")
        self.function_class = function_class
        self.bound_B = float(bound_B)
        self.mixability_scale = float(mixability_scale)

    def value(self, xs, ys) -> float:
        sB2 = self.mixability_scale * self.bound_B**2
        if len(xs) != len(ys):
            raise ValueError("history covariates and responses differ in length")
        if len(xs) == 0:
            losses = np.zeros(len(self.function_class))
        else:
            preds = self.function_class.values[:, np.asarray(xs, dtype=int)]
            losses = np.sum((preds - np.asarray(ys, dtype=float)) ** 2, axis=1)
        return sB2 * float(logsumexp(-losses / sB2))


class VAWRelaxation:
    """Ridge relaxation behind the Vovk-Azoury-Warmuth forecaster.

    Value at history (x_{1:t}, y_{1:t}) with G_t = sum x x^T + lam I and
    m_t = sum y x:

        m_t^T G_t^{-1} m_t - sum y^2 + 4 B^2 [d log(n/d) - log(lam det G_t)]

    The determinant factor lam det(G_t) is the determinant of the augmented
    system in which a zero coordinate is prepended to every covariate; only
    its successive ratios matter for admissibility.
    """

    convex_in_y = True

    def __init__(self, dim: int, lam: float, bound_B: float, horizon_n: int):
        if lam <= 0 or bound_B <= 0 or dim < 1 or horizon_n < 1:
            raise ValueError("invalid relaxation parameters")
        self.dim = int(dim)
        self.lam = float(lam)
        self.bound_B = float(bound_B)
        self.horizon_n = int(horizon_n)

    def value(self, xs, ys) -> float:
        d, lam, B, n = self.dim, self.lam, self.bound_B, self.horizon_n
        G = lam * np.eye(d)
        m = np.zeros(d)
        sq = 0.0
        for v, y in zip(xs, ys):
            v = np.asarray(v, dtype=float)
            G = G + np.outer(v, v)
            m = m + float(y) * v
            sq += float(y) ** 2
        sign, logdet = np.linalg.slogdet(G)
        if sign <= 0:
            raise NumericalError("gram determinant lost positivity")
        quad = float(m @ np.linalg.solve(G, m))
        const = 4.0 * B * B * (d * np.log(n / d) - (np.log(lam) + logdet))
        return quad - sq + const


def relaxation_predict(rel, x_t, xs, ys, B: float) -> float:
    """Generic relaxation forecast Clip((Rel(.., +B) - Rel(.., -B)) / 4B).

    Valid whenever the relaxation is convex in the final response, which
    both concrete relaxations declare.
    """
    hi = rel.value(list(xs) + [x_t], list(ys) + [B])
    lo = rel.value(list(xs) + [x_t], list(ys) + [-B])
    if not (np.isfinite(hi) and np.isfinite(lo)):
        raise NumericalError("relaxation evaluation is non-finite")
    return clip((hi - lo) / (4.0 * B), B)


@dataclass(frozen=True)
class AdmissibilityResult:
    passed: bool
    worst_slack: float
    worst_x: object


def admissibility_check(rel, xs, ys, x_grid, y_grid, B: float, tol: float = 1e-9):
    """Check the recursive relaxation inequality one step past a history.

    For each candidate covariate x the check compares

        inf_yhat sup_y [(yhat - y)^2 + Rel(x_{1:t}, y_{1:t})]

    against Rel(x_{1:t-1}, y_{1:t-1}). The prediction candidates are the
    y_grid plus the analytic equalizer Clip((Rel(+B) - Rel(-B))/4B); when the
    relaxation declares convexity in y the supremum is evaluated only at
    +-B, otherwise over the full y_grid. Slack is the right side minus the
    left; the check passes when the worst slack stays above -tol.
    """
    x_grid = list(x_grid)
    y_grid = [float(y) for y in y_grid]
    if not x_grid or not y_grid:
        raise ValueError("admissibility grids must be nonempty")
    if min(y_grid) > -B + 1e-9 or max(y_grid) < B - 1e-9:
        raise ValueError("y_grid must span [-B, B] including the endpoints")
    base = rel.value(xs, ys)
    worst_slack, worst_x = np.inf, None
    convex = bool(getattr(rel, "convex_in_y", False))
    for x in x_grid:
        y_cands = [B, -B] if convex else y_grid
        rel_at = [rel.value(list(xs) + [x], list(ys) + [y]) for y in y_cands]
        hats = list(y_grid)
        if convex:
            hats.append(clip((rel_at[0] - rel_at[1]) / (4.0 * B), B))
        best = np.inf
        for yh in hats:
            value = max((yh - y) ** 2 + rv for y, rv in zip(y_cands, rel_at))
            best = min(best, value)
        slack = base - best
        if slack < worst_slack:
            worst_slack, worst_x = slack, x
    return AdmissibilityResult(bool(worst_slack >= -tol), float(worst_slack), worst_x)
