"""The online square-loss regression game and its regret accounting.

A game runs for n rounds: the environment reveals a covariate, the
forecaster commits a prediction in [-B, B], the environment answers with a
response in [-B, B]. Regret is always an unnormalized sum here; callers
divide by n when comparing against normalized rates.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .function_class import FunctionClass


def format_real(v) -> str:
    """Decimal rendering with 12 significant digits, shared by all CSV output."""
    return format(float(v), ".12g")


@dataclass(frozen=True)
class Round:
    x: int
    y_hat: float
    y: float


@dataclass(frozen=True)
class GameConfig:
    horizon_n: int
    bound_B: float = 1.0
    alpha: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.horizon_n < 0:
            raise ValueError("horizon must be nonnegative")
        if self.bound_B <= 0:
            raise ValueError("bound_B must be positive")
        if not 0.0 <= self.alpha < 1.0:
            raise ValueError("alpha must lie in [0, 1)")


@dataclass(frozen=True)
class Transcript:
    rounds: tuple
    bound_B: float

    @property
    def horizon_n(self) -> int:
        return len(self.rounds)

    def xs(self) -> np.ndarray:
        return np.array([r.x for r in self.rounds], dtype=int)

    def y_hats(self) -> np.ndarray:
        return np.array([r.y_hat for r in self.rounds])

    def ys(self) -> np.ndarray:
        return np.array([r.y for r in self.rounds])

    def forecaster_loss(self) -> float:
        return float(np.sum((self.y_hats() - self.ys()) ** 2))


def run_game(forecaster, environment, config: GameConfig) -> Transcript:
    """Play one episode and return its transcript.

    Each prediction may depend only on the covariates seen so far and on past
    responses; the environment additionally sees the current prediction when
    choosing y_t. Responses outside [-B, B] are rejected: clamping is the
    environment's job, not the protocol's.
    """
    environment.reset(config.seed)
    B = config.bound_B
    tol = 1e-12
    rounds = []
    for _ in range(config.horizon_n):
        x = environment.next_x(rounds)
        y_hat = float(forecaster.predict(x))
        if abs(y_hat) > B + tol:
            raise ValueError(f"forecaster predicted {y_hat} outside [-{B}, {B}]")
        y = float(environment.next_y(rounds, y_hat))
        if abs(y) > B + tol:
            raise ValueError(f"environment emitted response {y} outside [-{B}, {B}]")
        forecaster.observe(x, y)
        rounds.append(Round(int(x), y_hat, y))
    return Transcript(tuple(rounds), B)


def _member_losses(transcript: Transcript, function_class: FunctionClass) -> np.ndarray:
    if len(function_class) == 0:
        raise ValueError("cumulative best loss is undefined for an empty class")
    if transcript.horizon_n == 0:
        return np.zeros(len(function_class))
    xs = transcript.xs()
    if xs.size and (xs.min() < 0 or xs.max() >= function_class.domain_size):
        raise ValueError("transcript covariate outside the class domain")
    preds = function_class.values[:, xs]
    return np.sum((preds - transcript.ys()) ** 2, axis=1)


def cumulative_best_loss(transcript: Transcript, function_class: FunctionClass) -> float:
    """min_f sum_t (f(x_t) - y_t)^2, by exhaustive scan over the class."""
    return float(_member_losses(transcript, function_class).min())


def regret(transcript: Transcript, function_class: FunctionClass) -> float:
    """Forecaster's cumulative square loss minus the best fixed function's."""
    return transcript.forecaster_loss() - cumulative_best_loss(transcript, function_class)


def alpha_regret(transcript: Transcript, function_class: FunctionClass, alpha: float) -> float:
    """Regret with the forecaster's loss discounted by (1 - alpha)."""
    if not 0.0 <= alpha < 1.0:
        raise ValueError("alpha must lie in [0, 1)")
    return (1.0 - alpha) * transcript.forecaster_loss() - cumulative_best_loss(
        transcript, function_class
    )


def optimistic_conversion(U1: float, U2: float, L_star: float) -> float:
    """Turn a discounted-regret bound U1/alpha + U2 into a plain regret bound.

    Returns 4*sqrt(L* U1) + 12 U1 + 4 U2.
    """
    if U1 < 0 or U2 < 0 or L_star < 0:
        raise ValueError("conversion inputs must be nonnegative")
    return 4.0 * np.sqrt(L_star * U1) + 12.0 * U1 + 4.0 * U2


def transcript_to_csv(transcript: Transcript, function_class: FunctionClass) -> str:
    """Per-round CSV with running benchmark column.

    Header: t,x,y_hat,y,loss_forecaster,loss_best_cumulative. loss_forecaster
    is the per-round square loss; loss_best_cumulative tracks
    min_f sum_{j<=t} (f(x_j) - y_j)^2.
    """
    lines = ["t,x,y_hat,y,loss_forecaster,loss_best_cumulative"]
    if transcript.horizon_n == 0:
        return "\n".join(lines) + "\n"
    xs = transcript.xs()
    ys = transcript.ys()
    preds = function_class.values[:, xs]
    cumulative = np.cumsum((preds - ys) ** 2, axis=1).min(axis=0)
    for t, r in enumerate(transcript.rounds, start=1):
        loss = (r.y_hat - r.y) ** 2
        lines.append(
            f"{t},{r.x},{format_real(r.y_hat)},{format_real(r.y)},"
            f"{format_real(loss)},{format_real(cumulative[t - 1])}"
        )
    return "\n".join(lines) + "\n"
