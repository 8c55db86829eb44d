"""Environments: lower-bound adversaries built from shattered trees and an
i.i.d. sanity generator.

The shattering adversary walks a certified beta-shattered covariate tree
along a random sign path and answers y_t = witness_t + (B/2) eps_t with a
fresh fair sign, which forces every forecaster's expected regret up to the
tree's depth times beta. The block adversary stretches a shallow shattered
tree over a longer horizon by repeating each level k times and steering the
path by per-block sign majorities.
"""

from __future__ import annotations

import numpy as np

from .function_class import FunctionClass
from .shattering import is_beta_shattered
from .trees import LabeledTree


class Environment:
    """Environment contract: sees (x_{1:t}, yhat_{1:t}, y_{1:t-1}) for y_t."""

    def reset(self, seed) -> None:
        raise NotImplementedError

    def next_x(self, history):
        raise NotImplementedError

    def next_y(self, history, y_hat) -> float:
        raise NotImplementedError


def _fresh_sign(rng) -> int:
    return int(rng.integers(0, 2)) * 2 - 1


class ShatteringAdversary(Environment):
    """Random-path adversary on a beta-shattered tree, supporting depth rounds."""

    def __init__(
        self,
        x_tree: LabeledTree,
        witness: LabeledTree,
        beta: float,
        bound_B: float = 4.0,
        function_class: FunctionClass | None = None,
    ):
        if witness.depth != x_tree.depth:
            raise ValueError("covariate tree and witness tree must share a depth")
        if bound_B <= 0:
            raise ValueError("bound_B must be positive")
        if function_class is not None and not is_beta_shattered(
            x_tree, witness, function_class, beta
        ):
            raise ValueError("tree is not beta-shattered by the class")
        max_wit = float(np.max(np.abs(np.asarray(witness.labels, dtype=float))))
        if max_wit + bound_B / 2.0 > bound_B + 1e-12:
            raise ValueError("witness labels put responses outside [-B, B]")
        self.x_tree = x_tree
        self.witness = witness
        self.beta = float(beta)
        self.bound_B = float(bound_B)
        self._rng = np.random.default_rng(0)
        self._signs: list = []

    def reset(self, seed) -> None:
        self._rng = np.random.default_rng(seed)
        self._signs = []

    def _prefix(self, t: int) -> int:
        prefix = 0
        for s in self._signs[: t - 1]:
            prefix = (prefix << 1) | (1 if s > 0 else 0)
        return prefix

    def next_x(self, history):
        t = len(history) + 1
        if t > self.x_tree.depth:
            raise ValueError("round index exceeds the tree depth")
        return int(self.x_tree.node(t, self._prefix(t)))

    def next_y(self, history, y_hat) -> float:
        t = len(history) + 1
        if t > self.x_tree.depth:
            raise ValueError("round index exceeds the tree depth")
        mu = float(self.witness.node(t, self._prefix(t)))
        eps = _fresh_sign(self._rng)
        self._signs.append(eps)
        return mu + (self.bound_B / 2.0) * eps


class BlockAdversary(Environment):
    """Level-repeating adversary: level ceil(t/k) of the base tree, path
    components fixed by the majorities of completed blocks (ties count +1).
    Supports k * depth rounds.
    """

    def __init__(self, base: ShatteringAdversary, block_size_k: int):
        if block_size_k < 1:
            raise ValueError("block size must be at least 1")
        self.base = base
        self.k = int(block_size_k)
        self.effective_horizon = self.k * base.x_tree.depth
        self._rng = np.random.default_rng(0)
        self._block_sum = 0
        self._in_block = 0
        self._majorities: list = []

    def reset(self, seed) -> None:
        self._rng = np.random.default_rng(seed)
        self._block_sum = 0
        self._in_block = 0
        self._majorities = []

    def _level_and_prefix(self, t: int):
        level = (t - 1) // self.k + 1
        prefix = 0
        for s in self._majorities[: level - 1]:
            prefix = (prefix << 1) | (1 if s > 0 else 0)
        return level, prefix

    def next_x(self, history):
        t = len(history) + 1
        if t > self.effective_horizon:
            raise ValueError("round index exceeds the stretched horizon")
        level, prefix = self._level_and_prefix(t)
        return int(self.base.x_tree.node(level, prefix))

    def next_y(self, history, y_hat) -> float:
        t = len(history) + 1
        if t > self.effective_horizon:
            raise ValueError("round index exceeds the stretched horizon")
        level, prefix = self._level_and_prefix(t)
        mu = float(self.base.witness.node(level, prefix))
        eps = _fresh_sign(self._rng)
        self._block_sum += eps
        self._in_block += 1
        if self._in_block == self.k:
            self._majorities.append(1 if self._block_sum >= 0 else -1)
            self._block_sum = 0
            self._in_block = 0
        return mu + (self.base.bound_B / 2.0) * eps


class StochasticEnvironment(Environment):
    """i.i.d. covariates with Gaussian noise around a fixed target function.

    Responses are truncated to [-B, B]; truncations are counted rather than
    hidden.
    """

    def __init__(self, f_star_values, noise_sd: float, bound_B: float):
        self.f_star = np.asarray(f_star_values, dtype=float)
        if self.f_star.ndim != 1 or self.f_star.size < 1:
            raise ValueError("target function must be a nonempty vector")
        if noise_sd < 0 or bound_B <= 0:
            raise ValueError("need noise_sd >= 0 and bound_B > 0")
        self.noise_sd = float(noise_sd)
        self.bound_B = float(bound_B)
        self.truncations = 0
        self._rng = np.random.default_rng(0)
        self._pending_x = None

    def reset(self, seed) -> None:
        self._rng = np.random.default_rng(seed)
        self.truncations = 0
        self._pending_x = None

    def next_x(self, history):
        self._pending_x = int(self._rng.integers(0, self.f_star.size))
        return self._pending_x

    def next_y(self, history, y_hat) -> float:
        if self._pending_x is None:
            raise RuntimeError("next_y called before next_x")
        raw = float(self.f_star[self._pending_x])
        if self.noise_sd > 0:
            raw += self.noise_sd * float(self._rng.standard_normal())
        self._pending_x = None
        if abs(raw) > self.bound_B:
            self.truncations += 1
            return float(np.clip(raw, -self.bound_B, self.bound_B))
        return raw


def lower_bound_value(beta: float, n: int, fat: int, regime: str) -> float:
    """Unnormalized minimax lower bound witnessed by the adversaries.

    regime "p>2": n * beta with the horizon matched to the dimension
    (n = fat). regime "p<=2": (1/4)(2 sqrt(2) beta sqrt(n * fat) - n beta^2),
    valid for fat <= n.
    """
    if beta <= 0 or n < 1 or fat < 0:
        raise ValueError("invalid lower-bound parameters")
    if regime == "p>2":
        return float(n * beta)
    if regime == "p<=2":
        if fat > n:
            raise ValueError("the block construction needs fat <= n")
        return float(0.25 * (2.0 * np.sqrt(2.0) * beta * np.sqrt(n * fat) - n * beta * beta))
    raise ValueError(f"unknown regime {regime!r}")
