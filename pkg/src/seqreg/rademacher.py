"""Offset Rademacher complexity estimators on labeled trees.

The per-path payoff for a function f and sign sequence eps is

    sum_t [ 4 B eps_t (f(x_t(eps)) - mu_t(eps)) - (f(x_t(eps)) - mu_t(eps))^2 ]

and the complexity is the expectation over uniform signs of the per-path
maximum over the class. Exact mode enumerates all 2^n paths level by level;
Monte-Carlo mode samples sign sequences and reports a standard error.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product

import numpy as np

from .function_class import FunctionClass
from .trees import LabeledTree, ResourceLimitError

_EXACT_MAX_DEPTH = 20
_EXACT_MAX_CELLS = 40_000_000


@dataclass(frozen=True)
class OffsetRademacherEstimate:
    value: float
    stderr: float
    mode: str  # "exact" or "monte_carlo"
    samples: int


def _check_trees(function_class, x_tree, mu_tree):
    if len(function_class) == 0:
        raise ValueError("need a nonempty class")
    if mu_tree.depth != x_tree.depth:
        raise ValueError("covariate and offset trees must share a depth")
    labels = x_tree.labels.astype(int)
    if labels.min() < 0 or labels.max() >= function_class.domain_size:
        raise ValueError("covariate tree labels outside the class domain")


def offset_rademacher_exact(
    function_class: FunctionClass,
    x_tree: LabeledTree,
    mu_tree: LabeledTree,
    B: float,
    subtract_quadratic: bool = True,
) -> OffsetRademacherEstimate:
    """Exact expectation over all 2^n sign sequences.

    Partial path sums are carried level by level as a (paths, |F|) array, so
    the enumeration is linear in the output size.
    """
    _check_trees(function_class, x_tree, mu_tree)
    n = x_tree.depth
    k = len(function_class)
    if n > _EXACT_MAX_DEPTH or (1 << n) * k > _EXACT_MAX_CELLS:
        raise ResourceLimitError("exact enumeration limited to depth 20", n)
    V = function_class.values
    S = np.zeros((1, k))
    for t in range(1, n + 1):
        x_level = x_tree.level_slice(t).astype(int)
        mu_level = np.asarray(mu_tree.level_slice(t), dtype=float)
        D = V[:, x_level].T - mu_level[:, None]  # (2^{t-1}, k)
        quad = D * D if subtract_quadratic else 0.0
        S_new = np.empty((S.shape[0] * 2, k))
        S_new[0::2] = S + (-4.0 * B * D - quad)
        S_new[1::2] = S + (4.0 * B * D - quad)
        S = S_new
    per_path = S.max(axis=1)
    return OffsetRademacherEstimate(float(per_path.mean()), 0.0, "exact", 1 << n)


def offset_rademacher(
    function_class: FunctionClass,
    x_tree: LabeledTree,
    mu_tree: LabeledTree,
    B: float,
    samples: int,
    rng_seed: int = 0,
    subtract_quadratic: bool = True,
) -> OffsetRademacherEstimate:
    """Monte-Carlo estimate over uniform sign sequences, with standard error."""
    _check_trees(function_class, x_tree, mu_tree)
    if samples < 1:
        raise ValueError("need at least one sample")
    n = x_tree.depth
    k = len(function_class)
    rng = np.random.default_rng(rng_seed)
    bits = rng.integers(0, 2, size=(samples, n))
    eps = 2 * bits - 1
    V = function_class.values
    totals = np.zeros((samples, k))
    prefix = np.zeros(samples, dtype=int)
    for t in range(1, n + 1):
        x_level = x_tree.level_slice(t).astype(int)
        mu_level = np.asarray(mu_tree.level_slice(t), dtype=float)
        D = V[:, x_level[prefix]].T - mu_level[prefix][:, None]  # (samples, k)
        totals += 4.0 * B * eps[:, t - 1][:, None] * D
        if subtract_quadratic:
            totals -= D * D
        prefix = (prefix << 1) | bits[:, t - 1]
    per_sample = totals.max(axis=1)
    value = float(per_sample.mean())
    stderr = float(per_sample.std(ddof=1) / np.sqrt(samples)) if samples > 1 else float("inf")
    return OffsetRademacherEstimate(value, stderr, "monte_carlo", samples)


def offset_rademacher_sup(
    function_class: FunctionClass,
    domain_size: int,
    depth: int,
    B: float,
    mu_grid,
    max_combinations: int = 250_000,
):
    """Maximize the exact complexity over covariate and offset labelings.

    Searches all domain labelings of the covariate tree jointly with all
    mu-tree labelings drawn from `mu_grid`. Doubly exponential in depth, so
    the joint labeling count is capped.
    """
    if depth > 4:
        raise ResourceLimitError("labeling search limited to depth 4", depth)
    if domain_size < 1 or domain_size > function_class.domain_size:
        raise ValueError("domain_size must address the class domain")
    mu_grid = [float(v) for v in mu_grid]
    if not mu_grid:
        raise ValueError("mu_grid must be nonempty")
    nodes = (1 << depth) - 1
    combos = (domain_size * len(mu_grid)) ** nodes
    if combos > max_combinations:
        raise ResourceLimitError(
            f"{combos} labelings exceed the limit of {max_combinations}", depth
        )
    best = (-np.inf, None, None)
    for x_labels in product(range(domain_size), repeat=nodes):
        x_tree = LabeledTree(depth, np.array(x_labels))
        for mu_labels in product(mu_grid, repeat=nodes):
            mu_tree = LabeledTree(depth, np.array(mu_labels))
            est = offset_rademacher_exact(function_class, x_tree, mu_tree, B)
            if est.value > best[0]:
                best = (est.value, x_tree, mu_tree)
    return best
