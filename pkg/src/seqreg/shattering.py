"""Sequential shattering: tree certification and fat-shattering dimension."""

from __future__ import annotations

import numpy as np

from .function_class import FunctionClass
from .trees import LabeledTree, ResourceLimitError, sign_vectors

_MARGIN_TOL = 1e-12


def is_beta_shattered(
    x_tree: LabeledTree,
    witness: LabeledTree,
    function_class: FunctionClass,
    beta: float,
    max_depth: int = 12,
) -> bool:
    """Whether the class realizes every +-beta/2 sign pattern around the witness.

    Exhaustive over all 2^d paths; for each path some class member must sit
    at least beta/2 above the witness wherever the sign is +1 and at least
    beta/2 below wherever it is -1.
    """
    if beta <= 0:
        raise ValueError("beta must be positive")
    d = x_tree.depth
    if witness.depth != d:
        raise ValueError("covariate tree and witness tree must share a depth")
    if d > max_depth:
        raise ResourceLimitError(f"shattering check limited to depth {max_depth}", d)
    if len(function_class) == 0:
        return False
    V = function_class.values
    half = beta / 2.0 - _MARGIN_TOL
    for eps in sign_vectors(d):
        xs = x_tree.path(eps).astype(int)
        ss = witness.path(eps).astype(float)
        margins = eps * (V[:, xs] - ss)
        if not bool(np.any(np.all(margins >= half, axis=1))):
            return False
    return True


def default_witness_values(values: np.ndarray, x: int, beta: float) -> list:
    """Candidate witness labels at covariate x: midpoints of value pairs.

    Only the relative position of the witness between function values
    matters, and the midpoint of any pair with gap >= beta realizes every
    maximal two-sided split that pair admits.
    """
    col = np.unique(values[:, x])
    cands = []
    for i in range(len(col)):
        for j in range(i + 1, len(col)):
            if col[j] - col[i] >= beta - _MARGIN_TOL:
                cands.append(0.5 * (col[i] + col[j]))
    return sorted(set(cands))


def fat_shattering_dim(
    function_class: FunctionClass,
    beta: float,
    max_depth: int = 6,
    witness_values=None,
    max_expansions: int = 2_000_000,
) -> int:
    """Largest depth (up to max_depth) of a beta-shattered covariate tree.

    Works by the split recursion: a depth-d tree shattered around some
    witness exists iff some covariate x and witness label s split the class
    into members >= s + beta/2 and members <= s - beta/2 whose halves each
    shatter a depth-(d-1) tree. Subtrees are independent, so the recursion
    over member subsets is exhaustive over all tree labelings. Witness
    labels come from `witness_values` when given, otherwise from the
    per-covariate midpoint grid (exact, see default_witness_values).
    """
    if beta <= 0:
        raise ValueError("beta must be positive")
    if max_depth < 0:
        raise ValueError("max_depth must be nonnegative")
    if len(function_class) == 0:
        return 0
    V = function_class.values
    m = function_class.domain_size
    half = beta / 2.0 - _MARGIN_TOL

    split_cache: dict = {}
    depth_cache: dict = {}
    budget = [max_expansions]

    def splits(members: frozenset):
        if members in split_cache:
            return split_cache[members]
        out = []
        seen = set()
        idx = np.fromiter(members, dtype=int)
        for x in range(m):
            col = V[idx, x]
            cands = (
                default_witness_values(V[np.ix_(idx, [x])], 0, beta)
                if witness_values is None
                else witness_values
            )
            for s in cands:
                plus = frozenset(int(i) for i in idx[col >= s + half])
                minus = frozenset(int(i) for i in idx[col <= s - half])
                if plus and minus and (plus, minus) not in seen:
                    seen.add((plus, minus))
                    out.append((plus, minus))
        split_cache[members] = out
        return out

    def depth(members: frozenset, cap: int) -> int:
        """Largest shatterable depth within `members`, capped at `cap`."""
        if cap == 0 or len(members) < 2:
            return 0
        cached = depth_cache.get(members)
        if cached is not None and (cached[1] >= cap or cached[0] < cached[1]):
            return min(cached[0], cap)
        best = 0
        for plus, minus in splits(members):
            budget[0] -= 1
            if budget[0] <= 0:
                raise ResourceLimitError(
                    "fat-shattering search budget exhausted", depth_reached=best
                )
            if best >= cap:
                break
            d = 1 + min(depth(plus, cap - 1), depth(minus, cap - 1))
            best = max(best, d)
        depth_cache[members] = (best, cap)
        return best

    return depth(frozenset(range(len(V))), max_depth)
