"""Sequential covering numbers on explicit trees, exact at desk scale.

A beta-cover assigns every (function, path) pair to some real-valued tree
that stays within beta of the function along that path, so the smallest
cover is a minimum partition of the pairs into groups that a single tree
can serve:

* l_inf: a group is servable iff at every node the values crossing it span
  at most 2*beta (the midrange label then works). That is a pairwise
  condition, so the minimum cover equals the chromatic number of the
  pairwise conflict graph, computed exactly by backtracking.
* l_2: servability couples the nodes along each path, so candidate groups
  are screened by cheap necessary/sufficient tests and settled by a convex
  feasibility solve. The partition search starts from the l_inf solution
  (always l_2-servable), so the reported l_2 size never exceeds the l_inf
  size, and stops early when a clique/coloring lower bound meets it.

Instances past the configured budgets fall back to a greedy construction
tagged `upper_bound_only`.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np
from scipy.optimize import minimize

from .function_class import FunctionClass
from .shattering import fat_shattering_dim
from .trees import LabeledTree, ResourceLimitError, node_index

_REL_TOL = 1e-9
_ABS_TOL = 1e-12


@dataclass(frozen=True)
class CoverResult:
    size: int
    mode: str  # "exact" or "upper_bound_only"


class _Budget:
    def __init__(self, limit):
        self.left = limit

    def spend(self):
        self.left -= 1
        if self.left < 0:
            raise ResourceLimitError("cover search budget exhausted")


def _path_node_ids(depth: int, path: int) -> np.ndarray:
    """Flat node indices visited by node-path `path` (depth-1 prefix bits)."""
    return np.array(
        [node_index(t, path >> (depth - t)) for t in range(1, depth + 1)], dtype=int
    )


def _shared_levels(depth: int, p: int, q: int) -> int:
    """Number of tree levels two node-paths have in common (at least 1)."""
    shared = depth
    while shared > 1 and (p >> (depth - shared)) != (q >> (depth - shared)):
        shared -= 1
    return shared


class _CoverInstance:
    """Precomputed geometry shared by both norms.

    Elements are (function, node-path) pairs; a node-path is the sign prefix
    of length depth-1 that fixes every node the game visits.
    """

    def __init__(self, function_class: FunctionClass, x_tree: LabeledTree, beta: float):
        if beta < 0:
            raise ValueError("beta must be nonnegative")
        self.beta = float(beta)
        self.depth = x_tree.depth
        n = self.depth
        x_labels = x_tree.labels.astype(int)
        if len(function_class) and (
            x_labels.min() < 0 or x_labels.max() >= function_class.domain_size
        ):
            raise ValueError("covariate tree labels outside the class domain")
        self.num_paths = 1 << (n - 1)
        self.path_nodes = [_path_node_ids(n, p) for p in range(self.num_paths)]
        self.elements = [
            (f, p) for f in range(len(function_class)) for p in range(self.num_paths)
        ]
        V = function_class.values
        self.values = [V[f, x_labels[self.path_nodes[p]]] for f, p in self.elements]
        self.shared = np.array(
            [
                [_shared_levels(n, p, q) for q in range(self.num_paths)]
                for p in range(self.num_paths)
            ],
            dtype=int,
        )

    def linf_conflict(self, i: int, j: int) -> bool:
        f, p = self.elements[i]
        g, q = self.elements[j]
        if f == g:
            return False
        s = self.shared[p, q]
        gap = float(np.abs(self.values[i][:s] - self.values[j][:s]).max())
        return gap > 2.0 * self.beta + _ABS_TOL

    def l2_pair_conflict(self, i: int, j: int) -> bool:
        """Violation of the necessary pairwise test (midpoint tree on shared nodes)."""
        f, p = self.elements[i]
        g, q = self.elements[j]
        if f == g:
            return False
        s = self.shared[p, q]
        d2 = float(np.sum((self.values[i][:s] - self.values[j][:s]) ** 2))
        budget = self.depth * self.beta**2
        return 0.25 * d2 > budget * (1.0 + _REL_TOL) + _ABS_TOL


def _conflict_masks(inst: _CoverInstance, kind: str) -> list:
    n = len(inst.elements)
    test = inst.linf_conflict if kind == "linf" else inst.l2_pair_conflict
    masks = [0] * n
    for i, j in combinations(range(n), 2):
        if test(i, j):
            masks[i] |= 1 << j
            masks[j] |= 1 << i
    return masks


def _greedy_coloring_classes(neighbors) -> list:
    order = sorted(range(len(neighbors)), key=lambda v: -bin(neighbors[v]).count("1"))
    classes = []
    for v in order:
        for c in range(len(classes)):
            if not (neighbors[v] & classes[c]):
                classes[c] |= 1 << v
                break
        else:
            classes.append(1 << v)
    return classes


def _greedy_clique_size(neighbors) -> int:
    n = len(neighbors)
    if n == 0:
        return 0
    best = 1
    seeds = sorted(range(n), key=lambda v: -bin(neighbors[v]).count("1"))[: min(n, 8)]
    for seed in seeds:
        size = 1
        cand = neighbors[seed]
        while cand:
            v = max(
                (u for u in range(n) if (cand >> u) & 1),
                key=lambda u: bin(cand & neighbors[u]).count("1"),
            )
            size += 1
            cand &= neighbors[v]
        best = max(best, size)
    return best


def _k_colorable(neighbors, order, k: int, budget: _Budget):
    """Backtracking k-coloring; returns color classes as bitmasks, or None."""
    classes: list = []

    def place(i):
        budget.spend()
        if i == len(order):
            return True
        v = order[i]
        for c in range(len(classes)):
            if not (neighbors[v] & classes[c]):
                classes[c] |= 1 << v
                if place(i + 1):
                    return True
                classes[c] &= ~(1 << v)
        if len(classes) < k:
            classes.append(1 << v)
            if place(i + 1):
                return True
            classes.pop()
        return False

    return classes if place(0) else None


def _chromatic_partition(neighbors, budget: _Budget) -> list:
    """Exact minimum proper coloring, as vertex bitmasks."""
    if not neighbors:
        return []
    greedy = _greedy_coloring_classes(neighbors)
    order = sorted(range(len(neighbors)), key=lambda v: -bin(neighbors[v]).count("1"))
    for k in range(_greedy_clique_size(neighbors), len(greedy)):
        classes = _k_colorable(neighbors, order, k, budget)
        if classes is not None:
            return classes
    return greedy


class _L2Oracle:
    """Exact servability test for a group of (function, path) elements."""

    def __init__(self, inst: _CoverInstance):
        self.inst = inst
        self.limit = inst.depth * inst.beta**2 * (1.0 + _REL_TOL) + _ABS_TOL
        self.cache: dict = {}

    def __call__(self, group: frozenset) -> bool:
        if len(group) <= 1:
            return True
        hit = self.cache.get(group)
        if hit is None:
            hit = self._decide(sorted(group))
            self.cache[group] = hit
        return hit

    def _spans(self, members) -> dict:
        per_node: dict = {}
        for i in members:
            _, p = self.inst.elements[i]
            vals = self.inst.values[i]
            for lvl, node in enumerate(self.inst.path_nodes[p]):
                node = int(node)
                lo, hi = per_node.get(node, (np.inf, -np.inf))
                per_node[node] = (min(lo, vals[lvl]), max(hi, vals[lvl]))
        return per_node

    def _decide(self, members) -> bool:
        inst = self.inst
        if len({inst.elements[i][0] for i in members}) == 1:
            return True
        spans = self._spans(members)
        if all(hi - lo <= 2.0 * inst.beta + _ABS_TOL for lo, hi in spans.values()):
            return True
        mid = {node: 0.5 * (lo + hi) for node, (lo, hi) in spans.items()}
        if self._tree_serves(members, mid):
            return True
        return self._solve(members, mid)

    def _tree_serves(self, members, labels) -> bool:
        inst = self.inst
        for i in members:
            _, p = inst.elements[i]
            v = np.array([labels[int(node)] for node in inst.path_nodes[p]])
            if float(np.sum((inst.values[i] - v) ** 2)) > self.limit:
                return False
        return True

    def _solve(self, members, warm) -> bool:
        """Epigraph solve of min over labels of the worst path distance."""
        inst = self.inst
        nodes = sorted(warm)
        pos = {node: k for k, node in enumerate(nodes)}
        paths = []
        for i in members:
            _, p = inst.elements[i]
            idx = np.array([pos[int(node)] for node in inst.path_nodes[p]], dtype=int)
            paths.append((idx, inst.values[i]))
        nv = len(nodes)
        grad_s = np.zeros(nv + 1)
        grad_s[nv] = 1.0

        def make_constraint(idx, c):
            def fun(z):
                return z[nv] - float(np.sum((c - z[idx]) ** 2))

            def jac(z):
                g = np.zeros(nv + 1)
                np.add.at(g, idx, 2.0 * (c - z[idx]))
                g[nv] = 1.0
                return g

            return {"type": "ineq", "fun": fun, "jac": jac}

        z0 = np.zeros(nv + 1)
        z0[:nv] = [warm[node] for node in nodes]
        z0[nv] = max(float(np.sum((c - z0[idx]) ** 2)) for idx, c in paths) + 1.0
        res = minimize(
            lambda z: z[nv],
            z0,
            jac=lambda z: grad_s,
            constraints=[make_constraint(idx, c) for idx, c in paths],
            method="SLSQP",
            options={"ftol": 1e-12, "maxiter": 400},
        )
        if not res.success:
            return False
        attained = max(float(np.sum((c - res.x[idx]) ** 2)) for idx, c in paths)
        return attained <= self.limit


def _greedy_feasible_partition(order, pair_masks, feasible) -> list:
    groups: list = []
    masks: list = []
    for e in order:
        for gi in range(len(groups)):
            if not (pair_masks[e] & masks[gi]) and feasible(frozenset(groups[gi] | {e})):
                groups[gi].add(e)
                masks[gi] |= 1 << e
                break
        else:
            groups.append({e})
            masks.append(1 << e)
    return [frozenset(g) for g in groups]


def _min_feasible_partition(order, pair_masks, feasible, incumbent, lower, budget):
    """Exact minimum partition into feasible groups, no worse than `incumbent`."""
    best_size = len(incumbent)
    groups: list = []
    masks: list = []

    def extend(i):
        nonlocal best_size
        budget.spend()
        if len(groups) >= best_size or best_size <= lower:
            return
        if i == len(order):
            best_size = len(groups)
            return
        e = order[i]
        bit = 1 << e
        for gi in range(len(groups)):
            if pair_masks[e] & masks[gi]:
                continue
            if feasible(frozenset(groups[gi] | {e})):
                groups[gi].add(e)
                masks[gi] |= bit
                extend(i + 1)
                groups[gi].remove(e)
                masks[gi] &= ~bit
        if len(groups) + 1 < best_size:
            groups.append({e})
            masks.append(bit)
            extend(i + 1)
            groups.pop()
            masks.pop()

    extend(0)
    return best_size


def _linf_partition(inst: _CoverInstance, budget_limit: int, max_universe: int):
    masks = _conflict_masks(inst, "linf")
    if len(masks) > max_universe:
        return _greedy_coloring_classes(masks), False
    try:
        return _chromatic_partition(masks, _Budget(budget_limit)), True
    except ResourceLimitError:
        return _greedy_coloring_classes(masks), False


def sequential_cover_size(
    function_class: FunctionClass,
    x_tree: LabeledTree,
    beta: float,
    norm: str = "l2",
    budget: int = 4_000_000,
    max_universe: int = 72,
) -> CoverResult:
    """Smallest number of trees covering the class on x_tree at scale beta.

    norm "linf" bounds every node gap by beta; norm "l2" bounds the path
    mean square by beta^2. Exact below the resource limits, otherwise a
    greedy upper bound tagged `upper_bound_only`.
    """
    if norm not in ("l2", "linf"):
        raise ValueError("norm must be 'l2' or 'linf'")
    if x_tree.depth > 12:
        raise ResourceLimitError("cover computation limited to depth 12", x_tree.depth)
    if len(function_class) == 0:
        return CoverResult(0, "exact")
    inst = _CoverInstance(function_class, x_tree, beta)
    linf_classes, linf_exact = _linf_partition(inst, budget, max_universe)
    if norm == "linf":
        return CoverResult(len(linf_classes), "exact" if linf_exact else "upper_bound_only")

    n_elems = len(inst.elements)
    pair_masks = _conflict_masks(inst, "l2")
    oracle = _L2Oracle(inst)
    order = sorted(range(n_elems), key=lambda v: -bin(pair_masks[v]).count("1"))
    incumbent = [
        frozenset(v for v in range(n_elems) if (m >> v) & 1) for m in linf_classes
    ]
    greedy = _greedy_feasible_partition(order, pair_masks, oracle)
    if len(greedy) < len(incumbent):
        incumbent = greedy
    lower = _greedy_clique_size(pair_masks)
    if not linf_exact or n_elems > max_universe:
        return CoverResult(len(incumbent), "upper_bound_only")
    if lower >= len(incumbent):
        return CoverResult(len(incumbent), "exact")
    tracker = _Budget(budget)
    try:
        chromatic_lower = len(_chromatic_partition(pair_masks, tracker))
    except ResourceLimitError:
        return CoverResult(len(incumbent), "upper_bound_only")
    if chromatic_lower >= len(incumbent):
        return CoverResult(len(incumbent), "exact")
    try:
        size = _min_feasible_partition(
            order, pair_masks, oracle, incumbent, chromatic_lower, tracker
        )
        return CoverResult(size, "exact")
    except ResourceLimitError:
        return CoverResult(len(incumbent), "upper_bound_only")


@dataclass(frozen=True)
class CoverFatResult:
    passed: bool
    cover_l2: int
    cover_linf: int
    fat: int
    fat_bound: float


def cover_fat_relation_check(
    function_class: FunctionClass, x_tree: LabeledTree, beta: float
) -> CoverFatResult:
    """Verify N_2 <= N_inf <= (2 e n / beta)^fat on one instance, exactly.

    The fat-shattering search depth is capped at log2|F|, which cannot cut
    the true dimension: distinct paths of a shattered tree are served by
    distinct functions.
    """
    if x_tree.depth > 6:
        raise ResourceLimitError("relation check limited to depth 6", x_tree.depth)
    if beta <= 0:
        raise ValueError("beta must be positive")
    n2 = sequential_cover_size(function_class, x_tree, beta, norm="l2")
    ninf = sequential_cover_size(function_class, x_tree, beta, norm="linf")
    if n2.mode != "exact" or ninf.mode != "exact":
        raise ResourceLimitError("relation check requires exact covers")
    max_depth = max(0, int(np.floor(np.log2(max(1, len(function_class))) + 1e-9)))
    fat = fat_shattering_dim(function_class, beta, max_depth=max_depth)
    bound = (2.0 * np.e * x_tree.depth / beta) ** fat
    passed = n2.size <= ninf.size <= bound * (1.0 + 1e-12)
    return CoverFatResult(bool(passed), n2.size, ninf.size, fat, float(bound))
