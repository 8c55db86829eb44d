"""Complete rooted binary trees with path-prefix node labels."""

from __future__ import annotations

import json

import numpy as np


class ResourceLimitError(RuntimeError):
    """An exhaustive search exceeded its configured budget."""

    def __init__(self, message, depth_reached=None):
        super().__init__(message)
        self.depth_reached = depth_reached


def node_index(level: int, prefix: int) -> int:
    """Flat index of the node at 1-based `level` reached by `prefix`.

    `prefix` encodes the signs chosen before this level as a binary number
    (+1 -> bit 1, -1 -> bit 0, first sign most significant).
    """
    return (1 << (level - 1)) - 1 + prefix


def sign_vectors(n: int) -> np.ndarray:
    """All 2^n sign sequences as a (2^n, n) array; row r spells the bits of r."""
    if n == 0:
        return np.zeros((1, 0), dtype=int)
    r = np.arange(1 << n)
    bits = (r[:, None] >> np.arange(n - 1, -1, -1)[None, :]) & 1
    return 2 * bits - 1


class LabeledTree:
    """Depth-n complete binary tree whose level-t label depends on signs 1..t-1.

    Labels sit in a flat length 2^n - 1 array in level order, so the node
    structurally cannot depend on the current or later signs.
    """

    def __init__(self, depth: int, labels):
        if depth < 1:
            raise ValueError("tree depth must be at least 1")
        labels = np.array(labels)
        labels.setflags(write=False)
        if labels.shape != ((1 << depth) - 1,):
            raise ValueError(
                f"depth-{depth} tree needs {(1 << depth) - 1} labels, got {labels.shape}"
            )
        self.depth = depth
        self.labels = labels

    @classmethod
    def constant(cls, depth: int, value) -> "LabeledTree":
        return cls(depth, np.full((1 << depth) - 1, value))

    def node(self, level: int, prefix: int):
        return self.labels[node_index(level, prefix)]

    def path(self, epsilon) -> np.ndarray:
        """Labels along the path of `epsilon` (left on -1, right on +1)."""
        epsilon = np.asarray(epsilon)
        if epsilon.shape != (self.depth,):
            raise ValueError("sign sequence length must equal the tree depth")
        idx = np.empty(self.depth, dtype=int)
        prefix = 0
        for t in range(1, self.depth + 1):
            idx[t - 1] = node_index(t, prefix)
            prefix = (prefix << 1) | (1 if epsilon[t - 1] > 0 else 0)
        return self.labels[idx]

    def level_slice(self, level: int) -> np.ndarray:
        """All labels at one level, indexed by prefix."""
        start = (1 << (level - 1)) - 1
        return self.labels[start : start + (1 << (level - 1))]

    def mirrored(self) -> "LabeledTree":
        """The left-right flipped tree: label at path eps moves to path -eps."""
        labels = np.array(self.labels)
        for t in range(1, self.depth + 1):
            start = (1 << (t - 1)) - 1
            labels[start : start + (1 << (t - 1))] = self.level_slice(t)[::-1]
        return LabeledTree(self.depth, labels)

    def to_json(self, path) -> None:
        data = {"depth": self.depth, "labels": [v.item() for v in self.labels]}
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(data, fh)
            fh.write("\n")

    @classmethod
    def from_json(cls, path) -> "LabeledTree":
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
        return cls(int(data["depth"]), data["labels"])


def tree_path_eval(tree: LabeledTree, epsilon) -> list:
    """The label sequence (z_1, ..., z_n) visited by a sign sequence."""
    return list(tree.path(epsilon))
