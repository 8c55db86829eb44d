"""Finite tabulated function classes over an indexed covariate domain."""

from __future__ import annotations

import json

import numpy as np


class FunctionClass:
    """A finite set of real-valued functions on the domain {0, ..., m-1}.

    Functions are rows of a read-only (k, m) matrix with values in [-1, 1].
    Instances are immutable after construction and safe to share across
    threads.
    """

    def __init__(self, values, names=None):
        values = np.array(values, dtype=float)
        if values.ndim != 2:
            raise ValueError("values must be a (num_functions, domain_size) matrix")
        if values.size and float(np.max(np.abs(values))) > 1.0 + 1e-12:
            raise ValueError("function values must lie in [-1, 1]")
        values.setflags(write=False)
        self._values = values
        if names is None:
            names = [f"f{i}" for i in range(values.shape[0])]
        names = [str(n) for n in names]
        if len(names) != values.shape[0]:
            raise ValueError("need exactly one name per function")
        self._names = tuple(names)

    @property
    def values(self) -> np.ndarray:
        return self._values

    @property
    def names(self) -> tuple:
        return self._names

    @property
    def domain_size(self) -> int:
        return self._values.shape[1]

    def __len__(self) -> int:
        return self._values.shape[0]

    def column(self, x: int) -> np.ndarray:
        """All member values at covariate x, one entry per function."""
        return self._values[:, x]

    def evaluate(self, index: int, x: int) -> float:
        return float(self._values[index, x])

    def with_member(self, row, name=None) -> "FunctionClass":
        """A new class with one extra function appended."""
        row = np.asarray(row, dtype=float).reshape(1, -1)
        if row.shape[1] != self.domain_size:
            raise ValueError("new member must match the domain size")
        if name is None:
            name = f"f{len(self)}"
        return FunctionClass(np.vstack([self._values, row]), list(self._names) + [name])

    def permuted(self, order) -> "FunctionClass":
        order = list(order)
        return FunctionClass(self._values[order], [self._names[i] for i in order])


def load_class_file(path) -> FunctionClass:
    """Read a class file: {"domain_size": m, "functions": {name: [v0..v_{m-1}]}}.

    JSON syntax errors surface with their line number; semantic errors name
    the offending function.
    """
    with open(path, "r", encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValueError(f"{path}: parse error at line {exc.lineno}: {exc.msg}") from exc
    try:
        m = int(data["domain_size"])
        functions = data["functions"]
    except (KeyError, TypeError) as exc:
        raise ValueError(f"{path}: expected keys 'domain_size' and 'functions'") from exc
    names, rows = [], []
    for name, vec in functions.items():
        if len(vec) != m:
            raise ValueError(f"{path}: function {name!r} has {len(vec)} values, expected {m}")
        vals = [float(v) for v in vec]
        if any(abs(v) > 1.0 + 1e-12 for v in vals):
            raise ValueError(f"{path}: function {name!r} has values outside [-1, 1]")
        names.append(name)
        rows.append(vals)
    if not rows:
        return FunctionClass(np.zeros((0, m)), [])
    return FunctionClass(np.array(rows), names)


def dump_class_file(function_class: FunctionClass, path) -> None:
    data = {
        "domain_size": function_class.domain_size,
        "functions": {
            name: [float(v) for v in row]
            for name, row in zip(function_class.names, function_class.values)
        },
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(data, fh, indent=2)
        fh.write("\n")
