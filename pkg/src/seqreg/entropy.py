"""Entropy-growth models feeding the chaining bounds."""

from __future__ import annotations

import csv

import numpy as np


class EntropyFunction:
    """Scale -> entropy map with a declared path norm ('l2' or 'linf').

    The evaluator must be nonincreasing in the scale (checked on a sample
    grid at construction). The `kind` tag unlocks closed-form integration
    fast paths for the power-law and logarithmic families.
    """

    def __init__(self, evaluator, norm: str, kind: str = "custom", params=None):
        if norm not in ("l2", "linf"):
            raise ValueError("norm must be 'l2' or 'linf'")
        self.norm = norm
        self.kind = kind
        self.params = dict(params or {})
        self._evaluator = evaluator
        grid = np.logspace(-3, 1, 25)
        vals = [self(b) for b in grid]
        if any(b - a > 1e-9 * max(1.0, abs(a)) for a, b in zip(vals, vals[1:])):
            raise ValueError("entropy must be nonincreasing in the scale")

    def __call__(self, beta: float) -> float:
        if beta <= 0:
            raise ValueError("entropy is evaluated at positive scales")
        v = float(self._evaluator(float(beta)))
        if not np.isfinite(v) or v < 0:
            raise ValueError(f"entropy({beta}) = {v} is not a nonnegative real")
        return v

    @classmethod
    def power_law(cls, p: float, norm: str = "l2") -> "EntropyFunction":
        """Polynomial growth: entropy(b) = b^(-p)."""
        if p <= 0:
            raise ValueError("power-law exponent must be positive")
        return cls(lambda b: b ** (-p), norm, kind="power", params={"p": p})

    @classmethod
    def parametric_log(cls, d: int, norm: str = "l2") -> "EntropyFunction":
        """Parametric growth: entropy(b) = d log(1/b), floored at zero."""
        if d < 1:
            raise ValueError("dimension must be at least 1")
        return cls(
            lambda b: max(0.0, d * np.log(1.0 / b)), norm, kind="paramlog", params={"d": d}
        )

    @classmethod
    def finite_class(cls, size: int, norm: str = "l2") -> "EntropyFunction":
        """Constant entropy log(size) at every scale."""
        if size < 1:
            raise ValueError("class size must be at least 1")
        value = float(np.log(size))
        return cls(lambda b: value, norm, kind="finite", params={"size": size})

    @classmethod
    def from_table(cls, betas, entropies, norm: str = "l2") -> "EntropyFunction":
        """Log-linear interpolation of (beta, entropy) pairs, clamped at the ends."""
        betas = np.asarray(betas, dtype=float)
        entropies = np.asarray(entropies, dtype=float)
        if betas.ndim != 1 or betas.shape != entropies.shape or betas.size < 2:
            raise ValueError("need matching beta/entropy vectors of length >= 2")
        if np.any(betas <= 0) or np.any(entropies < 0):
            raise ValueError("table scales must be positive, entropies nonnegative")
        order = np.argsort(betas)
        logb = np.log(betas[order])
        vals = entropies[order]
        # interpolate log(entropy) where positive; zeros clamp to zero
        safe = np.where(vals > 0, np.log(np.maximum(vals, 1e-300)), -np.inf)

        def evaluator(b):
            lv = np.interp(np.log(b), logb, safe)
            return 0.0 if lv == -np.inf else float(np.exp(lv))

        return cls(evaluator, norm, kind="table")

    @classmethod
    def from_csv(cls, path, norm: str = "l2") -> "EntropyFunction":
        betas, entropies = [], []
        with open(path, "r", encoding="utf-8", newline="") as fh:
            for row in csv.reader(fh):
                if not row or row[0].strip().lower() in ("beta", "scale"):
                    continue
                betas.append(float(row[0]))
                entropies.append(float(row[1]))
        return cls.from_table(betas, entropies, norm)

    @classmethod
    def parse(cls, spec: str, norm: str = "l2") -> "EntropyFunction":
        """CLI form: 'power:p=<v>', 'paramlog:d=<v>', 'finite:size=<v>', or a CSV path."""
        if ":" in spec:
            head, _, arg = spec.partition(":")
            key, _, value = arg.partition("=")
            if head == "power" and key == "p":
                return cls.power_law(float(value), norm)
            if head == "paramlog" and key == "d":
                return cls.parametric_log(int(value), norm)
            if head == "finite" and key == "size":
                return cls.finite_class(int(value), norm)
            raise ValueError(f"unrecognized entropy spec {spec!r}")
        return cls.from_csv(spec, norm)
