"""Chaining bounds: the finite-class maximal inequality and offset Dudley
integrals, with closed-form fast paths cross-checked by quadrature."""

from __future__ import annotations

import numpy as np
from scipy.special import erf

from .entropy import EntropyFunction

QUADRATURE_REL_TOL = 1e-6


def finite_maximal_bound(W_size: int, B: float, A: float, C: float, alpha: float) -> float:
    """min(B^2/(2C), A^2/(2 alpha)) * log|W|, with x/0 read as +inf."""
    if W_size < 1:
        raise ValueError("need at least one tree in the family")
    if C < 0 or alpha < 0:
        raise ValueError("offsets must be nonnegative")
    if C == 0 and alpha == 0:
        raise ValueError("bound undefined when both offsets vanish")
    branch_c = B * B / (2.0 * C) if C > 0 else np.inf
    branch_a = A * A / (2.0 * alpha) if alpha > 0 else np.inf
    if W_size == 1:
        return 0.0
    return float(min(branch_c, branch_a) * np.log(W_size))


def adaptive_simpson(f, a: float, b: float, rel_tol: float = QUADRATURE_REL_TOL) -> float:
    """Classic recursive adaptive Simpson quadrature."""
    if b <= a:
        return 0.0

    def simpson(lo, flo, hi, fhi):
        mid = 0.5 * (lo + hi)
        fmid = f(mid)
        return mid, fmid, (hi - lo) / 6.0 * (flo + 4.0 * fmid + fhi)

    def recurse(lo, flo, hi, fhi, whole, fmid, mid, tol, depth):
        lm, flm, left = simpson(lo, flo, mid, fmid)
        rm, frm, right = simpson(mid, fmid, hi, fhi)
        if depth <= 0 or abs(left + right - whole) <= 15.0 * tol:
            return left + right + (left + right - whole) / 15.0
        return recurse(lo, flo, mid, fmid, left, flm, lm, tol / 2.0, depth - 1) + recurse(
            mid, fmid, hi, fhi, right, frm, rm, tol / 2.0, depth - 1
        )

    fa, fb = f(a), f(b)
    mid, fmid, whole = simpson(a, fa, b, fb)
    scale = max(abs(whole), 1e-12)
    return recurse(a, fa, b, fb, whole, fmid, mid, rel_tol * scale, 48)


def _sqrt_paramlog_antiderivative(delta: float, d: float) -> float:
    """Antiderivative of sqrt(d log(1/x)); constant for x >= 1."""
    u = np.sqrt(max(0.0, np.log(1.0 / delta)))
    return float(np.sqrt(d) * (u * np.exp(-u * u) - 0.5 * np.sqrt(np.pi) * erf(u)))


def sqrt_entropy_integral(entropy: EntropyFunction, a: float, b: float, method: str = "auto") -> float:
    """integral_a^b sqrt(entropy(delta)) d delta.

    method "closed_form" uses the analytic antiderivative for the power-law
    and logarithmic families; "quadrature" always integrates numerically;
    "auto" prefers the closed form when one exists.
    """
    if b <= a:
        return 0.0
    if method not in ("auto", "closed_form", "quadrature"):
        raise ValueError("unknown integration method")
    use_closed = method == "closed_form" or (method == "auto" and entropy.kind in ("power", "paramlog", "finite"))
    if use_closed:
        if entropy.kind == "power":
            p = entropy.params["p"]
            if p == 2.0:
                return float(np.log(b / a))
            e = 1.0 - p / 2.0
            return float((b**e - a**e) / e)
        if entropy.kind == "paramlog":
            d = entropy.params["d"]
            return _sqrt_paramlog_antiderivative(b, d) - _sqrt_paramlog_antiderivative(a, d)
        if entropy.kind == "finite":
            return float(np.sqrt(entropy(a)) * (b - a))
        raise ValueError(f"no closed form for entropy kind {entropy.kind!r}")
    return adaptive_simpson(lambda x: np.sqrt(entropy(x)), a, b)


def scaled_entropy_integral(entropy: EntropyFunction, a: float, b: float, method: str = "auto") -> float:
    """integral_a^b delta * entropy(delta) d delta."""
    if b <= a:
        return 0.0
    if method not in ("auto", "closed_form", "quadrature"):
        raise ValueError("unknown integration method")
    use_closed = method == "closed_form" or (method == "auto" and entropy.kind in ("power", "paramlog", "finite"))
    if use_closed:
        if entropy.kind == "power":
            p = entropy.params["p"]
            if p == 2.0:
                return float(np.log(b / a))
            e = 2.0 - p
            return float((b**e - a**e) / e)
        if entropy.kind == "paramlog":
            d = entropy.params["d"]

            def anti(x):
                x = min(x, 1.0)  # integrand vanishes beyond scale 1
                return d * (0.25 * x * x - 0.5 * x * x * np.log(x))

            return float(anti(b) - anti(a))
        if entropy.kind == "finite":
            return float(entropy(a) * 0.5 * (b * b - a * a))
        raise ValueError(f"no closed form for entropy kind {entropy.kind!r}")
    return adaptive_simpson(lambda x: x * entropy(x), a, b)


def dudley_offset_bound(
    entropy: EntropyFunction,
    gamma: float,
    n: int,
    B: float,
    rho_grid,
    method: str = "auto",
) -> float:
    """Offset chaining bound for the square-loss game at critical scale gamma.

    Returns 32 B^2 entropy(gamma)
          + B min_{rho in rho_grid} [4 rho n + 12 sqrt(n) I(rho, gamma)]
    with I the integral of sqrt(entropy). gamma = 0 is allowed only for the
    constant finite-class entropy, where the bound collapses to its first
    term evaluated at an arbitrary scale.
    """
    if entropy.norm != "l2":
        raise ValueError("the offset chaining bound uses an l2 entropy")
    if n < 1 or B <= 0:
        raise ValueError("need n >= 1 and B > 0")
    if gamma == 0:
        if entropy.kind != "finite":
            raise ValueError("gamma = 0 is allowed only for finite-class entropy")
        return 32.0 * B * B * entropy(1.0)
    if gamma < 0:
        raise ValueError("gamma must be nonnegative")
    rhos = [float(r) for r in rho_grid]
    if not rhos:
        raise ValueError("rho grid must be nonempty")
    if any(r <= 0 or r >= gamma for r in rhos):
        raise ValueError("rho grid must lie strictly inside (0, gamma)")
    first = 32.0 * B * B * entropy(gamma)
    best = min(
        4.0 * r * n + 12.0 * np.sqrt(n) * sqrt_entropy_integral(entropy, r, gamma, method)
        for r in rhos
    )
    return float(first + B * best)


def dudley_offset_bound_optimistic(
    entropy: EntropyFunction,
    gamma: float,
    n: int,
    alpha: float,
    A: float,
    rho_grid,
    method: str = "auto",
) -> float:
    """Optimistic chaining bound with the discount-offset alpha.

    Returns alpha^-1 16 A^2 entropy(gamma)
          + alpha^-1 min_rho [4 rho n + 16 log(gamma/rho) J(rho, gamma)]
    with J the integral of delta * entropy(delta), using the l_inf entropy.
    """
    if entropy.norm != "linf":
        raise ValueError("the optimistic chaining bound uses an l_inf entropy")
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    if n < 1 or gamma <= 0:
        raise ValueError("need n >= 1 and gamma > 0")
    rhos = [float(r) for r in rho_grid]
    if not rhos:
        raise ValueError("rho grid must be nonempty")
    if any(r <= 0 or r >= gamma for r in rhos):
        raise ValueError("rho grid must lie strictly inside (0, gamma)")
    first = 16.0 * A * A * entropy(gamma)
    best = min(
        4.0 * r * n
        + 16.0 * np.log(gamma / r) * scaled_entropy_integral(entropy, r, gamma, method)
        for r in rhos
    )
    return float((first + best) / alpha)
