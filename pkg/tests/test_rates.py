import numpy as np
import pytest

from seqreg import (
    RateSpec,
    besov_rate_exponent,
    minimax_lower_rate,
    minimax_upper_rate,
    optimistic_regret_bound,
    sparse_combination_entropy,
)


def nonpar(n, p):
    return RateSpec("nonparametric", n, p=p)


def test_upper_rate_direct_values():
    assert minimax_upper_rate(nonpar(256, 4.0)) == pytest.approx(0.25)
    assert minimax_upper_rate(nonpar(1000, 1.0)) == pytest.approx(0.01)
    assert minimax_upper_rate(RateSpec("finite", 100, size=1)) == 0.0
    assert minimax_upper_rate(RateSpec("parametric", 100, d=2)) == pytest.approx(
        2 * np.log(100) / 100
    )
    assert minimax_upper_rate(nonpar(100, 2.0)) == pytest.approx(np.log(100) / 10.0)


def test_lower_rate_values_and_boundary_continuity():
    assert minimax_lower_rate(nonpar(16, 2.0)) == pytest.approx(0.25)
    # at p = 2 both exponent formulas coincide: -1/2 == -2/(2+2)
    assert 16 ** (-2.0 / 4.0) == pytest.approx(0.25)
    n = int(np.e**2 + 0.5)
    got = minimax_lower_rate(RateSpec("parametric", n, d=2))
    assert got == pytest.approx(2 * np.log(n) / n)
    with pytest.raises(ValueError):
        minimax_lower_rate(RateSpec("finite", 10, size=4))


def test_rate_spec_validation():
    with pytest.raises(ValueError):
        RateSpec("nonparametric", 10, p=-1.0)
    with pytest.raises(ValueError):
        RateSpec("parametric", 10)
    with pytest.raises(ValueError):
        RateSpec("weird", 10)
    with pytest.raises(ValueError):
        RateSpec("finite", 0, size=3)


def test_upper_and_lower_agree_at_phase_boundary_up_to_polylog():
    for exp in range(10, 21):
        n = 1 << exp
        up = minimax_upper_rate(nonpar(n, 2.0))
        lo = minimax_lower_rate(nonpar(n, 2.0))
        ratio = up / lo
        assert 1.0 <= ratio <= np.log(n) ** 2


def test_optimistic_bound_values():
    # L*=0, p=1, n=e: just log n = 1 (real-valued horizons are accepted)
    assert optimistic_regret_bound(nonpar(np.e, 1.0), 0.0) == pytest.approx(1.0)
    # parametric d=1 with L* = log n: sqrt(r^2) + r = 2r at r = log n
    n = 100
    r = np.log(n)
    assert optimistic_regret_bound(RateSpec("parametric", n, d=1), r) == pytest.approx(2 * r)
    # p=3, L*=0: exponent 1 - 1/(p-1) = 1/2
    assert optimistic_regret_bound(nonpar(16, 3.0), 0.0) == pytest.approx(4.0 * np.log(16))
    # p=2 carries the extra log factor
    assert optimistic_regret_bound(nonpar(100, 2.0), 0.0) == pytest.approx(np.log(100) ** 2)
    with pytest.raises(ValueError):
        optimistic_regret_bound(nonpar(10, 1.0), -1.0)


def test_loglog_slopes_match_exponents():
    # acceptance-style slope check: exact power laws give exact slopes
    ns = np.array([1 << e for e in range(10, 21)], dtype=float)
    for p, target in ((4.0, -1.0 / 4.0), (1.0, -2.0 / 3.0)):
        rates = np.array([minimax_upper_rate(nonpar(int(n), p)) for n in ns])
        slope = np.polyfit(np.log(ns), np.log(rates), 1)[0]
        assert slope == pytest.approx(target, abs=1e-10)


def test_besov_rates():
    assert besov_rate_exponent(1.0, 1, 2.0).exponent == pytest.approx(2.0 / 3.0)
    r = besov_rate_exponent(1.0, 4, 4.0)
    assert r.exponent == pytest.approx(1.0 / 3.0)
    assert r.regime == "smooth"
    r = besov_rate_exponent(1.0, 4, 2.0)
    assert r.exponent == pytest.approx(0.5)
    assert r.regime == "convexity-limited"
    with pytest.raises(ValueError):
        besov_rate_exponent(-1.0, 4, 2.0)


def test_sparse_combination_entropy():
    M = 6
    assert sparse_combination_entropy(M, M, 1.0) == pytest.approx(M)
    # s=1, M=e, beta=1: log(e^2) = 2 (real-valued M accepted for arithmetic)
    assert sparse_combination_entropy(np.e, 1, 1.0) == pytest.approx(2.0)
    assert sparse_combination_entropy(8, 2, 0.5) == pytest.approx(
        2 * np.log(4 * np.e) + 2 * np.log(2)
    )
    with pytest.raises(ValueError):
        sparse_combination_entropy(4, 5, 0.5)
    with pytest.raises(ValueError):
        sparse_combination_entropy(4, 2, 0.0)
