import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from bdrelay.rates import (ENVELOPE_SLOPE, ENVELOPE_X1, ENVELOPE_X2, capacity_c, highsnr_c,
                           lattice_rate_argmax, lattice_rate_d, lattice_rate_d_inverse,
                           lattice_rate_d_prime, uce_breakpoints)

from oracles import envelope_breakpoints_oracle, f_lattice, f_time_share, hull_envelope


@pytest.mark.parametrize("x,expected", [(0, 0.0), (1, 1.0), (3, 2.0)])
def test_capacity_examples(x, expected):
    assert capacity_c(x) == expected


def test_capacity_rejects_negative():
    with pytest.raises(ValueError):
        capacity_c(-1e-9)


@pytest.mark.parametrize("x,expected", [(1, 0.0), (2, 1.0)])
def test_highsnr_examples(x, expected):
    assert highsnr_c(x) == expected


@pytest.mark.parametrize("x", [0.0, -1.0])
def test_highsnr_rejects_nonpositive(x):
    with pytest.raises(ValueError):
        highsnr_c(x)


def test_highsnr_close_at_high_snr():
    diff = capacity_c(1000) - highsnr_c(1000)
    assert diff == pytest.approx(math.log2(1001 / 1000), rel=1e-12)
    assert diff <= 0.0015


def test_breakpoints_match_oracle():
    x1, x2, slope, (a0, b0) = envelope_breakpoints_oracle()
    bp = uce_breakpoints()
    assert bp.x1 == pytest.approx(x1, abs=1e-9)
    assert bp.x2 == pytest.approx(x2, abs=1e-9)
    assert bp.slope == pytest.approx(slope, abs=1e-9)
    # hull vertices bracket the exact tangency points to grid resolution
    assert abs(a0 - x1) < 1e-3 and abs(b0 - x2) < 1e-3
    assert bp.x1 == pytest.approx(0.859141, abs=1e-6)
    assert bp.x2 == pytest.approx(2.218282, abs=1e-6)
    assert bp.slope == pytest.approx(0.530738, abs=1e-6)


def test_breakpoint_invariants():
    bp = uce_breakpoints()
    assert 0 < bp.x1 < bp.x2 and bp.slope > 0
    line_at_x2 = f_time_share(bp.x1) + bp.slope * (bp.x2 - bp.x1)
    assert line_at_x2 == pytest.approx(f_lattice(bp.x2), abs=1e-14)
    assert 1 + 2 * bp.x1 == pytest.approx(0.5 + bp.x2, abs=1e-14)


def test_d_examples():
    assert lattice_rate_d(0) == 0.0
    assert lattice_rate_d(100) == pytest.approx(math.log2(100.5), abs=1e-15)
    # both raw branches equal 1 at x = 1.5; the bridge lies strictly above
    assert f_time_share(1.5) == pytest.approx(1.0) and f_lattice(1.5) == pytest.approx(1.0)
    assert lattice_rate_d(1.5) == pytest.approx(1.0614, abs=5e-4)
    assert lattice_rate_d(1.5) > 1.0


def test_d_rejects_negative():
    with pytest.raises(ValueError):
        lattice_rate_d(-0.1)


def test_d_dominates_branches_on_grid():
    x = np.linspace(0, 50, 10_000)
    d = lattice_rate_d(x)
    assert np.all(d >= f_time_share(x) - 1e-15)
    assert np.all(d >= f_lattice(x) - 1e-15)
    # envelope never exceeds log2(1 + x)
    assert np.all(d <= capacity_c(x) + 1e-15)


def test_d_matches_sampled_hull():
    x = np.linspace(0, 50, 10_000)
    hull = hull_envelope(x, np.maximum(f_time_share(x), f_lattice(x)))
    assert np.max(np.abs(lattice_rate_d(x) - hull)) < 1e-6


def test_d_smooth_at_breakpoints():
    h = 1e-7
    for x in (ENVELOPE_X1, ENVELOPE_X2):
        left = (lattice_rate_d(x) - lattice_rate_d(x - h)) / h
        right = (lattice_rate_d(x + h) - lattice_rate_d(x)) / h
        assert abs(left - right) < 1e-6
        # analytic one-sided derivatives agree far more tightly
        a = 1 / ((1 + 2 * x) * math.log(2)) if x == ENVELOPE_X1 else 1 / ((0.5 + x) * math.log(2))
        assert abs(a - ENVELOPE_SLOPE) < 1e-8


def test_d_prime_matches_finite_difference():
    x = np.array([0.1, 0.5, 1.2, 2.0, 3.0, 10.0])
    h = 1e-6
    fd = (lattice_rate_d(x + h) - lattice_rate_d(x - h)) / (2 * h)
    np.testing.assert_allclose(lattice_rate_d_prime(x), fd, rtol=1e-6)


@given(st.floats(0, 1e4))
def test_d_inverse(x):
    assert lattice_rate_d_inverse(lattice_rate_d(x)) == pytest.approx(x, rel=1e-9, abs=1e-9)


@given(st.floats(1e-4, 1.0 / math.log(2) - 1e-6))
def test_argmax_is_stationary(price):
    x = lattice_rate_argmax(price)
    f = lambda t: lattice_rate_d(t) - price * t
    for dx in (1e-3, -1e-3):
        if x + dx >= 0:
            assert f(x) >= f(x + dx) - 1e-12


def test_argmax_zero_above_origin_slope():
    assert lattice_rate_argmax(1.0 / math.log(2)) == 0.0
    assert lattice_rate_argmax(5.0) == 0.0


def test_capacity_gap_to_d():
    x = np.linspace(ENVELOPE_X2, 1e4, 5000)
    gap = capacity_c(x) - lattice_rate_d(x)
    assert np.all(gap >= 0) and np.all(gap <= 1)
    assert capacity_c(1e9) - lattice_rate_d(1e9) < 1e-9


def _midpoint_concave(fn, rng, n, hi):
    a = rng.uniform(0, hi, n)
    b = rng.uniform(0, hi, n)
    return np.all(fn((a + b) / 2) >= (fn(a) + fn(b)) / 2 - 1e-12)


def test_concavity_midpoint():
    rng = np.random.default_rng(2024)
    assert _midpoint_concave(lattice_rate_d, rng, 1000, 20.0)
    assert _midpoint_concave(capacity_c, rng, 1000, 20.0)


@given(st.floats(0, 1e6), st.floats(1e-6, 1e3))
def test_capacity_increasing(x, dx):
    assert capacity_c(x + dx) > capacity_c(x)
