import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bdrelay.channel import ChannelRealization
from bdrelay.closed_form import (GOLDEN_HIGH, GOLDEN_LOW, AllocationTriple,
                                 allocate_ach_highsnr, allocate_ub_highsnr, gap_at,
                                 gap_sweep, highsnr_exchange_rate, save_gap_profile)

kappas = st.floats(1e-6, 1e6)
powers = st.floats(1e-3, 1e6)


def _close(alloc, expected, tol=1e-12):
    assert alloc.as_tuple() == pytest.approx(expected, rel=tol, abs=tol)


# closed-form allocations at known operating points
def test_ub_case2_symmetric():
    _close(allocate_ub_highsnr(1.0, 3.0), (2.0, 2.0, 2.0))


def test_ub_case1():
    _close(allocate_ub_highsnr(0.1, 1.0), (1.0, 0.1 / 1.1, 1 / 1.1))


def test_ub_case3():
    _close(allocate_ub_highsnr(4.0, 1.0), (0.2, 1.0, 0.8))


def test_ub_case1_case2_meet_at_lower_threshold():
    k = GOLDEN_LOW
    assert 1 + k + k * k == pytest.approx(2.0, abs=1e-15)
    p = 5.0
    case2 = (2 * p / (1 + k + k * k), 2 * p * k * k / (1 + k + k * k), 2 * p * k / (1 + k + k * k))
    _close(allocate_ub_highsnr(k, p), case2, tol=1e-12)


def test_ach_examples():
    _close(allocate_ach_highsnr(0.5, 1.0), (0.8, 0.4, 0.8))
    _close(allocate_ach_highsnr(2.0, 1.0), (0.4, 0.8, 0.8))
    _close(allocate_ach_highsnr(1.0, 3.0), (2.0, 2.0, 2.0))
    above = allocate_ach_highsnr(1.0 + 1e-15, 3.0)
    _close(above, (2.0, 2.0, 2.0), tol=1e-12)


@pytest.mark.parametrize("fn", [allocate_ub_highsnr, allocate_ach_highsnr])
@pytest.mark.parametrize("k,P", [(0, 1), (-1, 1), (1, 0), (1, -2), (math.nan, 1)])
def test_allocators_reject_bad_input(fn, k, P):
    with pytest.raises(ValueError):
        fn(k, P)


@given(kappas, powers)
def test_budget_identity(k, P):
    for fn in (allocate_ub_highsnr, allocate_ach_highsnr):
        a = fn(k, P)
        assert 0.5 * (a.p_a + a.p_b + a.p_r) == pytest.approx(P, rel=1e-12)
        assert min(a.as_tuple()) >= 0


@given(kappas, powers)
def test_mirror_symmetry(k, P):
    for fn in (allocate_ub_highsnr, allocate_ach_highsnr):
        a, b = fn(k, P), fn(1 / k, P)
        assert (b.p_b, b.p_a, b.p_r) == pytest.approx(a.as_tuple(), rel=1e-9)


@given(kappas, powers)
def test_ach_feasibility(k, P):
    a = allocate_ach_highsnr(k, P)
    assert k * a.p_a == pytest.approx(a.p_b, rel=1e-14)
    assert a.p_r >= max(a.p_a, a.p_b) * (1 - 1e-15)


@pytest.mark.parametrize("fn,threshold", [(allocate_ub_highsnr, GOLDEN_LOW),
                                          (allocate_ub_highsnr, GOLDEN_HIGH),
                                          (allocate_ach_highsnr, 1.0)])
def test_continuity_at_thresholds(fn, threshold):
    P = 7.0
    below = np.array(fn(threshold * (1 - 1e-13), P).as_tuple())
    above = np.array(fn(threshold * (1 + 1e-13), P).as_tuple())
    assert np.max(np.abs(above - below)) <= 1e-9 * P


def test_vectorised_matches_scalar():
    k = np.logspace(-3, 3, 50)
    vec = allocate_ub_highsnr(k, 2.0)
    for i in (0, 17, 49):
        assert allocate_ub_highsnr(float(k[i]), 2.0).p_r == vec.p_r[i]


def test_exchange_rate_symmetric_exact():
    r = highsnr_exchange_rate(ChannelRealization(1, 1), AllocationTriple(2, 2, 2), "exact")
    assert r.r_ab == r.r_ba == pytest.approx(0.5 * math.log2(3), abs=1e-15)


def test_exchange_rate_case3_balances_a_to_b():
    # g_a = 4, g_b = 1: both arguments of the A->B minimum equal 0.8
    alloc = allocate_ub_highsnr(4.0, 1.0)
    assert 4 * alloc.p_a == pytest.approx(0.8) and 1 * alloc.p_r == pytest.approx(0.8)
    r = highsnr_exchange_rate(ChannelRealization(2, 1), alloc, "exact")
    assert r.r_ab == pytest.approx(0.5 * math.log2(1.8), rel=1e-12)
    assert r.r_ba == pytest.approx(0.5 * math.log2(2.0), rel=1e-12)


@given(st.floats(0.01, 100), st.floats(0.01, 100))
def test_exchange_rate_zero_relay_power(pa, pb):
    r = highsnr_exchange_rate(ChannelRealization(1.3, 0.4j), AllocationTriple(pa, pb, 0.0))
    assert r.r_ab == 0 and r.r_ba == 0


def test_exchange_rate_highsnr_rejects_zero_power():
    with pytest.raises(ValueError):
        highsnr_exchange_rate(ChannelRealization(1, 1), AllocationTriple(1, 1, 0), "highsnr")


def _gap_closed_form(k):
    # kappa^2 >= 1 form; the other side follows by swapping the nodes
    k = max(k, 1 / k)
    return math.log2(math.sqrt(k) * (1 + 2 * k) / (1 + k + k * k))


@pytest.mark.parametrize("k", [0.7, 0.9, 1.2, 1.4548, 1.6])
def test_gap_matches_middle_case_formula(k):
    assert gap_at(k) == pytest.approx(_gap_closed_form(k), abs=1e-13)


def test_gap_zero_at_unity_and_vanishes_far_out():
    assert abs(gap_at(1.0)) <= 1e-12
    assert gap_at(1e8) / 0.5 < 1e-6
    assert gap_at(1e-8) / 0.5 < 1e-6


def test_gap_sweep_eta():
    prof = gap_sweep(1e-3, 1e3, 10_000)
    assert 0.0892 <= prof.eta <= 0.0902
    assert prof.eta == pytest.approx(0.08972, abs=1e-4)
    assert prof.argmax_kappa_sq == pytest.approx(1.455, abs=5e-3)
    assert prof.eta_per_channel_use == pytest.approx(0.0449, abs=1e-4)
    assert np.all(prof.gap_bits >= -1e-9)
    # the closed-form maximum lies within grid resolution of the sweep
    fine = max(2 * _gap_closed_form(k) for k in np.linspace(1.40, 1.50, 20001))
    assert 0 <= fine - prof.eta < 1e-6


@settings(max_examples=50)
@given(kappas, st.floats(1e-3, 1e3), st.floats(1e-3, 1e3))
def test_gap_scale_invariant(k, c, P):
    ub = allocate_ub_highsnr(k, P)
    ach = allocate_ach_highsnr(k, P)
    r_ub = highsnr_exchange_rate(ChannelRealization(c * math.sqrt(k), c), ub, "highsnr")
    r_ach = highsnr_exchange_rate(ChannelRealization(c * math.sqrt(k), c), ach, "highsnr")
    assert r_ub.total - r_ach.total == pytest.approx(gap_at(k), abs=1e-9)


@pytest.mark.parametrize("bounds", [(0, 1), (-1, 1), (10, 1), (1, 1)])
def test_gap_sweep_rejects_bad_grid(bounds):
    with pytest.raises(ValueError):
        gap_sweep(*bounds, 10)


def test_gap_profile_export(tmp_path):
    prof = gap_sweep(0.5, 2.0, 5)
    path = tmp_path / "gap.csv"
    save_gap_profile(prof, path)
    rows = [l for l in path.read_text().splitlines() if not l.startswith("#")]
    assert rows[0] == "kappa_sq,gap_bits"
    assert len(rows) == 6
    assert float(rows[3].split(",")[0]) == pytest.approx(1.0)
