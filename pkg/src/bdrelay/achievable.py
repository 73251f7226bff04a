"""Channel-inversion lattice scheme and the amplify-and-forward baseline.

The lattice program forces equal received power ``P_L = g_a p_a = g_b p_b``
at the relay and ``p_r >= max(p_a, p_b)``.  Per interval and price ``lam``
the variables are ``(P_L, p_r)``; for fixed ``p_r`` the best ``P_L`` is read
off the piecewise-concave envelope ``D`` in closed form and ``p_r`` is found
by golden-section search, mirroring :mod:`bdrelay.upper_bound`.

The amplify-and-forward rates use the usual two-way AF model with self
interference cancelled at each node.  It is a reference curve only.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.optimize import minimize

from ._dual import ConvergenceError, golden_section_max, solve_dual
from .channel import ChannelRealization, FadingEnsemble
from .closed_form import AllocationTriple
from .rates import RatePair, lattice_rate_argmax, lattice_rate_d, lattice_rate_d_inverse
from .upper_bound import PowerAllocation, SolveResult, SolverConfig, zero_power_price

__all__ = [
    "AchievableConfig",
    "solve_achievable",
    "evaluate_achievable_objective",
    "per_interval_subproblem_achievable",
    "amplify_forward_rate",
    "af_allocation",
    "evaluate_af_rate",
    "solve_amplify_forward",
]

LN2 = math.log(2.0)

AchievableConfig = SolverConfig


def evaluate_achievable_objective(ensemble: FadingEnsemble, allocation: PowerAllocation,
                                  delta: float) -> float:
    """Average lattice exchange rate (envelope ``D`` in place of ``C``)."""
    if len(allocation) != len(ensemble):
        raise ValueError(f"allocation has {len(allocation)} intervals, "
                         f"ensemble has {len(ensemble)}")
    g_a, g_b = ensemble.gain_a, ensemble.gain_b
    r_ab = np.minimum(delta * lattice_rate_d(g_a * allocation.p_a),
                      (1 - delta) * lattice_rate_d(g_b * allocation.p_r))
    r_ba = np.minimum(delta * lattice_rate_d(g_b * allocation.p_b),
                      (1 - delta) * lattice_rate_d(g_a * allocation.p_r))
    return float(np.mean(r_ab + r_ba))


def _best_lattice_power(g_a, g_b, p_r, lam, delta):
    g_min = np.minimum(g_a, g_b)
    cap_1 = (1 - delta) * lattice_rate_d(g_b * p_r)
    cap_2 = (1 - delta) * lattice_rate_d(g_a * p_r)
    b1 = lattice_rate_d_inverse(np.minimum(cap_1, cap_2) / delta)
    b2 = lattice_rate_d_inverse(np.maximum(cap_1, cap_2) / delta)
    mu = lam * delta * (1.0 / g_a + 1.0 / g_b)
    both = lattice_rate_argmax(mu / (2 * delta))
    one = lattice_rate_argmax(mu / delta)
    x = np.where(both <= b1, both, np.clip(one, b1, b2))
    return np.minimum(x, g_min * p_r)


def _lagrangian(g_a, g_b, p_l, p_r, lam, delta):
    d_mac = delta * lattice_rate_d(p_l)
    rate = (np.minimum(d_mac, (1 - delta) * lattice_rate_d(g_b * p_r))
            + np.minimum(d_mac, (1 - delta) * lattice_rate_d(g_a * p_r)))
    return rate - lam * (delta * p_l * (1.0 / g_a + 1.0 / g_b) + (1 - delta) * p_r)


def _inner(g_a, g_b, lam, delta, inner_tol):
    if not lam > 0:
        raise ValueError("lambda must be positive: at lambda=0 the budget is unbounded")

    def value_at(p_r):
        p_l = _best_lattice_power(g_a, g_b, p_r, lam, delta)
        return _lagrangian(g_a, g_b, p_l, p_r, lam, delta)

    # beyond pr_max the relay-power constraint is slack and marginal rate < price
    p_l_max = lattice_rate_argmax(lam * (1.0 / g_a + 1.0 / g_b) / 2.0)
    pr_max = np.maximum(2.0 / (lam * LN2), p_l_max / np.minimum(g_a, g_b))
    p_r = golden_section_max(value_at, np.zeros_like(g_a), pr_max, inner_tol)
    p_l = _best_lattice_power(g_a, g_b, p_r, lam, delta)
    return p_l / g_a, p_l / g_b, p_r, _lagrangian(g_a, g_b, p_l, p_r, lam, delta)


def per_interval_subproblem_achievable(realization: ChannelRealization, lam: float,
                                       delta: float = 0.5, inner_tol: float = 1e-10):
    g_a = np.array([realization.gain_a])
    g_b = np.array([realization.gain_b])
    p_a, p_b, p_r, value = _inner(g_a, g_b, float(lam), delta, inner_tol)
    return AllocationTriple(float(p_a[0]), float(p_b[0]), float(p_r[0])), float(value[0])


def solve_achievable(ensemble: FadingEnsemble, config: AchievableConfig) -> SolveResult:
    """Optimal powers for the channel-inversion nested-lattice scheme."""
    if len(ensemble) == 0:
        raise ValueError("empty ensemble")
    g_a, g_b = ensemble.gain_a, ensemble.gain_b
    out = solve_dual(lambda lam: _inner(g_a, g_b, lam, config.delta, config.inner_tol),
                     zero_power_price(ensemble), config.total_power, config.delta,
                     config.dual_tol, config.max_iter)
    alloc = PowerAllocation.from_columns(out.p_a, out.p_b, out.p_r)
    result = SolveResult(alloc, evaluate_achievable_objective(ensemble, alloc, config.delta),
                         out.iterations, out.lam, scheme="lattice_achievable",
                         converged=out.converged)
    if not out.converged:
        raise ConvergenceError(f"price bisection did not converge in {config.max_iter} "
                               "iterations", result)
    return result


def _af_rates(g_a, g_b, p_a, p_b, p_r, delta):
    g2 = p_r / (g_a * p_a + g_b * p_b + 1.0)
    r_ba = (1 - delta) * np.log2(1.0 + g_a * g2 * g_b * p_b / (g_a * g2 + 1.0))
    r_ab = (1 - delta) * np.log2(1.0 + g_b * g2 * g_a * p_a / (g_b * g2 + 1.0))
    return r_ab, r_ba


def amplify_forward_rate(realization: ChannelRealization, alloc: AllocationTriple,
                         delta: float = 0.5) -> RatePair:
    """Two-way AF rates with relay gain ``sqrt(p_r / (g_a p_a + g_b p_b + 1))``."""
    if min(alloc.as_tuple()) < 0:
        raise ValueError("allocation must be non-negative")
    r_ab, r_ba = _af_rates(realization.gain_a, realization.gain_b, *alloc.as_tuple(), delta)
    return RatePair(float(r_ab), float(r_ba))


def evaluate_af_rate(ensemble: FadingEnsemble, allocation: PowerAllocation,
                     delta: float) -> float:
    if len(allocation) != len(ensemble):
        raise ValueError("allocation and ensemble lengths differ")
    r_ab, r_ba = _af_rates(ensemble.gain_a, ensemble.gain_b, allocation.p_a,
                           allocation.p_b, allocation.p_r, delta)
    return float(np.mean(r_ab + r_ba))


def _split(theta, P, delta):
    w = np.exp(theta - np.max(theta))
    w = w / w.sum()
    # weighted budget delta*(p_a + p_b) + (1 - delta)*p_r == P
    return P * w[0] / delta, P * w[1] / delta, P * w[2] / (1 - delta)


def af_allocation(realization: ChannelRealization, P: float, delta: float = 0.5,
                  optimize: bool = False) -> AllocationTriple:
    """Equal per-node power ``P / (1 + delta)``, or a numerically tuned split.

    The tuned split keeps the per-interval budget at ``P`` and is never worse
    than the equal split.
    """
    if not P > 0:
        raise ValueError("P must be positive")
    p = P / (1.0 + delta)
    equal = AllocationTriple(p, p, p)
    if not optimize:
        return equal
    g_a, g_b = realization.gain_a, realization.gain_b

    def neg_rate(theta):
        r_ab, r_ba = _af_rates(g_a, g_b, *_split(theta, P, delta), delta)
        return -(r_ab + r_ba)

    theta0 = np.log(np.array([delta * p, delta * p, (1 - delta) * p]) / P)
    res = minimize(neg_rate, theta0, method="Nelder-Mead",
                   options={"xatol": 1e-9, "fatol": 1e-12, "maxiter": 2000})
    if -res.fun > -neg_rate(theta0):
        return AllocationTriple(*(float(v) for v in _split(res.x, P, delta)))
    return equal


def solve_amplify_forward(ensemble: FadingEnsemble, config: SolverConfig,
                          optimize: bool = False) -> SolveResult:
    """AF baseline with the per-interval budget held at ``total_power``."""
    rows = [af_allocation(r, config.total_power, config.delta, optimize).as_tuple()
            for r in ensemble]
    alloc = PowerAllocation(np.array(rows))
    return SolveResult(alloc, evaluate_af_rate(ensemble, alloc, config.delta), 0,
                       float("nan"), scheme="amplify_forward",
                       metadata={"reference_only": True,
                                 "note": "standard two-way AF model, reference curve"})
