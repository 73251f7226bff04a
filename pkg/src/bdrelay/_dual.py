"""Dual-decomposition driver shared by the numerical solvers.

A solver supplies ``inner(lam) -> (p_a, p_b, p_r, value)`` that maximizes the
per-interval Lagrangian for every interval at once.  The driver bisects the
budget price ``lam`` on a log scale until the weighted power matches the
budget, then mixes the two bracketing allocations so the budget holds with
equality.  Mixing two Lagrangian maximizers at (nearly) the same price is
feasible and optimal, which also covers prices where the maximizer jumps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


class ConvergenceError(RuntimeError):
    """Raised when the price bisection hits ``max_iter``; ``result`` holds the
    best allocation found."""

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


def golden_section_max(f, lo, hi, tol):
    """Elementwise maximizer of concave ``f`` on ``[lo, hi]``.

    ``f`` maps an array of abscissae to an array of values.  Runs a fixed
    number of steps so the bracket shrinks to ``tol * (hi - lo)``; the lower
    end is compared at the end since optima often sit at zero.
    """
    lo = np.array(lo, dtype=float)
    hi = np.array(hi, dtype=float)
    a, b = lo.copy(), hi.copy()
    n = max(1, int(math.ceil(math.log(tol) / math.log(INV_PHI))))
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(n):
        left = fc >= fd
        # keep [a, d] where the left probe wins, [c, b] otherwise
        b = np.where(left, d, b)
        a = np.where(left, a, c)
        new_c = b - INV_PHI * (b - a)
        new_d = a + INV_PHI * (b - a)
        c_next = np.where(left, new_c, d)
        d_next = np.where(left, c, new_d)
        probe = np.where(left, c_next, d_next)
        fp = f(probe)
        fc, fd = np.where(left, fp, fd), np.where(left, fc, fp)
        c, d = c_next, d_next
    x = 0.5 * (a + b)
    fx, flo = f(x), f(lo)
    return np.where(flo > fx, lo, x)


@dataclass
class DualOutcome:
    p_a: np.ndarray
    p_b: np.ndarray
    p_r: np.ndarray
    lam: float
    iterations: int
    converged: bool


def _weighted_budget(p_a, p_b, p_r, delta):
    return float(np.mean(delta * (p_a + p_b) + (1.0 - delta) * p_r))


def solve_dual(inner, lam_max, total_power, delta, dual_tol, max_iter) -> DualOutcome:
    """Find the price at which the per-interval maximizers spend ``total_power``."""
    hi = float(lam_max)
    sol_hi = inner(hi)[:3]
    b_hi = _weighted_budget(*sol_hi, delta)
    lo = hi
    sol_lo, b_lo = sol_hi, b_hi
    it = 0
    # expand downward until the budget is reached
    while b_lo < total_power:
        if it >= max_iter:
            return DualOutcome(*sol_lo, lam=lo, iterations=it, converged=False)
        hi, sol_hi, b_hi = lo, sol_lo, b_lo
        lo = lo / 2.0
        sol_lo = inner(lo)[:3]
        b_lo = _weighted_budget(*sol_lo, delta)
        it += 1

    converged = False
    while True:
        if b_lo - b_hi <= dual_tol * total_power or hi - lo <= 4 * np.finfo(float).eps * hi:
            converged = True
            break
        if it >= max_iter:
            break
        mid = math.sqrt(lo * hi)
        sol_mid = inner(mid)[:3]
        b_mid = _weighted_budget(*sol_mid, delta)
        it += 1
        if b_mid >= total_power:
            lo, sol_lo, b_lo = mid, sol_mid, b_mid
        else:
            hi, sol_hi, b_hi = mid, sol_mid, b_mid

    if b_lo > b_hi:
        theta = (total_power - b_hi) / (b_lo - b_hi)
        theta = min(max(theta, 0.0), 1.0)
    else:
        theta = 1.0
    p_a, p_b, p_r = (h + theta * (l - h) for h, l in zip(sol_hi, sol_lo))
    return DualOutcome(np.asarray(p_a), np.asarray(p_b), np.asarray(p_r),
                       lam=math.sqrt(lo * hi), iterations=it, converged=converged)
