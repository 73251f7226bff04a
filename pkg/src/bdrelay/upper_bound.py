"""Numerical solution of the cut-set upper bound at finite SNR.

For a budget price ``lam`` each interval maximizes

    min(d*C(g_a p_a), (1-d)*C(g_b p_r)) + min(d*C(g_b p_b), (1-d)*C(g_a p_r))
        - lam * (d*p_a + d*p_b + (1-d)*p_r)

With ``p_r`` fixed the two node powers decouple: each is the smaller of its
water-filling level and the power that balances its own min().  The remaining
one-dimensional problem in ``p_r`` is concave and is solved by golden-section
search.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from ._dual import ConvergenceError, golden_section_max, solve_dual
from .channel import ChannelRealization, FadingEnsemble
from .closed_form import AllocationTriple
from .rates import capacity_c

__all__ = [
    "SolverConfig",
    "PowerAllocation",
    "SolveResult",
    "ConvergenceError",
    "solve_upper_bound",
    "evaluate_upper_objective",
    "per_interval_subproblem",
]

LN2 = math.log(2.0)


@dataclass(frozen=True)
class SolverConfig:
    total_power: float
    delta: float = 0.5
    dual_tol: float = 1e-8
    inner_tol: float = 1e-10
    max_iter: int = 200

    def __post_init__(self):
        if not 0.0 < self.delta < 1.0:
            raise ValueError(f"delta must lie in (0, 1), got {self.delta!r}")
        if not (self.total_power > 0 and math.isfinite(self.total_power)):
            raise ValueError(f"total_power must be positive, got {self.total_power!r}")
        if not (self.dual_tol > 0 and self.inner_tol > 0):
            raise ValueError("tolerances must be positive")
        if int(self.max_iter) != self.max_iter or self.max_iter < 1:
            raise ValueError("max_iter must be a positive integer")


@dataclass(frozen=True)
class PowerAllocation:
    """Per-interval powers as an ``(L, 3)`` array of ``(p_a, p_b, p_r)``."""

    powers: np.ndarray

    def __post_init__(self):
        arr = np.array(self.powers, dtype=float)
        if arr.ndim != 2 or arr.shape[1] != 3:
            raise ValueError("powers must have shape (L, 3)")
        if np.any(arr < 0) or not np.all(np.isfinite(arr)):
            raise ValueError("powers must be finite and non-negative")
        arr.setflags(write=False)
        object.__setattr__(self, "powers", arr)

    @classmethod
    def from_columns(cls, p_a, p_b, p_r) -> "PowerAllocation":
        return cls(np.column_stack([np.ravel(p_a), np.ravel(p_b), np.ravel(p_r)]))

    def __len__(self):
        return self.powers.shape[0]

    def __getitem__(self, i) -> AllocationTriple:
        p_a, p_b, p_r = self.powers[i]
        return AllocationTriple(float(p_a), float(p_b), float(p_r))

    @property
    def p_a(self):
        return self.powers[:, 0]

    @property
    def p_b(self):
        return self.powers[:, 1]

    @property
    def p_r(self):
        return self.powers[:, 2]

    def budget(self, delta: float) -> float:
        return float(np.mean(delta * (self.p_a + self.p_b) + (1.0 - delta) * self.p_r))


@dataclass
class SolveResult:
    allocation: PowerAllocation
    rate_bits: float
    iterations: int
    dual_lambda: float
    scheme: str = "upper_bound"
    converged: bool = True
    metadata: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "scheme": self.scheme,
            "rate_bits": self.rate_bits,
            "dual_lambda": self.dual_lambda if math.isfinite(self.dual_lambda) else None,
            "iterations": self.iterations,
            "converged": self.converged,
            "allocation": self.allocation.powers.tolist(),
            **({"metadata": self.metadata} if self.metadata else {}),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_dict(cls, d: dict) -> "SolveResult":
        return cls(allocation=PowerAllocation(np.array(d["allocation"], dtype=float)),
                   rate_bits=float(d["rate_bits"]), iterations=int(d["iterations"]),
                   dual_lambda=float("nan" if d["dual_lambda"] is None else d["dual_lambda"]),
                   scheme=d.get("scheme", "upper_bound"),
                   converged=bool(d.get("converged", True)),
                   metadata=dict(d.get("metadata", {})))


def evaluate_upper_objective(ensemble: FadingEnsemble, allocation: PowerAllocation,
                             delta: float) -> float:
    """Average cut-set exchange rate of ``allocation`` in bits per channel use."""
    if len(allocation) != len(ensemble):
        raise ValueError(f"allocation has {len(allocation)} intervals, "
                         f"ensemble has {len(ensemble)}")
    g_a, g_b = ensemble.gain_a, ensemble.gain_b
    r_ab = np.minimum(delta * capacity_c(g_a * allocation.p_a),
                      (1 - delta) * capacity_c(g_b * allocation.p_r))
    r_ba = np.minimum(delta * capacity_c(g_b * allocation.p_b),
                      (1 - delta) * capacity_c(g_a * allocation.p_r))
    return float(np.mean(r_ab + r_ba))


def _node_powers(g_a, g_b, p_r, lam, delta):
    level = 1.0 / (lam * LN2)
    with np.errstate(over="ignore"):
        expo = (1.0 - delta) / delta
        bal_a = ((1.0 + g_b * p_r) ** expo - 1.0) / g_a
        bal_b = ((1.0 + g_a * p_r) ** expo - 1.0) / g_b
    p_a = np.minimum(np.maximum(level - 1.0 / g_a, 0.0), bal_a)
    p_b = np.minimum(np.maximum(level - 1.0 / g_b, 0.0), bal_b)
    return p_a, p_b


def _lagrangian(g_a, g_b, p_a, p_b, p_r, lam, delta):
    c_ar = (1 - delta) * np.log2(1.0 + g_b * p_r)
    c_br = (1 - delta) * np.log2(1.0 + g_a * p_r)
    rate = (np.minimum(delta * np.log2(1.0 + g_a * p_a), c_ar)
            + np.minimum(delta * np.log2(1.0 + g_b * p_b), c_br))
    return rate - lam * (delta * (p_a + p_b) + (1 - delta) * p_r)


def _inner(g_a, g_b, lam, delta, inner_tol):
    if not lam > 0:
        raise ValueError("lambda must be positive: at lambda=0 the budget is unbounded")

    def value_at(p_r):
        p_a, p_b = _node_powers(g_a, g_b, p_r, lam, delta)
        return _lagrangian(g_a, g_b, p_a, p_b, p_r, lam, delta)

    pr_max = np.full_like(g_a, 2.0 / (lam * LN2))
    p_r = golden_section_max(value_at, np.zeros_like(g_a), pr_max, inner_tol)
    p_a, p_b = _node_powers(g_a, g_b, p_r, lam, delta)
    return p_a, p_b, p_r, _lagrangian(g_a, g_b, p_a, p_b, p_r, lam, delta)


def per_interval_subproblem(realization: ChannelRealization, lam: float,
                            delta: float = 0.5, inner_tol: float = 1e-10):
    """Maximize one interval's Lagrangian at price ``lam``.

    Returns ``(AllocationTriple, value)``.
    """
    g_a = np.array([realization.gain_a])
    g_b = np.array([realization.gain_b])
    p_a, p_b, p_r, value = _inner(g_a, g_b, float(lam), delta, inner_tol)
    return AllocationTriple(float(p_a[0]), float(p_b[0]), float(p_r[0])), float(value[0])


def zero_power_price(ensemble: FadingEnsemble) -> float:
    """A price above which every interval allocates zero power."""
    return float(np.max(np.maximum(ensemble.gain_a, ensemble.gain_b))) / LN2 * (1 + 1e-12)


def solve_upper_bound(ensemble: FadingEnsemble, config: SolverConfig) -> SolveResult:
    """Maximize the average cut-set exchange rate under the weighted sum-power budget."""
    if len(ensemble) == 0:
        raise ValueError("empty ensemble")
    g_a, g_b = ensemble.gain_a, ensemble.gain_b
    out = solve_dual(lambda lam: _inner(g_a, g_b, lam, config.delta, config.inner_tol),
                     zero_power_price(ensemble), config.total_power, config.delta,
                     config.dual_tol, config.max_iter)
    alloc = PowerAllocation.from_columns(out.p_a, out.p_b, out.p_r)
    result = SolveResult(alloc, evaluate_upper_objective(ensemble, alloc, config.delta),
                         out.iterations, out.lam, scheme="upper_bound",
                         converged=out.converged)
    if not out.converged:
        raise ConvergenceError(f"price bisection did not converge in {config.max_iter} "
                               "iterations", result)
    return result
