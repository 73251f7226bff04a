"""High-SNR closed-form power allocations at a half/half time split.

Both allocators accept scalars or numpy arrays for ``kappa_sq`` and return an
:class:`AllocationTriple` whose fields have the matching shape.  Under the
``log2(x)`` rate approximation the per-interval exchange-rate difference
between the two allocations is independent of ``P`` and of a common gain
scale, which is what :func:`gap_sweep` tabulates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .channel import ChannelRealization
from .rates import RatePair, capacity_c, highsnr_c

__all__ = [
    "AllocationTriple",
    "GapProfile",
    "GOLDEN_LOW",
    "GOLDEN_HIGH",
    "allocate_ub_highsnr",
    "allocate_ach_highsnr",
    "highsnr_exchange_rate",
    "exchange_rate_arrays",
    "gap_at",
    "gap_sweep",
    "save_gap_profile",
]

GOLDEN_LOW = (math.sqrt(5.0) - 1.0) / 2.0
GOLDEN_HIGH = (1.0 + math.sqrt(5.0)) / 2.0
DELTA = 0.5


@dataclass(frozen=True)
class AllocationTriple:
    p_a: float | np.ndarray
    p_b: float | np.ndarray
    p_r: float | np.ndarray

    def as_tuple(self):
        return (self.p_a, self.p_b, self.p_r)

    def budget(self, delta: float = DELTA):
        """Weighted power ``delta*(p_a + p_b) + (1 - delta)*p_r``."""
        return delta * (self.p_a + self.p_b) + (1.0 - delta) * self.p_r


def _validate(kappa_sq, P):
    k = np.asarray(kappa_sq, dtype=float)
    p = np.asarray(P, dtype=float)
    if np.any(~np.isfinite(k)) or np.any(k <= 0):
        raise ValueError("kappa_sq must be positive and finite")
    if np.any(~np.isfinite(p)) or np.any(p <= 0):
        raise ValueError("P must be positive and finite")
    return k, p, (k.ndim == 0 and p.ndim == 0)


def _pack(p_a, p_b, p_r, scalar):
    if scalar:
        return AllocationTriple(float(p_a), float(p_b), float(p_r))
    return AllocationTriple(p_a, p_b, p_r)


def allocate_ub_highsnr(kappa_sq, P) -> AllocationTriple:
    """Optimal cut-set-bound powers for gain ratio ``kappa_sq`` and budget ``P``."""
    k, p, scalar = _validate(kappa_sq, P)
    k4 = k * k
    d = 1.0 + k + k4
    case1 = k <= GOLDEN_LOW
    case3 = k > GOLDEN_HIGH
    p_a = np.where(case1, p, np.where(case3, p / (1.0 + k), 2.0 * p / d))
    p_b = np.where(case1, p * k / (1.0 + k), np.where(case3, p, 2.0 * p * k4 / d))
    p_r = np.where(case1, p / (1.0 + k),
                   np.where(case3, p * k / (1.0 + k), 2.0 * p * k / d))
    return _pack(p_a, p_b, p_r, scalar)


def allocate_ach_highsnr(kappa_sq, P) -> AllocationTriple:
    """Channel-inversion lattice scheme powers.

    Always satisfies ``kappa_sq * p_a == p_b`` and ``p_r == max(p_a, p_b)``.
    """
    k, p, scalar = _validate(kappa_sq, P)
    low = k <= 1.0
    denom = np.where(low, 2.0 + k, 1.0 + 2.0 * k)
    p_a = 2.0 * p / denom
    p_b = 2.0 * p * k / denom
    p_r = np.where(low, p_a, p_b)
    return _pack(p_a, p_b, p_r, scalar)


def exchange_rate_arrays(gain_a, gain_b, p_a, p_b, p_r, rate_fn="exact",
                         delta: float = DELTA):
    """Vectorised directional rates ``(r_ab, r_ba)`` of the cut-set objective."""
    if rate_fn == "exact":
        F = capacity_c
    elif rate_fn == "highsnr":
        F = highsnr_c
    else:
        raise ValueError(f"rate_fn must be 'exact' or 'highsnr', got {rate_fn!r}")
    gain_a = np.asarray(gain_a, dtype=float)
    gain_b = np.asarray(gain_b, dtype=float)
    r_ab = np.minimum(delta * F(gain_a * p_a), (1.0 - delta) * F(gain_b * p_r))
    r_ba = np.minimum(delta * F(gain_b * p_b), (1.0 - delta) * F(gain_a * p_r))
    return r_ab, r_ba


def highsnr_exchange_rate(realization: ChannelRealization, alloc: AllocationTriple,
                          rate_fn: str = "exact") -> RatePair:
    """Per-interval rates of ``alloc`` using ``log2(1+x)`` or ``log2(x)``."""
    if min(alloc.as_tuple()) < 0:
        raise ValueError("allocation must be non-negative")
    r_ab, r_ba = exchange_rate_arrays(realization.gain_a, realization.gain_b,
                                      *alloc.as_tuple(), rate_fn=rate_fn)
    return RatePair(float(r_ab), float(r_ba))


def gap_at(kappa_sq, P: float = 1.0):
    """High-SNR gap between the two allocations, in bits per overall channel use."""
    k = np.asarray(kappa_sq, dtype=float)
    ub = allocate_ub_highsnr(k, P)
    ach = allocate_ach_highsnr(k, P)
    ones = np.ones_like(k)
    ub_ab, ub_ba = exchange_rate_arrays(k, ones, *ub.as_tuple(), rate_fn="highsnr")
    ach_ab, ach_ba = exchange_rate_arrays(k, ones, *ach.as_tuple(), rate_fn="highsnr")
    return (ub_ab + ub_ba) - (ach_ab + ach_ba)


@dataclass(frozen=True)
class GapProfile:
    """``gap_bits`` is per complex MAC channel use (sum-rate gap over 0.5)."""

    grid: np.ndarray
    gap_bits: np.ndarray
    eta: float
    argmax_kappa_sq: float

    @property
    def eta_per_channel_use(self) -> float:
        return self.eta * DELTA


def gap_sweep(grid_min: float = 1e-3, grid_max: float = 1e3,
              n_points: int = 10_000) -> GapProfile:
    """Tabulate the high-SNR gap on a log-spaced ``kappa_sq`` grid.

    Only valid as an asymptotic statement; individual high-SNR rates can be
    negative at ``P = 1`` but their difference does not depend on ``P``.
    """
    if not (grid_min > 0 and grid_max > 0):
        raise ValueError("grid bounds must be positive")
    if not grid_min < grid_max:
        raise ValueError("grid_min must be below grid_max")
    if int(n_points) != n_points or n_points < 2:
        raise ValueError("n_points must be an integer >= 2")
    grid = np.logspace(math.log10(grid_min), math.log10(grid_max), int(n_points))
    gap = gap_at(grid) / DELTA
    # the profile is mirror symmetric; report the kappa_sq >= 1 peak on ties
    ties = np.flatnonzero(gap >= gap.max() - 1e-12)
    i = int(ties[-1])
    return GapProfile(grid=grid, gap_bits=gap, eta=float(gap[i]),
                      argmax_kappa_sq=float(grid[i]))


def save_gap_profile(profile: GapProfile, path, header: dict | None = None) -> None:
    lines = [f"# {k}: {v}" for k, v in (header or {}).items()]
    lines.append(f"# eta: {profile.eta!r}")
    lines.append(f"# argmax_kappa_sq: {profile.argmax_kappa_sq!r}")
    lines.append("kappa_sq,gap_bits")
    lines += [f"{k!r},{g!r}" for k, g in zip(profile.grid.tolist(), profile.gap_bits.tolist())]
    Path(path).write_text("\n".join(lines) + "\n")
