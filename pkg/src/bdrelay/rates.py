"""Scalar rate primitives in bits.

``lattice_rate_d`` is the upper concave envelope of ``0.5*log2(1 + 2x)`` and
``log2(0.5 + x)``.  The two branches share a common tangent that touches the
first at ``(e - 1)/2`` and the second at ``e - 1/2``; the constants below are
frozen and checked against a numerical hull in the test suite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "RatePair",
    "EnvelopeBreakpoints",
    "capacity_c",
    "highsnr_c",
    "lattice_rate_d",
    "lattice_rate_d_prime",
    "lattice_rate_d_inverse",
    "lattice_rate_argmax",
    "uce_breakpoints",
    "ENVELOPE_X1",
    "ENVELOPE_X2",
    "ENVELOPE_SLOPE",
]

LN2 = math.log(2.0)

ENVELOPE_X1 = (math.e - 1.0) / 2.0
ENVELOPE_X2 = math.e - 0.5
ENVELOPE_SLOPE = 1.0 / (math.e * LN2)
_Y1 = 0.5 * math.log2(1.0 + 2.0 * ENVELOPE_X1)
_Y2 = math.log2(0.5 + ENVELOPE_X2)


@dataclass(frozen=True)
class RatePair:
    """Directional rates ``A -> B`` and ``B -> A`` in bits per channel use."""

    r_ab: float
    r_ba: float

    @property
    def total(self) -> float:
        return self.r_ab + self.r_ba


@dataclass(frozen=True)
class EnvelopeBreakpoints:
    x1: float
    x2: float
    slope: float


def uce_breakpoints() -> EnvelopeBreakpoints:
    return EnvelopeBreakpoints(ENVELOPE_X1, ENVELOPE_X2, ENVELOPE_SLOPE)


def _check_nonneg(x, name="x"):
    arr = np.asarray(x, dtype=float)
    if np.any(np.isnan(arr)) or np.any(arr < 0):
        raise ValueError(f"{name} must be >= 0")
    return arr


def _out(arr, scalar):
    return float(arr) if scalar else arr


def capacity_c(x):
    """``log2(1 + x)`` for ``x >= 0``."""
    arr = _check_nonneg(x)
    return _out(np.log2(1.0 + arr), arr.ndim == 0)


def highsnr_c(x):
    """``log2(x)`` for ``x > 0``; negative below 1, meaningful only at high SNR."""
    arr = np.asarray(x, dtype=float)
    if np.any(np.isnan(arr)) or np.any(arr <= 0):
        raise ValueError("x must be > 0")
    return _out(np.log2(arr), arr.ndim == 0)


def lattice_rate_d(x):
    arr = _check_nonneg(x)
    with np.errstate(divide="ignore", invalid="ignore"):
        left = 0.5 * np.log2(1.0 + 2.0 * arr)
        right = np.log2(0.5 + arr)
    mid = _Y1 + ENVELOPE_SLOPE * (arr - ENVELOPE_X1)
    out = np.where(arr <= ENVELOPE_X1, left, np.where(arr >= ENVELOPE_X2, right, mid))
    return _out(out, arr.ndim == 0)


def lattice_rate_d_prime(x):
    """Derivative of :func:`lattice_rate_d` (continuous, non-increasing)."""
    arr = _check_nonneg(x)
    left = 1.0 / ((1.0 + 2.0 * arr) * LN2)
    right = 1.0 / ((0.5 + arr) * LN2)
    out = np.where(arr <= ENVELOPE_X1, left,
                   np.where(arr >= ENVELOPE_X2, right, ENVELOPE_SLOPE))
    return _out(out, arr.ndim == 0)


def lattice_rate_d_inverse(y):
    """Inverse of :func:`lattice_rate_d` on ``y >= 0``."""
    arr = _check_nonneg(y, "y")
    left = (np.exp2(2.0 * arr) - 1.0) / 2.0
    right = np.exp2(arr) - 0.5
    mid = ENVELOPE_X1 + (arr - _Y1) / ENVELOPE_SLOPE
    out = np.where(arr <= _Y1, left, np.where(arr >= _Y2, right, mid))
    return _out(out, arr.ndim == 0)


def lattice_rate_argmax(price):
    """Maximizer over ``x >= 0`` of ``D(x) - price * x`` (elementwise).

    On the straight segment, where ``price`` equals the envelope slope, the
    maximizer is not unique and the left end ``x1`` is returned.
    """
    p = np.asarray(price, dtype=float)
    with np.errstate(divide="ignore"):
        inv = 1.0 / (p * LN2)
    left = np.maximum((inv - 1.0) / 2.0, 0.0)
    right = inv - 0.5
    out = np.where(p >= ENVELOPE_SLOPE, left, right)
    out = np.where(p == ENVELOPE_SLOPE, ENVELOPE_X1, out)
    return _out(out, p.ndim == 0)
