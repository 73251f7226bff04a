"""Block-fading channel realizations.

Gains are drawn from numpy's ``PCG64`` bit generator seeded through
``SeedSequence(seed)``.  The ensemble stream is a single ``(L, 4)`` array of
standard normals laid out row by row as ``re(h_a), im(h_a), re(h_b), im(h_b)``,
scaled by ``sqrt(variance / 2)``.  A draw with ``|h| < 1e-12`` is replaced by
values from a second stream spawned from the same seed sequence, so the
result is still a pure function of ``(L, seed, variance)``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, Sequence

import numpy as np

__all__ = [
    "ChannelRealization",
    "FadingEnsemble",
    "sample_rayleigh",
    "kappa_sq",
    "render_ensemble",
    "save_ensemble",
    "load_ensemble",
]

MIN_GAIN = 1e-12


@dataclass(frozen=True)
class ChannelRealization:
    """Complex gains ``h_a`` (node A <-> relay) and ``h_b`` (node B <-> relay)
    for one coherence interval.  Channels are reciprocal."""

    h_a: complex
    h_b: complex

    def __post_init__(self):
        for name in ("h_a", "h_b"):
            value = complex(getattr(self, name))
            if not np.isfinite(value.real) or not np.isfinite(value.imag):
                raise ValueError(f"{name} must be finite, got {value!r}")
            if abs(value) == 0.0:
                raise ValueError(f"{name} must be non-zero")
            object.__setattr__(self, name, value)

    @property
    def gain_a(self) -> float:
        """Power gain ``|h_a|^2``."""
        return abs(self.h_a) ** 2

    @property
    def gain_b(self) -> float:
        """Power gain ``|h_b|^2``."""
        return abs(self.h_b) ** 2

    @property
    def kappa_sq(self) -> float:
        return self.gain_a / self.gain_b

    def swapped(self) -> "ChannelRealization":
        return ChannelRealization(self.h_b, self.h_a)


def kappa_sq(r: ChannelRealization) -> float:
    """Gain ratio ``|h_a|^2 / |h_b|^2``."""
    return r.kappa_sq


@dataclass(frozen=True)
class FadingEnsemble:
    """``L`` realizations stored as two complex arrays.

    Indexing and iteration yield :class:`ChannelRealization` objects; the
    solvers read :attr:`gain_a` / :attr:`gain_b` directly.
    """

    h_a: np.ndarray
    h_b: np.ndarray
    seed: int | None = None
    variance: float = 1.0
    _gains: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        h_a = np.array(self.h_a, dtype=np.complex128).reshape(-1)
        h_b = np.array(self.h_b, dtype=np.complex128).reshape(-1)
        if h_a.shape != h_b.shape:
            raise ValueError("h_a and h_b must have the same length")
        if h_a.size == 0:
            raise ValueError("ensemble must contain at least one realization")
        if not (np.all(np.isfinite(h_a)) and np.all(np.isfinite(h_b))):
            raise ValueError("gains must be finite")
        if np.any(h_a == 0) or np.any(h_b == 0):
            raise ValueError("gains must be non-zero")
        if not self.variance > 0:
            raise ValueError("variance must be positive")
        h_a.setflags(write=False)
        h_b.setflags(write=False)
        object.__setattr__(self, "h_a", h_a)
        object.__setattr__(self, "h_b", h_b)
        g_a = np.abs(h_a) ** 2
        g_b = np.abs(h_b) ** 2
        g_a.setflags(write=False)
        g_b.setflags(write=False)
        object.__setattr__(self, "_gains", (g_a, g_b))

    @classmethod
    def from_realizations(cls, realizations: Sequence[ChannelRealization],
                          seed: int | None = None,
                          variance: float = 1.0) -> "FadingEnsemble":
        return cls(np.array([r.h_a for r in realizations]),
                   np.array([r.h_b for r in realizations]),
                   seed=seed, variance=variance)

    @classmethod
    def single(cls, h_a: complex, h_b: complex) -> "FadingEnsemble":
        return cls(np.array([h_a]), np.array([h_b]))

    def __len__(self) -> int:
        return self.h_a.size

    def __getitem__(self, i: int) -> ChannelRealization:
        return ChannelRealization(complex(self.h_a[i]), complex(self.h_b[i]))

    def __iter__(self) -> Iterator[ChannelRealization]:
        for i in range(len(self)):
            yield self[i]

    @property
    def realizations(self) -> list[ChannelRealization]:
        return list(self)

    @property
    def gain_a(self) -> np.ndarray:
        return self._gains[0]

    @property
    def gain_b(self) -> np.ndarray:
        return self._gains[1]

    @property
    def kappa_sq(self) -> np.ndarray:
        return self.gain_a / self.gain_b


def sample_rayleigh(L: int, seed: int, variance: float = 1.0) -> FadingEnsemble:
    """Draw ``L`` i.i.d. Rayleigh block-fading intervals.

    Each gain is circularly-symmetric complex Gaussian with
    ``E|h|^2 = variance``.
    """
    if int(L) != L or L < 1:
        raise ValueError(f"L must be a positive integer, got {L!r}")
    if not variance > 0:
        raise ValueError(f"variance must be positive, got {variance!r}")
    L = int(L)
    ss = np.random.SeedSequence(int(seed))
    main, spare = ss.spawn(2)
    scale = np.sqrt(variance / 2.0)
    raw = np.random.Generator(np.random.PCG64(main)).standard_normal((L, 4))
    gains = scale * (raw[:, 0::2] + 1j * raw[:, 1::2])

    bad = np.abs(gains) < MIN_GAIN * np.sqrt(variance)
    if np.any(bad):
        redraw = np.random.Generator(np.random.PCG64(spare))
        for idx in zip(*np.nonzero(bad)):
            while abs(gains[idx]) < MIN_GAIN * np.sqrt(variance):
                re, im = redraw.standard_normal(2)
                gains[idx] = scale * (re + 1j * im)
    return FadingEnsemble(gains[:, 0], gains[:, 1], seed=int(seed),
                          variance=float(variance))


def render_ensemble(ensemble: FadingEnsemble, header: dict | None = None) -> str:
    """One CSV row per interval: ``re_h_a,im_h_a,re_h_b,im_h_b``.

    Values use ``repr`` formatting so a reload is bit-exact.
    """
    lines = []
    meta = {"L": len(ensemble), "seed": ensemble.seed,
            "variance": ensemble.variance}
    if header:
        meta.update(header)
    for key, value in meta.items():
        lines.append(f"# {key}: {json.dumps(value, sort_keys=True)}")
    lines.append("re_h_a,im_h_a,re_h_b,im_h_b")
    for a, b in zip(ensemble.h_a, ensemble.h_b):
        lines.append(",".join(repr(float(v)) for v in (a.real, a.imag, b.real, b.imag)))
    return "\n".join(lines) + "\n"


def save_ensemble(ensemble: FadingEnsemble, path, header: dict | None = None) -> None:
    Path(path).write_text(render_ensemble(ensemble, header))


def load_ensemble(path) -> FadingEnsemble:
    """Inverse of :func:`save_ensemble`."""
    seed = None
    variance = 1.0
    rows = []
    for line in Path(path).read_text().splitlines():
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            key, _, value = line[1:].partition(":")
            key, value = key.strip(), json.loads(value)
            if key == "seed" and value is not None:
                seed = int(value)
            elif key == "variance":
                variance = float(value)
            continue
        if line.startswith("re_h_a"):
            continue
        rows.append([float(v) for v in line.split(",")])
    if not rows:
        raise ValueError(f"{path}: no channel rows found")
    arr = np.array(rows)
    if arr.shape[1] != 4:
        raise ValueError(f"{path}: expected 4 columns, got {arr.shape[1]}")
    return FadingEnsemble(arr[:, 0] + 1j * arr[:, 1], arr[:, 2] + 1j * arr[:, 3],
                          seed=seed, variance=variance)
