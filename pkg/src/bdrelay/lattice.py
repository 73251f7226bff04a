"""Symbol-level simulation of the channel-inversion nested-lattice exchange.

Scalar lattices per real dimension: coarse ``q Z`` and fine ``(q/M) Z``.
Message ``m`` maps to the representative ``m q / M`` in ``[0, q)``; modulo
outputs live in ``[-q/2, q/2)``.  With ``q = sqrt(6 P_L)`` a uniformly
dithered complex symbol has power ``P_L``.

Random streams come from ``SeedSequence(seed)``: one child per chunk of
symbols, and within a chunk one grandchild each for the two messages, the
three dithers and the three noise sources.  Reports of chunks add up.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields

import numpy as np

from .channel import ChannelRealization

__all__ = [
    "ScalarNestedLattice",
    "MessageSymbol",
    "TrialReport",
    "mod_coarse",
    "encode_node",
    "relay_decode",
    "relay_broadcast",
    "node_decode",
    "node_extract",
    "run_trial",
    "ser_sweep",
]

CHUNK = 1 << 16


@dataclass(frozen=True)
class ScalarNestedLattice:
    q: float
    M: int

    def __post_init__(self):
        if not (self.q > 0 and math.isfinite(self.q)):
            raise ValueError(f"q must be positive, got {self.q!r}")
        if int(self.M) != self.M or self.M < 2:
            raise ValueError(f"M must be an integer >= 2, got {self.M!r}")
        object.__setattr__(self, "M", int(self.M))

    @classmethod
    def calibrated(cls, p_lambda: float, M: int) -> "ScalarNestedLattice":
        """Coarse spacing giving complex second moment ``p_lambda``."""
        if not p_lambda > 0:
            raise ValueError("p_lambda must be positive")
        return cls(math.sqrt(6.0 * p_lambda), M)

    @property
    def fine_step(self) -> float:
        return self.q / self.M

    @property
    def second_moment(self) -> float:
        """Per real dimension, for a uniform dither over the coarse cell."""
        return self.q ** 2 / 12.0

    def point(self, m: "MessageSymbol"):
        """Complex fine-lattice representative of a message pair."""
        return (np.asarray(m.m_re) + 1j * np.asarray(m.m_im)) * self.fine_step

    def index(self, w) -> "MessageSymbol":
        """Nearest fine coset of each component of ``w``."""
        w = np.asarray(w)
        re = np.mod(np.rint(w.real / self.fine_step).astype(np.int64), self.M)
        im = np.mod(np.rint(w.imag / self.fine_step).astype(np.int64), self.M)
        return MessageSymbol(re, im)


@dataclass(frozen=True)
class MessageSymbol:
    """In-phase and quadrature message indices in ``[0, M)``; scalars or arrays."""

    m_re: int | np.ndarray
    m_im: int | np.ndarray

    def check(self, M: int) -> None:
        for v in (self.m_re, self.m_im):
            a = np.asarray(v)
            if np.any(a < 0) or np.any(a >= M):
                raise ValueError(f"message indices must lie in [0, {M})")

    def __eq__(self, other):
        if not isinstance(other, MessageSymbol):
            return NotImplemented
        return bool(np.array_equal(self.m_re, other.m_re)
                    and np.array_equal(self.m_im, other.m_im))

    __hash__ = None


def _mod_real(x, q):
    r = x - q * np.floor(x / q + 0.5)
    return np.where(r >= q / 2, r - q, np.where(r < -q / 2, r + q, r))


def mod_coarse(x, q: float):
    """Reduce into ``[-q/2, q/2)``, separately on real and imaginary parts."""
    if not q > 0:
        raise ValueError("q must be positive")
    arr = np.asarray(x)
    if not np.all(np.isfinite(arr)):
        raise ValueError("x must be finite")
    if np.iscomplexobj(arr):
        out = _mod_real(arr.real, q) + 1j * _mod_real(arr.imag, q)
        return complex(out) if out.ndim == 0 else out
    out = _mod_real(arr.astype(float), q)
    return float(out) if out.ndim == 0 else out


def encode_node(t, u, h, q: float):
    """Dithered modulo symbol divided by the channel gain (channel inversion)."""
    h = np.asarray(h, dtype=np.complex128)
    if np.any(h == 0):
        raise ValueError("channel gain must be non-zero")
    out = mod_coarse(np.asarray(t, dtype=np.complex128) - u, q) / h
    return complex(out) if np.ndim(out) == 0 else out


def relay_decode(y, u_a, u_b, lattice: ScalarNestedLattice) -> MessageSymbol:
    """Remove both dithers and quantize the sum to its fine coset."""
    w = mod_coarse(np.asarray(y, dtype=np.complex128) + u_a + u_b, lattice.q)
    return lattice.index(w)


def relay_broadcast(t_r, u_r, lattice: ScalarNestedLattice, p_r: float, p_lambda: float,
                    min_gain: float = 1.0):
    """Scaled dithered modulo symbol from the relay.

    Requires ``min_gain * p_r >= p_lambda`` where ``min_gain`` is the weaker
    power gain towards the nodes; the default demands ``p_r >= p_lambda``.
    """
    if not p_lambda > 0:
        raise ValueError("p_lambda must be positive")
    if min_gain * p_r < p_lambda * (1 - 1e-12):
        raise ValueError(f"relay power {p_r!r} too low for lattice power {p_lambda!r}")
    out = math.sqrt(p_r / p_lambda) * mod_coarse(np.asarray(t_r, dtype=np.complex128) - u_r,
                                                 lattice.q)
    return complex(out) if np.ndim(out) == 0 else out


def node_decode(y, h, u_r, lattice: ScalarNestedLattice, p_r: float,
                p_lambda: float) -> MessageSymbol:
    """Undo the relay scaling and channel, remove the relay dither, quantize."""
    z = np.asarray(y, dtype=np.complex128) * math.sqrt(p_lambda / p_r) / h
    return lattice.index(mod_coarse(z + u_r, lattice.q))


def node_extract(t_r_hat: MessageSymbol, own: MessageSymbol, M: int) -> MessageSymbol:
    """Partner's message: relay sum minus own message, modulo ``M``."""
    return MessageSymbol(np.mod(np.asarray(t_r_hat.m_re) - own.m_re, M),
                         np.mod(np.asarray(t_r_hat.m_im) - own.m_im, M))


@dataclass
class TrialReport:
    n_symbols: int = 0
    relay_symbol_errors: int = 0
    end_to_end_errors_a: int = 0
    end_to_end_errors_b: int = 0
    empirical_tx_power_a: float = 0.0
    empirical_tx_power_b: float = 0.0
    empirical_tx_power_r: float = 0.0
    rx_power_a: float = 0.0
    rx_power_b: float = 0.0

    _POWERS = ("empirical_tx_power_a", "empirical_tx_power_b", "empirical_tx_power_r",
               "rx_power_a", "rx_power_b")

    def __add__(self, other: "TrialReport") -> "TrialReport":
        n = self.n_symbols + other.n_symbols
        out = TrialReport(n_symbols=n)
        for f in fields(self):
            a, b = getattr(self, f.name), getattr(other, f.name)
            if f.name in self._POWERS:
                value = (a * self.n_symbols + b * other.n_symbols) / n if n else 0.0
            elif f.name == "n_symbols":
                continue
            else:
                value = a + b
            setattr(out, f.name, value)
        return out

    @property
    def relay_ser(self) -> float:
        return self.relay_symbol_errors / self.n_symbols

    @property
    def ser_a(self) -> float:
        return self.end_to_end_errors_a / self.n_symbols

    @property
    def ser_b(self) -> float:
        return self.end_to_end_errors_b / self.n_symbols


def _awgn(rng, n, variance):
    if variance == 0:
        return np.zeros(n, dtype=np.complex128)
    s = math.sqrt(variance / 2.0)
    return s * (rng.standard_normal(n) + 1j * rng.standard_normal(n))


def _dither(rng, n, q):
    return rng.uniform(-q / 2, q / 2, n) + 1j * rng.uniform(-q / 2, q / 2, n)


def _errors(est: MessageSymbol, ref: MessageSymbol) -> int:
    return int(np.count_nonzero((est.m_re != ref.m_re) | (est.m_im != ref.m_im)))


def _run_chunk(r, p_lambda, p_r, lattice, n, noise_variance, seq) -> TrialReport:
    rngs = [np.random.Generator(np.random.PCG64(s)) for s in seq.spawn(8)]
    M, q = lattice.M, lattice.q
    m_a = MessageSymbol(rngs[0].integers(0, M, n), rngs[0].integers(0, M, n))
    m_b = MessageSymbol(rngs[1].integers(0, M, n), rngs[1].integers(0, M, n))
    u_a, u_b, u_r = (_dither(g, n, q) for g in rngs[2:5])

    # MAC phase
    x_a = encode_node(lattice.point(m_a), u_a, r.h_a, q)
    x_b = encode_node(lattice.point(m_b), u_b, r.h_b, q)
    rx_a, rx_b = r.h_a * x_a, r.h_b * x_b
    y_r = rx_a + rx_b + _awgn(rngs[5], n, noise_variance)
    t_r = relay_decode(y_r, u_a, u_b, lattice)
    true_sum = MessageSymbol(np.mod(m_a.m_re + m_b.m_re, M), np.mod(m_a.m_im + m_b.m_im, M))

    # broadcast phase, reciprocal channels
    x_r = relay_broadcast(lattice.point(t_r), u_r, lattice, p_r, p_lambda,
                          min(r.gain_a, r.gain_b))
    y_a = r.h_a * x_r + _awgn(rngs[6], n, noise_variance)
    y_b = r.h_b * x_r + _awgn(rngs[7], n, noise_variance)
    hat_b = node_extract(node_decode(y_a, r.h_a, u_r, lattice, p_r, p_lambda), m_a, M)
    hat_a = node_extract(node_decode(y_b, r.h_b, u_r, lattice, p_r, p_lambda), m_b, M)

    return TrialReport(
        n_symbols=n,
        relay_symbol_errors=_errors(t_r, true_sum),
        end_to_end_errors_a=_errors(hat_b, m_b),
        end_to_end_errors_b=_errors(hat_a, m_a),
        empirical_tx_power_a=float(np.mean(np.abs(x_a) ** 2)),
        empirical_tx_power_b=float(np.mean(np.abs(x_b) ** 2)),
        empirical_tx_power_r=float(np.mean(np.abs(x_r) ** 2)),
        rx_power_a=float(np.mean(np.abs(rx_a) ** 2)),
        rx_power_b=float(np.mean(np.abs(rx_b) ** 2)),
    )


def run_trial(realization: ChannelRealization, p_lambda: float, p_r: float,
              lattice: ScalarNestedLattice | None = None, n_symbols: int = 100_000,
              noise_variance: float = 1.0, seed: int = 0, M: int = 4) -> TrialReport:
    """MAC plus broadcast chain over ``n_symbols`` fresh dithers.

    Node powers are ``p_lambda / |h|^2`` by channel inversion.  ``p_r`` has to
    reach ``p_lambda / min(|h_a|^2, |h_b|^2)`` so both nodes see at least
    ``p_lambda`` from the relay.  Without ``lattice`` a calibrated one of
    order ``M`` is used.
    """
    if not p_lambda > 0:
        raise ValueError("p_lambda must be positive")
    g_min = min(realization.gain_a, realization.gain_b)
    if p_r < p_lambda / g_min * (1 - 1e-12):
        raise ValueError(f"p_r={p_r!r} below the decodability floor {p_lambda / g_min!r}")
    if int(n_symbols) != n_symbols or n_symbols < 1:
        raise ValueError("n_symbols must be a positive integer")
    if not noise_variance >= 0:
        raise ValueError("noise_variance must be non-negative")
    if lattice is None:
        lattice = ScalarNestedLattice.calibrated(p_lambda, M)
    n_symbols = int(n_symbols)
    n_chunks = -(-n_symbols // CHUNK)
    report = TrialReport()
    for i, seq in enumerate(np.random.SeedSequence(int(seed)).spawn(n_chunks)):
        n = min(CHUNK, n_symbols - i * CHUNK)
        report = report + _run_chunk(realization, p_lambda, p_r, lattice, n,
                                     noise_variance, seq)
    return report


def ser_sweep(snr_db, realization: ChannelRealization | None = None, M: int = 4,
              n_symbols: int = 100_000, seed: int = 0, relay_margin: float = 1.0,
              noiseless: bool = False):
    """Symbol error rates against ``snr = p_lambda / noise_variance``.

    Noise variance is fixed at 1 and every point reuses ``seed`` (common
    random numbers).  The relay transmits ``relay_margin`` times the
    decodability floor.  Returns a list of row dicts.
    """
    if realization is None:
        realization = ChannelRealization(1.0, 1.0)
    g_min = min(realization.gain_a, realization.gain_b)
    rows = []
    for snr in snr_db:
        p_lambda = 10.0 ** (snr / 10.0)
        rep = run_trial(realization, p_lambda, relay_margin * p_lambda / g_min,
                        n_symbols=n_symbols, noise_variance=0.0 if noiseless else 1.0,
                        seed=seed, M=M)
        rows.append({"snr_db": float(snr), "relay_ser": rep.relay_ser,
                     "end_to_end_ser_a": rep.ser_a, "end_to_end_ser_b": rep.ser_b})
    return rows
