"""Sweeps behind the command-line tool.

Rows are computed in worker processes when ``workers > 1``; results are
always emitted in sweep order, so outputs do not depend on the worker count.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .achievable import (evaluate_achievable_objective, evaluate_af_rate, solve_achievable,
                         solve_amplify_forward)
from .channel import ChannelRealization, sample_rayleigh
from .closed_form import gap_sweep
from .lattice import run_trial
from .tables import base_metadata, read_table, render_table
from .upper_bound import (ConvergenceError, PowerAllocation, SolverConfig,
                          evaluate_upper_objective, solve_upper_bound)

SCHEMES = ("upper_bound", "lattice_achievable", "amplify_forward")
COMPARE_COLUMNS = ("P_linear", "P_dB", "scheme", "rate_bits", "status")
ALLOC_COLUMNS = ("P_dB", "scheme", "interval", "p_a", "p_b", "p_r")
GAP_COLUMNS = ("kappa_sq", "gap_bits")
SER_COLUMNS = ("snr_db", "relay_ser", "end_to_end_ser_a", "end_to_end_ser_b")

_SOLVERS = {
    "upper_bound": (solve_upper_bound, evaluate_upper_objective),
    "lattice_achievable": (solve_achievable, evaluate_achievable_objective),
    "amplify_forward": (solve_amplify_forward, evaluate_af_rate),
}


def db_range(start: float, stop: float, step: float) -> list[float]:
    """Inclusive ``start:stop:step`` grid in dB."""
    if step <= 0 or stop < start:
        raise ValueError("dB range needs step > 0 and stop >= start")
    n = int(math.floor((stop - start) / step + 1e-9)) + 1
    return [float(start + i * step) for i in range(n)]


def parse_db_range(text: str) -> list[float]:
    parts = [float(p) for p in text.split(":")]
    if len(parts) == 1:
        return parts
    if len(parts) != 3:
        raise ValueError(f"expected START:STOP:STEP, got {text!r}")
    return db_range(*parts)


@dataclass
class ExperimentSpec:
    schemes: tuple = SCHEMES
    L: int = 100
    seed: int = 7
    variance: float = 1.0
    delta: float = 0.5
    power_db: list = field(default_factory=lambda: db_range(0, 30, 2))
    out: str | None = None
    format: str = "csv"
    workers: int = 1

    def __post_init__(self):
        self.schemes = tuple(self.schemes)
        if not self.schemes:
            raise ValueError("scheme set must not be empty")
        unknown = set(self.schemes) - set(SCHEMES)
        if unknown:
            raise ValueError(f"unknown schemes: {sorted(unknown)}")
        if not self.power_db:
            raise ValueError("power sweep must not be empty")
        if not 0 < self.delta < 1:
            raise ValueError("delta must lie in (0, 1)")
        if self.format not in ("csv", "json"):
            raise ValueError(f"format must be csv or json, got {self.format!r}")
        if int(self.L) != self.L or self.L < 1:
            raise ValueError("L must be a positive integer")


def _map(fn, items, workers):
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _compare_row(task):
    L, seed, variance, delta, p_db, scheme = task
    ensemble = sample_rayleigh(L, seed, variance)
    p_lin = 10.0 ** (p_db / 10.0)
    solve, _ = _SOLVERS[scheme]
    row = {"P_linear": p_lin, "P_dB": p_db, "scheme": scheme}
    try:
        res = solve(ensemble, SolverConfig(total_power=p_lin, delta=delta))
        status = "ok"
    except ConvergenceError as exc:
        res, status = exc.result, f"failed: {exc}"
    except (ValueError, FloatingPointError) as exc:
        row.update(rate_bits=float("nan"), status=f"failed: {exc}", allocation=None)
        return row
    row.update(rate_bits=res.rate_bits, status=status,
               allocation=res.allocation.powers.tolist())
    return row


def run_compare(spec: ExperimentSpec):
    """Solve every requested scheme on one seeded ensemble across the power sweep.

    Returns ``(metadata, rows)``; each row also carries its allocation.
    """
    tasks = [(spec.L, spec.seed, spec.variance, spec.delta, p, s)
             for p in spec.power_db for s in spec.schemes]
    rows = _map(_compare_row, tasks, spec.workers)
    meta = base_metadata("compare", L=spec.L, seed=spec.seed, variance=spec.variance,
                         delta=spec.delta, schemes=list(spec.schemes),
                         power_db=list(spec.power_db),
                         rng="numpy PCG64 via SeedSequence(seed)",
                         notes={"amplify_forward": "standard two-way AF model, reference curve"})
    return meta, rows


def render_compare(meta, rows, fmt):
    """Main table plus, for CSV, a companion allocation table."""
    if fmt == "json":
        return render_table(COMPARE_COLUMNS, rows, meta, "json"), None
    main = render_table(COMPARE_COLUMNS, rows, meta, "csv")
    alloc_rows = []
    for row in rows:
        for i, (p_a, p_b, p_r) in enumerate(row.get("allocation") or []):
            alloc_rows.append({"P_dB": row["P_dB"], "scheme": row["scheme"], "interval": i,
                               "p_a": p_a, "p_b": p_b, "p_r": p_r})
    return main, render_table(ALLOC_COLUMNS, alloc_rows, meta, "csv")


def reevaluate_compare(path, alloc_path=None) -> float:
    """Re-score recorded allocations; returns the largest absolute rate mismatch."""
    meta, rows = read_table(path)
    ensemble = sample_rayleigh(meta["L"], meta["seed"], meta["variance"])
    if alloc_path is not None:
        _, alloc_rows = read_table(alloc_path)
        grouped = {}
        for r in alloc_rows:
            grouped.setdefault((float(r["P_dB"]), r["scheme"]), []).append(
                (r["interval"], [r["p_a"], r["p_b"], r["p_r"]]))
        for row in rows:
            entries = sorted(grouped.get((float(row["P_dB"]), row["scheme"]), []))
            row["allocation"] = [v for _, v in entries] or None
    worst = 0.0
    for row in rows:
        if not row.get("allocation"):
            continue
        _, evaluate = _SOLVERS[row["scheme"]]
        rate = evaluate(ensemble, PowerAllocation(np.array(row["allocation"])), meta["delta"])
        worst = max(worst, abs(rate - float(row["rate_bits"])))
    return worst


def run_gap(grid_min=1e-3, grid_max=1e3, n_points=10_000):
    profile = gap_sweep(grid_min, grid_max, n_points)
    meta = base_metadata("gap", grid_min=grid_min, grid_max=grid_max, n_points=n_points,
                         eta=profile.eta, argmax_kappa_sq=profile.argmax_kappa_sq,
                         eta_per_channel_use=profile.eta_per_channel_use,
                         units="bits per complex MAC channel use")
    rows = [{"kappa_sq": k, "gap_bits": g}
            for k, g in zip(profile.grid.tolist(), profile.gap_bits.tolist())]
    return profile, meta, rows


def _ser_row(task):
    snr, h_a, h_b, M, n_symbols, seed, margin, noiseless = task
    r = ChannelRealization(h_a, h_b)
    p_lambda = 10.0 ** (snr / 10.0)
    rep = run_trial(r, p_lambda, margin * p_lambda / min(r.gain_a, r.gain_b),
                    n_symbols=n_symbols, noise_variance=0.0 if noiseless else 1.0,
                    seed=seed, M=M)
    return {"snr_db": float(snr), "relay_ser": rep.relay_ser,
            "end_to_end_ser_a": rep.ser_a, "end_to_end_ser_b": rep.ser_b}


def run_lattice_sim(snr_db, h_a=1.0, h_b=1.0, M=4, n_symbols=100_000, seed=0,
                    relay_margin=1.0, noiseless=False, workers=1):
    if relay_margin < 1.0:
        raise ValueError("relay margin below 1 violates broadcast decodability")
    tasks = [(s, h_a, h_b, M, n_symbols, seed, relay_margin, noiseless) for s in snr_db]
    rows = _map(_ser_row, tasks, workers)
    meta = base_metadata("lattice-sim", h_a=[complex(h_a).real, complex(h_a).imag],
                         h_b=[complex(h_b).real, complex(h_b).imag], M=M,
                         n_symbols=n_symbols, seed=seed, relay_margin=relay_margin,
                         noiseless=noiseless, snr_db=list(snr_db),
                         snr_definition="p_lambda / noise_variance")
    return meta, rows
