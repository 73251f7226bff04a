"""Command-line entry point: ``bdrelay <subcommand> [flags]``.

Flags override values from ``--config FILE`` (a JSON object keyed by flag
name without dashes, e.g. ``{"L": 100, "power_db_range": "0:30:2"}``), which
override built-in defaults.  The resolved settings go into the output header.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .channel import render_ensemble, sample_rayleigh
from .closed_form import allocate_ach_highsnr, allocate_ub_highsnr
from .experiments import (SCHEMES, ExperimentSpec, parse_db_range, render_compare,
                          run_compare, run_gap, run_lattice_sim)
from .tables import base_metadata, render_table, write_text

DEFAULTS = {
    "L": 100,
    "seed": 7,
    "variance": 1.0,
    "delta": 0.5,
    "power_db_range": "0:30:2",
    "schemes": ",".join(SCHEMES),
    "out": None,
    "format": "csv",
    "workers": 1,
    "grid_min": 1e-3,
    "grid_max": 1e3,
    "n_points": 10_000,
    "snr_db_range": "0:30:3",
    "M": 4,
    "n_symbols": 100_000,
    "h_a": "1",
    "h_b": "1",
    "relay_margin": 1.0,
    "noiseless": False,
}


def _common(p, *names):
    if "L" in names:
        p.add_argument("--L", type=int, help="number of coherence intervals")
    if "seed" in names:
        p.add_argument("--seed", type=int, help="RNG seed")
    if "variance" in names:
        p.add_argument("--variance", type=float, help="E|h|^2 of the Rayleigh gains")
    if "delta" in names:
        p.add_argument("--delta", type=float, help="MAC time fraction")
    if "workers" in names:
        p.add_argument("--workers", type=int, help="parallel worker processes")
    if "format" in names:
        p.add_argument("--format", choices=("csv", "json"))
    p.add_argument("--out", help="output path (default: stdout)")
    p.add_argument("--config", help="JSON file with default flag values")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bdrelay", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"bdrelay {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("compare", help="exchange rate of each scheme across a power sweep")
    _common(p, "L", "seed", "variance", "delta", "workers", "format")
    p.add_argument("--power-db-range", dest="power_db_range",
                   help="START:STOP:STEP in dB, inclusive, or a single value")
    p.add_argument("--schemes", help=f"comma-separated subset of {','.join(SCHEMES)}")

    p = sub.add_parser("gap", help="high-SNR gap between the two closed-form allocations")
    _common(p, "format")
    p.add_argument("--grid-min", dest="grid_min", type=float)
    p.add_argument("--grid-max", dest="grid_max", type=float)
    p.add_argument("--n-points", dest="n_points", type=int)

    p = sub.add_parser("alloc", help="print a closed-form allocation")
    p.add_argument("kappa_sq", type=float)
    p.add_argument("power", type=float)
    p.add_argument("scheme", choices=("upper_bound", "achievable", "lattice_achievable"))

    p = sub.add_parser("lattice-sim", help="symbol error rates of the lattice chain")
    _common(p, "seed", "workers", "format")
    p.add_argument("--snr-db-range", dest="snr_db_range")
    p.add_argument("--M", type=int, help="fine lattice order per real dimension")
    p.add_argument("--n-symbols", dest="n_symbols", type=int)
    p.add_argument("--h-a", dest="h_a", help="complex gain, e.g. 0.8+0.3j")
    p.add_argument("--h-b", dest="h_b")
    p.add_argument("--relay-margin", dest="relay_margin", type=float,
                   help="relay power over the decodability floor")
    p.add_argument("--noiseless", action="store_true", default=None)

    p = sub.add_parser("sample-channels", help="export a Rayleigh ensemble")
    _common(p, "L", "seed", "variance")
    return parser


def _resolve(args) -> dict:
    cfg = dict(DEFAULTS)
    if getattr(args, "config", None):
        path = Path(args.config)
        try:
            loaded = json.loads(path.read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise SystemExit(f"bdrelay: cannot read config {path}: {exc}")
        cfg.update({k.replace("-", "_"): v for k, v in loaded.items()})
    for key, value in vars(args).items():
        if value is not None and key not in ("command", "config"):
            cfg[key] = value
    return cfg


def _fail(rows) -> int:
    failures = [{k: r[k] for k in ("P_dB", "scheme", "status")}
                for r in rows if r["status"] != "ok"]
    if failures:
        sys.stderr.write(json.dumps({"failures": failures}) + "\n")
        return 1
    return 0


def _cmd_compare(cfg) -> int:
    schemes = cfg["schemes"]
    if isinstance(schemes, str):
        schemes = [s.strip() for s in schemes.split(",") if s.strip()]
    spec = ExperimentSpec(schemes=schemes, L=cfg["L"], seed=cfg["seed"],
                          variance=cfg["variance"], delta=cfg["delta"],
                          power_db=parse_db_range(str(cfg["power_db_range"])),
                          out=cfg["out"], format=cfg["format"], workers=cfg["workers"])
    meta, rows = run_compare(spec)
    meta["resolved"] = {k: cfg[k] for k in ("L", "seed", "variance", "delta",
                                            "power_db_range", "schemes", "format")}
    main, alloc = render_compare(meta, rows, spec.format)
    write_text(main, spec.out)
    if alloc is not None and spec.out not in (None, "-"):
        out = Path(spec.out)
        write_text(alloc, out.with_name(out.stem + ".alloc.csv"))
    return _fail(rows)


def _cmd_gap(cfg) -> int:
    profile, meta, rows = run_gap(cfg["grid_min"], cfg["grid_max"], cfg["n_points"])
    write_text(render_table(("kappa_sq", "gap_bits"), rows, meta, cfg["format"]), cfg["out"])
    sys.stderr.write(f"eta = {profile.eta:.6f} bits per complex MAC channel use "
                     f"({profile.eta_per_channel_use:.6f} per channel use), "
                     f"argmax kappa^2 = {profile.argmax_kappa_sq:.6g}\n")
    return 0


def format_allocation(alloc) -> str:
    return f"P_a={alloc.p_a:.10g} P_b={alloc.p_b:.10g} P_r={alloc.p_r:.10g}"


def _cmd_alloc(args) -> int:
    fn = allocate_ub_highsnr if args.scheme == "upper_bound" else allocate_ach_highsnr
    print(format_allocation(fn(args.kappa_sq, args.power)))
    return 0


def _cmd_lattice_sim(cfg) -> int:
    meta, rows = run_lattice_sim(parse_db_range(str(cfg["snr_db_range"])),
                                 h_a=complex(str(cfg["h_a"]).replace(" ", "")),
                                 h_b=complex(str(cfg["h_b"]).replace(" ", "")),
                                 M=cfg["M"], n_symbols=cfg["n_symbols"], seed=cfg["seed"],
                                 relay_margin=cfg["relay_margin"],
                                 noiseless=bool(cfg["noiseless"]), workers=cfg["workers"])
    cols = ("snr_db", "relay_ser", "end_to_end_ser_a", "end_to_end_ser_b")
    write_text(render_table(cols, rows, meta, cfg["format"]), cfg["out"])
    return 0


def _cmd_sample(cfg) -> int:
    ens = sample_rayleigh(cfg["L"], cfg["seed"], cfg["variance"])
    header = base_metadata("sample-channels")
    header.pop("command")
    write_text(render_ensemble(ens, header=header), cfg["out"])
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "alloc":
            return _cmd_alloc(args)
        cfg = _resolve(args)
        handler = {"compare": _cmd_compare, "gap": _cmd_gap,
                   "lattice-sim": _cmd_lattice_sim, "sample-channels": _cmd_sample}
        return handler[args.command](cfg)
    except (ValueError, OSError) as exc:
        parser.exit(2, f"bdrelay: error: {exc}\n")


if __name__ == "__main__":
    sys.exit(main())
