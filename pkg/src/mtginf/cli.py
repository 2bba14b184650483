"""Command line entry point: ``python -m mtginf <subcommand>``."""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .errors import ConfigError, InvalidParameter, UnsupportedRate
from .experiment import PRESETS, load_spec, preset, rmse_vs_n, run, write_records, write_summary
from .kernels import make_J, make_L
from .rates import rate_from_config, validate_assumptions


def _spec(args):
    if bool(args.config) == bool(args.preset):
        raise ConfigError("give exactly one of --config or --preset")
    spec = load_spec(args.config) if args.config else preset(args.preset)
    if args.seed is not None:
        spec = replace(spec, seed=args.seed)
    if getattr(args, "replications", None):
        spec = replace(spec, replications=args.replications)
    return spec


def _out(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_run(args) -> int:
    spec = _spec(args)
    records, summary = run(spec, threads=args.threads)
    out = _out(args)
    write_records(records, out / f"{spec.scenario}_records.csv", timing=args.timing)
    write_summary(summary, out / f"{spec.scenario}_summary.json")
    for t in summary.targets:
        print(f"{t.target:>8}  mean={t.mean:.4f}  sd={t.sd:.4f}  rmse={t.rmse:.4f}  reps={t.n_reps}")
    return 0


def cmd_rmse_curve(args) -> int:
    spec = _spec(args)
    n_list = [int(x) for x in args.n_list.split(",")]
    curve = rmse_vs_n(spec, n_list, replications=args.replications or 50, threads=args.threads)
    out = _out(args)
    rows = [{"n": n, "rmse": r} for n, r in curve]
    with open(out / f"{spec.scenario}_rmse_curve.json", "w") as fh:
        json.dump({"scenario": spec.scenario, "curve": rows}, fh, indent=2)
        fh.write("\n")
    for n, r in curve:
        print(n, " ".join(f"{k}={v:.4f}" for k, v in r.items()))
    return 0


def cmd_dump_kernel(args) -> int:
    rate = _rate(args)
    ts = np.linspace(args.t_min, args.t_max, args.points)
    if args.kind == "L":
        kernel = make_L(rate, args.h, table_range=(args.t_min, args.t_max))
    else:
        kernel = make_J(rate, args.b, args.h, args.x1, table_range=(min(0.0, args.t_min), args.t_max))
    out = _out(args)
    dest = out / f"kernel_{args.kind}_h{args.h:g}.csv"
    kernel.dump_csv(ts, dest)
    print(dest)
    return 0


def cmd_validate_rate(args) -> int:
    report = validate_assumptions(_rate(args))
    print(report.summary())
    return 0 if report.ok else 1


def _rate(args):
    if args.rate:
        return rate_from_config(json.loads(args.rate))
    spec = _spec(args)
    return rate_from_config(spec.rate)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="mtginf", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, out_default="results"):
        sp.add_argument("--config", help="JSON experiment config")
        sp.add_argument("--preset", choices=sorted(PRESETS))
        sp.add_argument("--seed", type=int, help="override the master seed")
        sp.add_argument("--out", default=out_default, help="output directory")
        sp.add_argument("--threads", type=int, default=1)

    sp = sub.add_parser("run", help="run an experiment")
    common(sp)
    sp.add_argument("--replications", type=int)
    sp.add_argument("--timing", action="store_true", help="record wall time per replication")
    sp.set_defaults(func=cmd_run)

    sp = sub.add_parser("rmse-curve", help="RMSE against the number of paths")
    common(sp)
    sp.add_argument("--n-list", default="25,50,100,200")
    sp.add_argument("--replications", type=int)
    sp.set_defaults(func=cmd_rmse_curve)

    sp = sub.add_parser("dump-kernel", help="tabulate L_h or J_b to CSV")
    common(sp)
    sp.add_argument("--rate", help='rate JSON, e.g. {"kind":"constant","params":{"lambda0":1}}')
    sp.add_argument("--kind", choices=["L", "J"], default="L")
    sp.add_argument("--h", type=float, default=0.25)
    sp.add_argument("--b", type=float, default=25.0)
    sp.add_argument("--x1", type=float, default=0.0)
    sp.add_argument("--t-min", type=float, default=-5.0)
    sp.add_argument("--t-max", type=float, default=5.0)
    sp.add_argument("--points", type=int, default=1001)
    sp.set_defaults(func=cmd_dump_kernel)

    sp = sub.add_parser("validate-rate", help="check a rate against the deconvolution assumptions")
    common(sp)
    sp.add_argument("--rate", help="rate JSON")
    sp.set_defaults(func=cmd_validate_rate)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, InvalidParameter, UnsupportedRate) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
