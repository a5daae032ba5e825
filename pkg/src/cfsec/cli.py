"""Command-line front end.

Subcommands: ``rates`` (single instance report), ``sweep`` (SNR grid with
random gains), ``theta-sweep`` (equal-norm two-user family), ``lemma1``
(quantizer-entropy table), ``codec-demo`` (encoder checks) and ``plot``
(CSV to SVG).  Sweeps render a figure next to the CSV unless --no-plot is
given.  CFSEC_OUTDIR sets the directory for default output names.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

from .channel import instance_from_spec, make_instance, snr_db_to_power
from .plotting import emit_plot
from .rates import rate_report
from .sweeps import (
    SweepConfig,
    default_out_dir,
    run_codec_demo,
    run_lemma1,
    run_snr_sweep,
    run_theta_sweep,
)

__all__ = ["main"]


def _parse_floats(text: str) -> list:
    try:
        return [float(tok) for tok in text.split(",") if tok != ""]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def _parse_ints(text: str) -> list:
    return [int(tok) for tok in text.split(",") if tok != ""]


def _parse_grid(text: str) -> list:
    """SNR grid: either a single value or start:stop:step (stop inclusive)."""
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise argparse.ArgumentTypeError("grid must be start:stop:step")
        start, stop, step = (float(p) for p in parts)
        if step <= 0.0:
            raise argparse.ArgumentTypeError("grid step must be positive")
        count = int(math.floor((stop - start) / step + 1e-9)) + 1
        if count < 1:
            raise argparse.ArgumentTypeError("grid is empty")
        return [start + i * step for i in range(count)]
    return [float(text)]


def _default_out(name: str) -> str:
    return os.path.join(default_out_dir(), name)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cfsec",
        description="Secure sum rates for the Gaussian wiretap MAC via integer-combination decoding",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_rates = sub.add_parser("rates", help="rate report for one instance")
    p_rates.add_argument("--h", type=_parse_floats, help="receiver gains, comma separated")
    p_rates.add_argument("--g", type=_parse_floats, help="eavesdropper gains, comma separated")
    p_rates.add_argument("--snr-db", type=float, help="per-user SNR in dB")
    p_rates.add_argument("--instance", help="JSON instance file (alternative to --h/--g)")
    p_rates.add_argument("--json", dest="json_out", help="also write the report to this path")
    p_rates.add_argument(
        "--enum-radius",
        type=int,
        default=None,
        help="cross-check the search against the boxed brute-force oracle of this radius (K <= 4)",
    )

    p_sweep = sub.add_parser("sweep", help="SNR sweep with random Gaussian gains")
    p_sweep.add_argument("--users", type=int, default=3)
    p_sweep.add_argument("--snr-db", type=_parse_grid, default=_parse_grid("0:60:2"))
    p_sweep.add_argument("--trials", type=int, default=50)
    p_sweep.add_argument("--seed", type=int, default=0)
    p_sweep.add_argument("--out", default=None)
    p_sweep.add_argument("--no-plot", action="store_true")

    p_theta = sub.add_parser("theta-sweep", help="equal-norm two-user gain-angle sweep")
    p_theta.add_argument("--snr-db", type=float, default=25.0)
    p_theta.add_argument("--points", type=int, default=512)
    p_theta.add_argument("--out", default=None)
    p_theta.add_argument("--no-plot", action="store_true")

    p_lemma = sub.add_parser("lemma1", help="quantizer-entropy bound table")
    p_lemma.add_argument("--n", type=_parse_ints, default=[1, 2, 4, 8, 16])
    p_lemma.add_argument("--users", type=int, default=2)
    p_lemma.add_argument("--trials", type=int, default=100_000)
    p_lemma.add_argument("--epsilon", type=float, default=0.1)
    p_lemma.add_argument("--gains", type=_parse_floats, default=None)
    p_lemma.add_argument("--snr-db", type=float, default=0.0)
    p_lemma.add_argument("--seed", type=int, default=0)
    p_lemma.add_argument("--out", default=None)
    p_lemma.add_argument("--no-plot", action="store_true")

    p_codec = sub.add_parser("codec-demo", help="scalar nested-lattice encoder checks")
    p_codec.add_argument("--n", type=int, default=1)
    p_codec.add_argument("--blocks", type=int, default=8)
    p_codec.add_argument("--gains", type=_parse_floats, default=None, help="eavesdropper gains")
    p_codec.add_argument("--h", type=_parse_floats, default=None, help="receiver gains")
    p_codec.add_argument("--snr-db", type=float, default=10.0)
    p_codec.add_argument("--grid-ratio", type=int, default=4)
    p_codec.add_argument("--trials", type=int, default=200)
    p_codec.add_argument("--seed", type=int, default=0)
    p_codec.add_argument("--out", default=None)

    p_plot = sub.add_parser("plot", help="render a sweep CSV to SVG")
    p_plot.add_argument("--csv", required=True)
    p_plot.add_argument("--out", default=None)
    p_plot.add_argument("--x", dest="x_col", default=None)
    p_plot.add_argument("--title", default=None)
    return parser


def _cmd_rates(args) -> int:
    if args.instance:
        inst = instance_from_spec(args.instance)
    else:
        if args.h is None or args.g is None or args.snr_db is None:
            raise SystemExit("rates needs --instance or all of --h, --g, --snr-db")
        inst = make_instance(args.h, args.g, snr_db_to_power(args.snr_db))
    report = rate_report(inst)
    payload = {
        "h": inst.h.tolist(),
        "g": inst.g.tolist(),
        "power": inst.power,
        "coefficient_rows": report.coefficients.rows.tolist(),
        "effective_norms": report.coefficients.norms.tolist(),
        "r_comb": report.r_comb.tolist(),
        "best_order_user_of_eq": list(report.best_pi.user_of_eq),
        "r_sum_secure": report.r_sum_secure,
        "allocation": report.allocation.tolist(),
        "r_baseline": report.r_baseline,
        "r_nonsecure_sum": report.r_nonsecure_sum,
        "capacity_sum": report.capacity_sum,
        "search_budget_exceeded": report.coefficients.budget_exceeded,
    }
    if args.enum_radius is not None:
        from .effective_matrix import effective_matrix
        from .channel import secrecy_power_policy
        from .lattice import brute_force_minima

        em = effective_matrix(inst, secrecy_power_policy(inst))
        oracle = brute_force_minima(em.gram, args.enum_radius)
        payload["oracle"] = {
            "radius": args.enum_radius,
            "norms": oracle.norms.tolist(),
            "rows": oracle.rows.tolist(),
            "matches_search": oracle.norms.tolist() == report.coefficients.norms.tolist(),
        }
    text = json.dumps(payload, indent=2)
    print(text)
    if args.json_out:
        with open(args.json_out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    return 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)

    if args.command == "rates":
        return _cmd_rates(args)

    if args.command == "sweep":
        cfg = SweepConfig(
            mode="snr-sweep",
            out=args.out or _default_out("snr_sweep.csv"),
            seed=args.seed,
            trials=args.trials,
            users=args.users,
            snr_db=args.snr_db,
        )
        path = run_snr_sweep(cfg)
        print(path)
        if not args.no_plot:
            print(emit_plot(path))
        return 0

    if args.command == "theta-sweep":
        cfg = SweepConfig(
            mode="theta-sweep",
            out=args.out or _default_out("theta_sweep.csv"),
            trials=1,
            users=2,
            snr_db=[args.snr_db],
            points=args.points,
        )
        path = run_theta_sweep(cfg)
        print(path)
        if not args.no_plot:
            print(emit_plot(path))
        return 0

    if args.command == "lemma1":
        gains = args.gains if args.gains is not None else [1.0] * args.users
        cfg = SweepConfig(
            mode="lemma1",
            out=args.out or _default_out("lemma1.csv"),
            seed=args.seed,
            trials=args.trials,
            users=len(gains),
            g=gains,
            snr_db=[args.snr_db],
            n_values=args.n,
            epsilon=args.epsilon,
        )
        path = run_lemma1(cfg)
        print(path)
        if not args.no_plot:
            print(emit_plot(path, series=["entropy_bits_per_dim", "ratio_bound_bits", "clean_bound_bits"]))
        return 0

    if args.command == "codec-demo":
        cfg = SweepConfig(
            mode="codec-demo",
            out=args.out or _default_out("codec_demo.json"),
            seed=args.seed,
            trials=args.trials,
            users=len(args.gains) if args.gains else 2,
            h=args.h,
            g=args.gains,
            snr_db=[args.snr_db],
            blocks=args.blocks,
            n=args.n,
            grid_ratio=args.grid_ratio,
        )
        path = run_codec_demo(cfg)
        print(path)
        return 0

    if args.command == "plot":
        print(emit_plot(args.csv, out_path=args.out, x_col=args.x_col, title=args.title))
        return 0

    raise SystemExit(f"unknown command {args.command!r}")


if __name__ == "__main__":
    sys.exit(main())
