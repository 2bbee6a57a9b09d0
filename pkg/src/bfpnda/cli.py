"""Command-line entry point: ``bfpnda solve|oracle|bench``."""

import argparse
import sys

from . import harness
from .errors import BfpError


def _print_reports(label, reports):
    for rep in reports:
        status = "converged" if rep.converged else "NOT converged"
        print(f"{label} {rep.method}: {rep.iterations} iterations, {status}, "
              f"{rep.wall_seconds:.3f} s")


def _solve(args, method=None):
    cfg = harness.load_config(args.config)
    if method is not None:
        cfg = harness.RunConfig(**{**cfg.__dict__, "method": method})
    reports = harness.run_case(cfg, args.output_dir)
    _print_reports(cfg.label, reports)
    return 0 if all(r.converged for r in reports) else 1


def _bench(args):
    rows, ok = harness.run_table1_bench(args.output_dir)
    for row in rows:
        print(f"{row['kernel']} B={row['B']:>2}: SI {row['si_iterations']:>5} "
              f"(ref {row['ref_si_iterations']}), NDA {row['nda_iterations']:>4} "
              f"(ref {row['ref_nda_iterations']}) {row['pass']}")
    return 0 if ok else 1


def build_parser():
    parser = argparse.ArgumentParser(prog="bfpnda", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    solve = sub.add_parser("solve", help="run one configured case")
    solve.add_argument("--config", required=True)
    solve.add_argument("--output-dir")

    oracle = sub.add_parser("oracle", help="dense direct reference solve of one case")
    oracle.add_argument("--config", required=True)
    oracle.add_argument("--output-dir")

    bench = sub.add_parser("bench", help="benchmark matrices")
    bench.add_argument("suite", choices=["table1"])
    bench.add_argument("--output-dir", required=True)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        if args.command == "solve":
            return _solve(args)
        if args.command == "oracle":
            return _solve(args, method="oracle")
        return _bench(args)
    except (BfpError, OSError) as exc:
        print(f"bfpnda: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
