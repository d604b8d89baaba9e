"""Command line front end.

    plan run --scenario forest.toml --algo vf-pud --seeds 1,2,3 \
             --max-iters 500 --out results/ [--single-thread]
    plan summarize --in results/ --out summary.csv

Keeps module-level imports stdlib-only so --single-thread can pin the BLAS
thread pools through environment variables before numpy first loads.
"""

from __future__ import annotations

import argparse
import os
import sys

_THREAD_VARS = (
    "OMP_NUM_THREADS",
    "OPENBLAS_NUM_THREADS",
    "MKL_NUM_THREADS",
    "NUMEXPR_NUM_THREADS",
    "VECLIB_MAXIMUM_THREADS",
)


def _parse_args(argv):
    parser = argparse.ArgumentParser(prog="plan", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run algorithms over seeds on one scenario")
    run.add_argument("--scenario", required=True, help="scenario TOML file")
    run.add_argument(
        "--algo",
        required=True,
        action="append",
        help="algorithm name, repeatable or comma separated",
    )
    run.add_argument("--seeds", required=True, help="comma separated integer seeds")
    run.add_argument("--max-iters", type=int, default=None, help="iteration budget override")
    run.add_argument("--out", required=True, help="output directory")
    run.add_argument(
        "--single-thread",
        action="store_true",
        help="pin numerical libraries to one thread (effective at process start)",
    )

    summ = sub.add_parser("summarize", help="aggregate report.json files into a CSV")
    summ.add_argument("--in", dest="in_dir", required=True, help="directory with reports")
    summ.add_argument("--out", required=True, help="summary CSV path")
    return parser.parse_args(argv)


def main(argv=None) -> int:
    args = _parse_args(sys.argv[1:] if argv is None else argv)
    if getattr(args, "single_thread", False):
        for var in _THREAD_VARS:
            os.environ.setdefault(var, "1")

    from . import harness
    from .scenario import ScenarioError

    try:
        if args.command == "run":
            algos = [a for chunk in args.algo for a in chunk.split(",") if a]
            for algo in algos:
                if algo not in harness.ALGORITHMS:
                    print(
                        f"error: unknown algorithm {algo!r}, expected one of "
                        + ", ".join(harness.ALGORITHMS),
                        file=sys.stderr,
                    )
                    return 2
            try:
                seeds = [int(s) for s in args.seeds.split(",") if s]
            except ValueError:
                print(f"error: --seeds must be comma separated integers, got {args.seeds!r}", file=sys.stderr)
                return 2
            if not seeds:
                print("error: --seeds is empty", file=sys.stderr)
                return 2
            config = harness.ExperimentConfig(
                scenario_path=args.scenario,
                algorithms=algos,
                seeds=seeds,
                out_dir=args.out,
                max_iters=args.max_iters,
                single_thread=args.single_thread,
            )
            reports = harness.run_experiment(config)
            for r in reports:
                if r.error:
                    print(f"{r.algorithm} seed {r.seed}: FAILED ({r.error})")
                else:
                    print(
                        f"{r.algorithm} seed {r.seed}: rate {r.total_rate_bps / 1e6:.3f} Mbps, "
                        f"coverage {r.coverage:.2%}, {r.uav_count} UAVs, "
                        f"{r.iterations} iters, {r.wall_clock_s:.2f}s"
                    )
            print(f"wrote {args.out}/report.json")
        else:
            rows = harness.summarize(args.in_dir, args.out)
            print(f"wrote {args.out} ({len(rows)} groups)")
    except (ScenarioError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
