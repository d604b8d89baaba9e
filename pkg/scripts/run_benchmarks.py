#!/usr/bin/env python3
"""Benchmark driver: all five algorithms over clustered scenarios of growing size.

Produces rate-versus-UE-count and wall-clock comparisons in one summary CSV,
using the same harness the CLI uses. Runtime scales with seeds and budgets;
the defaults finish in a few minutes on one core.

Usage: python scripts/run_benchmarks.py [--out DIR] [--seeds K] [--iters T]
"""

import argparse
import tempfile
from pathlib import Path

from uavplan.harness import ExperimentConfig, run_experiment, summarize
from uavplan.scenario import generate_clustered_scenario, save_scenario

ALGOS = ["vf-pud", "vf-pd", "vf-d", "ga-pud", "pso-pud"]


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="bench_out", help="output directory")
    ap.add_argument("--seeds", type=int, default=5, help="seeds per configuration")
    ap.add_argument("--iters", type=int, default=100, help="iteration budget per run")
    args = ap.parse_args()

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    seeds = list(range(1, args.seeds + 1))

    for m in (20, 35, 50):
        scenario = generate_clustered_scenario(
            seed=m,  # one fixed instance per size; seeds vary the channel draws
            ue_count=m,
            cluster_count=6,
            cluster_sigma=80.0,
            obstacle_count=2,
            snr_threshold=-40.0,
        )
        scenario_path = out / f"clustered_{m}ue.toml"
        save_scenario(scenario, scenario_path)
        config = ExperimentConfig(
            scenario_path=str(scenario_path),
            algorithms=ALGOS,
            seeds=seeds,
            out_dir=str(out / f"m{m}"),
            max_iters=args.iters,
        )
        reports = run_experiment(config)
        done = sum(1 for r in reports if not r.error)
        print(f"M={m}: {done}/{len(reports)} runs finished")

    rows = summarize(out, out / "summary.csv")
    print(f"wrote {out / 'summary.csv'} ({len(rows)} groups)")
    for r in rows:
        print(
            f"  {r['algorithm']:8s} M={r['ue_count']:3d} "
            f"rate={r['mean_rate_bps'] / 1e6:8.4f} Mbps "
            f"wall={r['mean_wall_clock_s']:7.3f} s "
            f"time_vs_vf_pud={r['time_vs_vf_pud']:.2f}"
        )


if __name__ == "__main__":
    main()
