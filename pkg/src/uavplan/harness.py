"""Batch experiment driver: run algorithms over seeds, write traces and reports.

A batch writes one trace CSV per (algorithm, seed) plus a report.json with
per-run records. Traces have the fixed header
iter,total_rate_bps,coverage,max_speed_mps,min_uav_separation_m,sum_power_w
and one row per iteration, iteration 0 being the deployed starting point.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .baselines import run_ga_pud, run_pso_pud, run_vf_d, run_vf_pd
from .fleet_init import initial_fleet
from .scenario import Scenario, load_scenario
from .vforce import OptimizationResult, TraceRow, run_vf_optimization

TRACE_HEADER = "iter,total_rate_bps,coverage,max_speed_mps,min_uav_separation_m,sum_power_w"

ALGORITHMS = ("vf-pud", "vf-pd", "vf-d", "ga-pud", "pso-pud")


@dataclass
class ExperimentConfig:
    scenario_path: str
    algorithms: list[str]
    seeds: list[int]
    out_dir: str
    max_iters: int | None = None
    single_thread: bool = False


@dataclass
class RunReport:
    algorithm: str
    seed: int
    uav_count: int
    ue_count: int
    total_rate_bps: float
    coverage: float
    iterations: int
    wall_clock_s: float
    trace_file: str | None = None
    error: str | None = None
    final: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "algorithm": self.algorithm,
            "seed": self.seed,
            "uav_count": self.uav_count,
            "ue_count": self.ue_count,
            "total_rate_bps": self.total_rate_bps,
            "coverage": self.coverage,
            "iterations": self.iterations,
            "wall_clock_s": self.wall_clock_s,
            "trace_file": self.trace_file,
            "error": self.error,
            "final": self.final,
        }


def _dispatch(scenario: Scenario, algo: str, seed: int, max_iters: int | None) -> tuple[OptimizationResult, int, float]:
    """Deploy, run one algorithm, and time the optimisation call alone."""
    fleet, assoc = initial_fleet(scenario, seed)
    n = fleet.uav_count
    start = time.perf_counter()
    if algo == "vf-pud":
        result = run_vf_optimization(scenario, seed, fleet, assoc, max_iters=max_iters)
    elif algo == "vf-pd":
        result = run_vf_pd(scenario, seed, fleet, assoc, max_iters=max_iters)
    elif algo == "vf-d":
        result = run_vf_d(scenario, seed, fleet, assoc, max_iters=max_iters)
    elif algo == "ga-pud":
        result = run_ga_pud(scenario, seed, n, max_iters=max_iters)
    elif algo == "pso-pud":
        result = run_pso_pud(scenario, seed, n, max_iters=max_iters)
    else:
        raise ValueError(f"unknown algorithm {algo!r}")
    return result, n, time.perf_counter() - start


def _fmt(value: float) -> str:
    return format(float(value), ".12g")


def write_trace(path: Path, rows: list[TraceRow]) -> None:
    lines = [TRACE_HEADER]
    for r in rows:
        lines.append(
            ",".join(
                [
                    str(r.iteration),
                    _fmt(r.total_rate_bps),
                    _fmt(r.coverage),
                    _fmt(r.max_speed_mps),
                    _fmt(r.min_uav_separation_m),
                    _fmt(r.sum_power_w),
                ]
            )
        )
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_trace(path: Path) -> list[TraceRow]:
    lines = Path(path).read_text(encoding="utf-8").strip().splitlines()
    if not lines or lines[0] != TRACE_HEADER:
        raise ValueError(f"{path} is not a trace file")
    rows = []
    for line in lines[1:]:
        parts = line.split(",")
        rows.append(
            TraceRow(
                iteration=int(parts[0]),
                total_rate_bps=float(parts[1]),
                coverage=float(parts[2]),
                max_speed_mps=float(parts[3]),
                min_uav_separation_m=float(parts[4]),
                sum_power_w=float(parts[5]),
            )
        )
    return rows


def run_single(scenario: Scenario, algo: str, seed: int, max_iters: int | None = None) -> tuple[RunReport, list[TraceRow]]:
    """One (algorithm, seed) run. Failures come back as an error report, not a raise."""
    try:
        result, n, wall = _dispatch(scenario, algo, seed, max_iters)
    except Exception as exc:  # harness keeps going; the report records what broke
        report = RunReport(
            algorithm=algo,
            seed=seed,
            uav_count=0,
            ue_count=scenario.ue_count,
            total_rate_bps=0.0,
            coverage=0.0,
            iterations=0,
            wall_clock_s=0.0,
            error=f"{type(exc).__name__}: {exc}",
        )
        return report, []
    last = result.trace[-1]
    report = RunReport(
        algorithm=algo,
        seed=seed,
        uav_count=n,
        ue_count=scenario.ue_count,
        total_rate_bps=last.total_rate_bps,
        coverage=last.coverage,
        iterations=result.iterations,
        wall_clock_s=wall,
        final={
            "positions": [[float(x), float(y)] for x, y in result.fleet.positions],
            "power_w": [[float(p) for p in row] for row in result.fleet.powers],
            "association": [int(v) for v in result.assoc.uav_of],
        },
    )
    return report, result.trace


def run_experiment(config: ExperimentConfig) -> list[RunReport]:
    """Run the full algorithm x seed grid and write traces plus report.json."""
    scenario = load_scenario(config.scenario_path)
    for algo in config.algorithms:
        if algo not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {algo!r}, expected one of {ALGORITHMS}")
    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    reports: list[RunReport] = []
    for algo in config.algorithms:
        for seed in config.seeds:
            report, trace = run_single(scenario, algo, seed, config.max_iters)
            if trace:
                trace_name = f"{algo}_seed{seed}.csv"
                write_trace(out / trace_name, trace)
                report.trace_file = trace_name
            reports.append(report)
    payload = {
        "scenario": str(config.scenario_path),
        "max_iters": config.max_iters,
        "runs": [r.to_json() for r in reports],
    }
    (out / "report.json").write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
    return reports


def load_reports(in_dir) -> list[dict]:
    """All run records from every report.json under in_dir."""
    root = Path(in_dir)
    if root.is_file():
        files = [root]
    else:
        files = sorted(root.rglob("report.json"))
    runs: list[dict] = []
    for f in files:
        data = json.loads(f.read_text(encoding="utf-8"))
        runs.extend(data.get("runs", []))
    return runs


def summarize(in_dir, out_path) -> list[dict]:
    """Aggregate runs by (algorithm, ue_count) into a CSV, ratios against vf-pud.

    Errored runs are excluded from the statistics and counted separately.
    """
    runs = load_reports(in_dir)
    if not runs:
        raise ValueError(f"no report.json with runs found under {in_dir}")
    groups: dict[tuple[str, int], list[dict]] = {}
    errors: dict[tuple[str, int], int] = {}
    for run in runs:
        key = (run["algorithm"], run["ue_count"])
        if run.get("error"):
            errors[key] = errors.get(key, 0) + 1
            groups.setdefault(key, [])
        else:
            groups.setdefault(key, []).append(run)
    rows: list[dict] = []
    for (algo, m), ok_runs in sorted(groups.items(), key=lambda kv: (kv[0][1], kv[0][0])):
        rates = np.array([r["total_rate_bps"] for r in ok_runs])
        walls = np.array([r["wall_clock_s"] for r in ok_runs])
        covs = np.array([r["coverage"] for r in ok_runs])
        rows.append(
            {
                "algorithm": algo,
                "ue_count": m,
                "runs": len(ok_runs),
                "errors": errors.get((algo, m), 0),
                "mean_rate_bps": float(rates.mean()) if len(ok_runs) else float("nan"),
                "std_rate_bps": float(rates.std()) if len(ok_runs) else float("nan"),
                "mean_coverage": float(covs.mean()) if len(ok_runs) else float("nan"),
                "mean_wall_clock_s": float(walls.mean()) if len(ok_runs) else float("nan"),
                "std_wall_clock_s": float(walls.std()) if len(ok_runs) else float("nan"),
            }
        )
    base = {
        r["ue_count"]: r for r in rows if r["algorithm"] == "vf-pud" and r["runs"] > 0
    }
    for r in rows:
        ref = base.get(r["ue_count"])
        if ref and r["runs"] > 0:
            r["rate_vs_vf_pud"] = r["mean_rate_bps"] / ref["mean_rate_bps"] if ref["mean_rate_bps"] else float("nan")
            r["time_vs_vf_pud"] = r["mean_wall_clock_s"] / ref["mean_wall_clock_s"] if ref["mean_wall_clock_s"] else float("nan")
        else:
            r["rate_vs_vf_pud"] = float("nan")
            r["time_vs_vf_pud"] = float("nan")
    header = [
        "algorithm",
        "ue_count",
        "runs",
        "errors",
        "mean_rate_bps",
        "std_rate_bps",
        "mean_coverage",
        "mean_wall_clock_s",
        "std_wall_clock_s",
        "rate_vs_vf_pud",
        "time_vs_vf_pud",
    ]
    lines = [",".join(header)]
    for r in rows:
        lines.append(
            ",".join(
                str(r[h]) if h in ("algorithm", "ue_count", "runs", "errors") else _fmt(r[h])
                for h in header
            )
        )
    Path(out_path).write_text("\n".join(lines) + "\n", encoding="utf-8")
    return rows
