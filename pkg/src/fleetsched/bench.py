"""Benchmark harness: run solvers over (algo, seed) cells, collect result
rows, and summarize mean/std per algorithm."""

from __future__ import annotations

import csv
import math
import time
from dataclasses import dataclass, asdict

import numpy as np

from . import ddqn
from .evaluation import evaluate
from .optimizers import OptimizerConfig, run_aro, run_cgg_aro
from .scenario import Scenario


class UnknownAlgo(ValueError):
    pass


ALGOS = ("cgg-aro", "aro", "ddqn-infer")

RESULT_FIELDS = ("scenario_id", "algo", "seed", "fitness", "completed",
                 "total_benefit", "wall_ms", "iterations")


@dataclass
class ResultRow:
    scenario_id: str
    algo: str
    seed: int
    fitness: float
    completed: int
    total_benefit: float
    wall_ms: float
    iterations: int


def solve(scenario: Scenario, algo: str, seed: int,
          pop: int = 30, iters: int = 1000, rho: float = 0.4,
          policy_path: str | None = None,
          scenario_id: str = "scenario"
          ) -> tuple[ResultRow, list]:
    """Run one solver cell; wall time covers the solver only, not IO."""
    if algo not in ALGOS:
        raise UnknownAlgo(f"unknown algo {algo!r}; expected one of {ALGOS}")
    if algo == "ddqn-infer":
        if policy_path is None:
            raise ddqn.MissingPolicy("ddqn-infer requires a trained policy")
        policy = ddqn.load_policy(policy_path)
        t0 = time.perf_counter()
        solution = ddqn.infer(policy, scenario)
        wall_ms = (time.perf_counter() - t0) * 1e3
        report = evaluate(solution, scenario)
        row = ResultRow(scenario_id, algo, seed, report.fitness,
                        report.completed_count, report.total_benefit,
                        wall_ms, iterations=1)
        return row, []

    config = OptimizerConfig(pop_size=pop, iterations=iters, rho=rho,
                             seed=seed)
    runner = run_cgg_aro if algo == "cgg-aro" else run_aro
    result = runner(scenario, config)
    report = evaluate(result.best_solution, scenario)
    row = ResultRow(scenario_id, algo, seed, result.best_fitness,
                    report.completed_count, report.total_benefit,
                    result.wall_s * 1e3, iterations=iters)
    return row, result.trace


def write_results(rows: list[ResultRow], path: str) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=RESULT_FIELDS)
        w.writeheader()
        for row in rows:
            w.writerow(asdict(row))


def read_results(path: str) -> list[ResultRow]:
    rows = []
    with open(path, newline="") as fh:
        for rec in csv.DictReader(fh):
            rows.append(ResultRow(rec["scenario_id"], rec["algo"],
                                  int(rec["seed"]), float(rec["fitness"]),
                                  int(rec["completed"]),
                                  float(rec["total_benefit"]),
                                  float(rec["wall_ms"]),
                                  int(rec["iterations"])))
    return rows


def write_trace(trace, path: str) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["generation", "best_fitness", "mean_fitness",
                    "completed_at_best"])
        for pt in trace:
            w.writerow([pt.generation, pt.best_fitness, pt.mean_fitness,
                        pt.completed_at_best])


def _mean_std(values: list[float]) -> tuple[float, float]:
    n = len(values)
    mean = sum(values) / n
    if n < 2:
        return mean, 0.0
    var = sum((v - mean) ** 2 for v in values) / (n - 1)
    return mean, math.sqrt(var)


def summarize(rows: list[ResultRow]) -> list[dict]:
    """Per-algo mean and sample standard deviation of every metric."""
    out = []
    for algo in sorted({r.algo for r in rows}):
        sub = [r for r in rows if r.algo == algo]
        rec = {"algo": algo, "runs": len(sub)}
        for metric in ("fitness", "completed", "total_benefit", "wall_ms"):
            mean, std = _mean_std([getattr(r, metric) for r in sub])
            rec[f"{metric}_mean"] = mean
            rec[f"{metric}_std"] = std
        out.append(rec)
    return out


def winners_by_scenario(rows: list[ResultRow],
                        metric: str = "fitness") -> list[dict]:
    """Per-scenario winner table: best mean metric across algos."""
    out = []
    for sid in sorted({r.scenario_id for r in rows}):
        sub = [r for r in rows if r.scenario_id == sid]
        means = {}
        for algo in sorted({r.algo for r in sub}):
            vals = [getattr(r, metric) for r in sub if r.algo == algo]
            means[algo] = sum(vals) / len(vals)
        winner = max(means, key=lambda a: means[a])
        out.append({"scenario_id": sid, "winner": winner, **means})
    return out


def write_summary(summary: list[dict], path: str) -> None:
    if not summary:
        return
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(summary[0].keys()))
        w.writeheader()
        for rec in summary:
            w.writerow(rec)
