"""Bench rows and the figures rendered next to the CSV."""

from __future__ import annotations

import csv
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

BENCH_COLUMNS = (
    "instance",
    "n",
    "m",
    "total_subsidy",
    "iterations",
    "extend_steps",
    "sink_steps",
    "findsink_trials",
    "max_findsink_trials",
    "oracle_calls",
    "wall_time_s",
)

JOBS_ENV = "EFSUBSIDY_JOBS"


def bench_row(inst, checked: bool = False) -> dict:
    from .solver import SINK, solve

    start = time.perf_counter()
    sol, trace = solve(inst, checked=checked)
    elapsed = time.perf_counter() - start
    sink = [r for r in trace if r.branch == SINK]
    return {
        "instance": inst.name or "",
        "n": inst.n,
        "m": inst.m,
        "total_subsidy": sol.total,
        "iterations": len(trace),
        "extend_steps": len(trace) - len(sink),
        "sink_steps": len(sink),
        "findsink_trials": sum(len(r.sink_candidates) for r in sink),
        "max_findsink_trials": max((len(r.sink_candidates) for r in sink), default=0),
        "oracle_calls": trace[-1].oracle_calls_cum if trace else 0,
        "wall_time_s": round(elapsed, 6),
    }


def max_jobs(requested: int | None = None) -> int:
    jobs = requested or os.cpu_count() or 1
    cap = os.environ.get(JOBS_ENV)
    if cap:
        jobs = min(jobs, max(1, int(cap)))
    return max(1, jobs)


def run_bench(instances, jobs: int | None = None, checked: bool = False) -> list[dict]:
    """Solve every instance; rows come back in corpus order."""
    jobs = max_jobs(jobs)
    if jobs == 1 or len(instances) < 2:
        return [bench_row(inst, checked) for inst in instances]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(bench_row, instances, [checked] * len(instances)))


def write_csv(rows, stream=None) -> None:
    writer = csv.DictWriter(stream or sys.stdout, fieldnames=BENCH_COLUMNS, lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)


def render_figures(rows, outdir) -> list[Path]:
    """Write ``oracle_calls.png`` and ``subsidy.png`` into ``outdir``."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    written = []

    ns = sorted({r["n"] for r in rows})
    fig, ax = plt.subplots(figsize=(6, 4))
    for n in ns:
        pts = sorted((r["m"], r["oracle_calls"]) for r in rows if r["n"] == n)
        ax.plot([x for x, _ in pts], [y for _, y in pts], marker="o", ms=3, lw=1, label=f"n={n}")
    ax.set_xlabel("goods m")
    ax.set_ylabel("oracle calls")
    ax.set_title("Value queries per solve")
    if 1 < len(ns) <= 10:
        ax.legend(fontsize=8)
    fig.tight_layout()
    path = outdir / "oracle_calls.png"
    fig.savefig(path, dpi=120)
    plt.close(fig)
    written.append(path)

    fig, ax = plt.subplots(figsize=(6, 4))
    ax.scatter([r["n"] for r in rows], [r["total_subsidy"] for r in rows], s=12, alpha=0.5, label="total subsidy")
    if ns:
        ax.plot(ns, [n - 1 for n in ns], "k--", lw=1, label="n - 1")
    ax.set_xlabel("agents n")
    ax.set_ylabel("total subsidy")
    ax.set_title("Total subsidy against the n - 1 bound")
    ax.legend(fontsize=8)
    fig.tight_layout()
    path = outdir / "subsidy.png"
    fig.savefig(path, dpi=120)
    plt.close(fig)
    written.append(path)
    return written
