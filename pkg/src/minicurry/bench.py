"""Benchmark harness: CSV timing/step output plus rendered figures.

Corpus programs are ordinary `.mcy` files.  A program that defines a 0-ary
rule `benchSize = <n>` is size-parameterized: the harness rewrites that rule
per requested size.  Programs without the hook run once per repetition with
size 0.  Step counts are deterministic for a given program and size;
wall-clock seconds vary and time out as `timeout` in the seconds column.

Output schema (one header plus one row per run, stable):

    program,size,run,seconds,steps,values

With a plot directory, the harness also renders per-program figures of steps
and seconds against size, with a least-squares exponential fit (r^2 from the
log-linear regression) overlaid when at least three sizes completed.
"""

from __future__ import annotations

import math
import re
import sys
import time
from dataclasses import dataclass
from pathlib import Path

from . import scheduler, trees

_SIZE_RULE = re.compile(r"^benchSize\s*=.*$", re.MULTILINE)


@dataclass
class BenchRow:
    program: str
    size: int
    run: int
    seconds: float | None        # None means timeout
    steps: int
    values: int

    def csv(self) -> str:
        secs = "timeout" if self.seconds is None else f"{self.seconds:.6f}"
        return f"{self.program},{self.size},{self.run},{secs},{self.steps},{self.values}"


@dataclass
class FitReport:
    program: str
    metric: str
    slope: float
    intercept: float
    r2: float


def parse_sizes(text: str) -> list[int]:
    """Accepts '4..9', '4-9', or '4,5,6'."""
    text = text.strip()
    for sep in ("..", "-"):
        if sep in text and not text.startswith("-"):
            lo, hi = text.split(sep, 1)
            return list(range(int(lo), int(hi) + 1))
    return [int(p) for p in text.split(",") if p.strip()]


def is_sized(source: str) -> bool:
    return _SIZE_RULE.search(source) is not None


def with_size(source: str, size: int) -> str:
    return _SIZE_RULE.sub(f"benchSize = {size}", source)


def run_one(source: str, quantum: int, timeout: float | None) -> tuple[float | None, int, int]:
    """Compile and run once; returns (seconds or None on timeout, steps, values)."""
    ir = trees.compile_program(source)
    start = time.perf_counter()
    result = scheduler.run(ir, quantum=quantum, max_seconds=timeout)
    elapsed = time.perf_counter() - start
    if result.status == scheduler.TIMEOUT:
        return None, result.stats.steps, len(result.values)
    return elapsed, result.stats.steps, len(result.values)


def run_bench(corpus_dir, sizes: list[int], repetitions: int = 1,
              timeout: float | None = None, programs: list[str] | None = None,
              quantum: int = scheduler.DEFAULT_QUANTUM) -> list[BenchRow]:
    corpus = Path(corpus_dir)
    files = sorted(corpus.glob("*.mcy"))
    if programs:
        wanted = set(programs)
        files = [f for f in files if f.stem in wanted]
    rows: list[BenchRow] = []
    for path in files:
        source = path.read_text(encoding="utf-8")
        run_sizes = sizes if is_sized(source) else [0]
        for size in run_sizes:
            text = with_size(source, size) if size else source
            for rep in range(1, repetitions + 1):
                seconds, steps, values = run_one(text, quantum, timeout)
                rows.append(BenchRow(path.stem, size, rep, seconds, steps, values))
    return rows


def write_csv(rows: list[BenchRow], out=None) -> None:
    out = out if out is not None else sys.stdout
    print("program,size,run,seconds,steps,values", file=out, flush=True)
    for row in rows:
        print(row.csv(), file=out, flush=True)


def exponential_fit(xs: list[int], ys: list[float]) -> tuple[float, float, float] | None:
    """Least-squares fit of log(y) = intercept + slope*x; returns (slope, intercept, r2)."""
    import numpy as np

    pairs = [(x, y) for x, y in zip(xs, ys) if y > 0]
    if len({x for x, _ in pairs}) < 3:
        return None
    x = np.array([p[0] for p in pairs], dtype=float)
    logy = np.log(np.array([p[1] for p in pairs], dtype=float))
    slope, intercept = np.polyfit(x, logy, 1)
    pred = intercept + slope * x
    ss_res = float(np.sum((logy - pred) ** 2))
    ss_tot = float(np.sum((logy - logy.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0 else 1.0 - ss_res / ss_tot
    return float(slope), float(intercept), r2


def _series(rows: list[BenchRow], metric: str) -> tuple[list[int], list[float]]:
    """Per-size averages over repetitions; timed-out runs are skipped."""
    pick = (lambda r: float(r.steps)) if metric == "steps" else (lambda r: r.seconds)
    agg: dict[int, list[float]] = {}
    for row in rows:
        v = pick(row)
        if v is not None:
            agg.setdefault(row.size, []).append(v)
    xs = sorted(agg)
    return xs, [sum(agg[s]) / len(agg[s]) for s in xs]


def compute_fits(rows: list[BenchRow]) -> list[FitReport]:
    """Exponential fits of steps and seconds against size, per program."""
    by_program: dict[str, list[BenchRow]] = {}
    for row in rows:
        by_program.setdefault(row.program, []).append(row)
    reports = []
    for program, prog_rows in by_program.items():
        for metric in ("steps", "seconds"):
            xs, ys = _series(prog_rows, metric)
            fit = exponential_fit(xs, ys)
            if fit is not None:
                slope, intercept, r2 = fit
                reports.append(FitReport(program, metric, slope, intercept, r2))
    return reports


def render_figures(rows: list[BenchRow], plot_dir) -> list[tuple[Path, FitReport | None]]:
    """One steps figure and one seconds figure per program; returns saved paths."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    import numpy as np

    out_dir = Path(plot_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    saved: list[tuple[Path, FitReport | None]] = []
    by_program: dict[str, list[BenchRow]] = {}
    for row in rows:
        by_program.setdefault(row.program, []).append(row)

    for program, prog_rows in by_program.items():
        for metric in ("steps", "seconds"):
            xs, ys = _series(prog_rows, metric)
            if not xs:
                continue
            fig, ax = plt.subplots(figsize=(5.0, 3.4))
            ax.plot(xs, ys, "o-", color="tab:blue", label=metric)
            fit = exponential_fit(xs, ys)
            report = None
            if fit is not None:
                slope, intercept, r2 = fit
                dense = np.linspace(min(xs), max(xs), 100)
                ax.plot(dense, np.exp(intercept + slope * dense), "--",
                        color="tab:red",
                        label=f"exp fit: r$^2$={r2:.4f}")
                report = FitReport(program, metric, slope, intercept, r2)
            if all(y > 0 for y in ys):
                ax.set_yscale("log")
            ax.set_xlabel("problem size")
            ax.set_ylabel(metric)
            ax.set_title(f"{program}: {metric} vs size")
            ax.legend(loc="best", fontsize=8)
            ax.spines["right"].set_visible(False)
            ax.spines["top"].set_visible(False)
            fig.tight_layout()
            path = out_dir / f"{program}_{metric}.png"
            fig.savefig(path, dpi=120)
            plt.close(fig)
            saved.append((path, report))
    return saved
