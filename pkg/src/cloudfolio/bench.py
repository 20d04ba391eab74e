"""Benchmark harness: wall-clock timing, cost, and utilization per case.

Each case is generated once and every algorithm runs ``repetitions`` times
on that same input.  Timing wraps only the optimize call, on a monotonic
clock; generation and serialization are excluded.  The genetic optimizer
is re-seeded per repetition with seeds derived from the case seed, so
repetitions are independent but reproducible.
"""

from __future__ import annotations

import csv
import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from . import erich, georg
from .datagen import build_case
from .domain import Algorithm, Allocation, Application, MarketSpace
from .erich import ErichInput
from .georg import GaConfig

__all__ = [
    "AlgorithmResult",
    "BenchReport",
    "utilization",
    "run_case",
    "run_cases",
    "export_report",
    "import_report",
    "DESK_SCALE_CASES",
]

# the two largest cases get their extents shrunk by default so a full
# benchmark stays desk-sized
DESK_SCALE_CASES = {5: 0.1, 6: 0.1}

CSV_HEADER = ["case", "algorithm", "rep", "wall_ms", "cost", "utilization"]
TRACE_HEADER = ["generation", "best_cost", "mean_cost"]


def utilization(alloc: Allocation, apps: Iterable[Application]) -> float:
    """Assigned expected demand over provisioned capacity, both slot-summed.

    Numerator: mu of the hosted app, summed over every (app, slot)
    assignment.  Denominator: capacity times envelope length, summed over
    instances.  An empty allocation has utilization 0 by definition.
    """
    cap = sum(i.type_ref.capacity * i.duration for i in alloc.instances)
    if cap == 0:
        return 0.0
    mu_of = {a.id: a.mu for a in apps}
    demand = sum(mu_of[app_id] for (app_id, _slot) in alloc.assignment)
    return demand / cap


@dataclass
class AlgorithmResult:
    """Outcome of one algorithm on one case: timings plus final-run stats."""

    algorithm: Algorithm
    wall_times_ms: list[float] = field(default_factory=list)
    total_cost: float | None = None
    mean_utilization: float | None = None
    per_market_utilization: dict[MarketSpace, float] = field(default_factory=dict)
    trace: list[tuple[int, float, float]] = field(default_factory=list)
    error: str | None = None

    def to_dict(self) -> dict:
        return {
            "algorithm": self.algorithm.value,
            "wall_times_ms": self.wall_times_ms,
            "total_cost": self.total_cost,
            "mean_utilization": self.mean_utilization,
            "per_market_utilization": {
                m.value: u for m, u in sorted(self.per_market_utilization.items())
            },
            "trace": [list(entry) for entry in self.trace],
            "error": self.error,
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "AlgorithmResult":
        return cls(
            algorithm=Algorithm(d["algorithm"]),
            wall_times_ms=[float(x) for x in d["wall_times_ms"]],
            total_cost=None if d["total_cost"] is None else float(d["total_cost"]),
            mean_utilization=(
                None if d["mean_utilization"] is None else float(d["mean_utilization"])
            ),
            per_market_utilization={
                MarketSpace(m): float(u) for m, u in d["per_market_utilization"].items()
            },
            trace=[(int(g), float(b), float(m)) for g, b, m in d["trace"]],
            error=d.get("error"),
        )


@dataclass
class BenchReport:
    """All results for one case, plus enough metadata to reproduce them."""

    case_id: int
    seed: int
    repetitions: int
    period_scale: float
    results: list[AlgorithmResult] = field(default_factory=list)
    timings_trusted: bool = True

    @property
    def label(self) -> str:
        return f"case_{self.case_id}"

    def result_for(self, algorithm: Algorithm) -> AlgorithmResult:
        for r in self.results:
            if r.algorithm is algorithm:
                return r
        raise KeyError(f"no result for {algorithm.value}")

    def to_dict(self) -> dict:
        return {
            "case_id": self.case_id,
            "seed": self.seed,
            "repetitions": self.repetitions,
            "period_scale": self.period_scale,
            "results": [r.to_dict() for r in self.results],
            "timings_trusted": self.timings_trusted,
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "BenchReport":
        return cls(
            case_id=int(d["case_id"]),
            seed=int(d["seed"]),
            repetitions=int(d["repetitions"]),
            period_scale=float(d["period_scale"]),
            results=[AlgorithmResult.from_dict(r) for r in d["results"]],
            timings_trusted=bool(d.get("timings_trusted", True)),
        )


def _georg_seed(seed: int, rep: int) -> int:
    return seed * 10_000 + rep


def _run_algorithm(
    inp: ErichInput,
    algorithm: Algorithm,
    repetitions: int,
    seed: int,
    ga_config: GaConfig | None,
) -> AlgorithmResult:
    result = AlgorithmResult(algorithm=algorithm)
    alloc: Allocation | None = None
    trace: list[tuple[int, float, float]] = []
    try:
        for rep in range(repetitions):
            if algorithm is Algorithm.ERICH:
                t0 = time.perf_counter()
                alloc = erich.optimize(inp)
                elapsed = time.perf_counter() - t0
            else:
                base = ga_config if ga_config is not None else GaConfig()
                cfg = GaConfig(
                    population_size=base.population_size,
                    max_generations=base.max_generations,
                    mutation_rate=base.mutation_rate,
                    stagnation_window=base.stagnation_window,
                    convergence_epsilon=base.convergence_epsilon,
                    seed=_georg_seed(seed, rep),
                )
                t0 = time.perf_counter()
                alloc, trace = georg.run(inp, cfg)
                elapsed = time.perf_counter() - t0
            result.wall_times_ms.append(elapsed * 1000.0)
    except Exception as exc:  # noqa: BLE001 - failures become report entries
        result.error = str(exc)
        return result

    if alloc is not None:
        result.total_cost = alloc.total_cost
        result.mean_utilization = utilization(alloc, inp.apps)
        result.per_market_utilization = {
            m: s.utilization for m, s in alloc.per_market_stats.items() if s.instance_count
        }
        result.trace = trace
    return result


def run_case(
    case_id: int,
    algorithms: Sequence[Algorithm] = (Algorithm.ERICH, Algorithm.GEORG),
    repetitions: int = 10,
    seed: int = 0,
    period_scale: float | None = None,
    q_min: float = 0.95,
    reserved_term: int | None = None,
    ga_config: GaConfig | None = None,
) -> BenchReport:
    """Benchmark all requested algorithms on one generated case."""
    if repetitions < 1:
        raise ValueError(f"repetitions must be >= 1, got {repetitions}")
    scale = period_scale if period_scale is not None else DESK_SCALE_CASES.get(case_id, 1.0)
    inp = build_case(case_id, seed=seed, period_scale=scale, q_min=q_min,
                     reserved_term=reserved_term)
    report = BenchReport(
        case_id=case_id, seed=seed, repetitions=repetitions, period_scale=scale
    )
    for algorithm in algorithms:
        report.results.append(
            _run_algorithm(inp, algorithm, repetitions, seed, ga_config)
        )
    return report


def run_cases(
    case_ids: Sequence[int],
    algorithms: Sequence[Algorithm] = (Algorithm.ERICH, Algorithm.GEORG),
    repetitions: int = 10,
    seed: int = 0,
    parallel: bool = False,
    **kwargs,
) -> list[BenchReport]:
    """Benchmark several cases, sequentially unless ``parallel`` is set.

    Parallel runs contend for cores, so their reports carry
    ``timings_trusted = False``.
    """
    if not parallel:
        return [
            run_case(cid, algorithms, repetitions, seed, **kwargs) for cid in case_ids
        ]
    with ThreadPoolExecutor(max_workers=len(case_ids) or 1) as pool:
        futures = [
            pool.submit(run_case, cid, algorithms, repetitions, seed, **kwargs)
            for cid in case_ids
        ]
        reports = [f.result() for f in futures]
    for report in reports:
        report.timings_trusted = False
    return reports


def export_report(
    report: BenchReport | Sequence[BenchReport],
    format: str = "csv",
    path: str | Path = "bench_report.csv",
) -> Path:
    """Write a report (or several) to disk; returns the main file's path.

    CSV: one row per (case, algorithm, repetition); cost and utilization
    columns repeat the final-run figures.  Each case with a genetic trace
    additionally gets case_<id>_trace.csv beside the main file.  JSON: a
    single self-contained document, re-loadable via import_report.
    """
    reports = [report] if isinstance(report, BenchReport) else list(report)
    path = Path(path)
    try:
        if format == "json":
            payload = [r.to_dict() for r in reports]
            body = payload[0] if isinstance(report, BenchReport) else payload
            path.write_text(json.dumps(body, indent=2, sort_keys=True) + "\n")
            return path
        if format != "csv":
            raise ValueError(f"unknown report format {format!r}")
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(CSV_HEADER)
            for r in reports:
                for result in r.results:
                    for rep, wall_ms in enumerate(result.wall_times_ms):
                        writer.writerow(
                            [
                                r.label,
                                result.algorithm.value,
                                rep,
                                f"{wall_ms:.3f}",
                                "" if result.total_cost is None else f"{result.total_cost:.6f}",
                                ""
                                if result.mean_utilization is None
                                else f"{result.mean_utilization:.6f}",
                            ]
                        )
        for r in reports:
            for result in r.results:
                if result.trace:
                    trace_path = path.parent / f"case_{r.case_id}_trace.csv"
                    with trace_path.open("w", newline="") as fh:
                        writer = csv.writer(fh)
                        writer.writerow(TRACE_HEADER)
                        for gen, best, mean in result.trace:
                            writer.writerow([gen, f"{best:.6f}", f"{mean:.6f}"])
        return path
    except OSError as exc:
        raise OSError(f"cannot write benchmark report to {path}: {exc}") from exc


def import_report(path: str | Path) -> BenchReport | list[BenchReport]:
    """Load a JSON report written by export_report."""
    path = Path(path)
    try:
        body = json.loads(path.read_text())
    except OSError as exc:
        raise OSError(f"cannot read benchmark report from {path}: {exc}") from exc
    if isinstance(body, list):
        return [BenchReport.from_dict(d) for d in body]
    return BenchReport.from_dict(body)
