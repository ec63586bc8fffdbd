"""Scenario generation, single runs with transmission accounting, and sweeps.

Seeding: a scenario ``(master_seed, n, L, index)`` draws its graph and
observations from ``SeedSequence(master_seed, spawn_key=(n, L, index))``.
An algorithm run on that scenario uses the spawn key extended by the CRC-32
of the algorithm tag, so adding or removing algorithms never changes the
scenarios or the other algorithms' random streams.
"""

from __future__ import annotations

import csv
import math
import statistics
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np

from .algorithms import HOPWISE_KINDS, AlgorithmConfig, initialize
from .graph import Graph, build_random_geometric

DEFAULT_TOL = 0.005

RUN_COLUMNS = ("scenario_index", "algorithm", "n", "l", "seed", "transmissions", "converged")
SWEEP_COLUMNS = ("n", "avg_degree", "algorithm", "scenarios", "mean_transmissions",
                 "std_transmissions", "converged_fraction")
TRACE_COLUMNS = ("k", "initiator", "cum_transmissions", "V", "max_abs_error", "event_time")


@dataclass(frozen=True)
class Scenario:
    graph: Graph
    y: tuple[float, ...]
    x_star: float
    master_seed: int = 0
    index: int = 0

    @classmethod
    def from_graph(cls, graph: Graph, y: Sequence[float], master_seed: int = 0,
                   index: int = 0) -> "Scenario":
        y = tuple(float(v) for v in y)
        if len(y) != graph.n:
            raise ValueError(f"expected {graph.n} observations, got {len(y)}")
        return cls(graph, y, math.fsum(y) / graph.n, master_seed, index)


@dataclass
class RunResult:
    algorithm: str
    transmissions: int
    converged: bool
    init_overhead: int
    iterations: int = 0
    scenario_index: int = 0
    n: int = 0
    l: int = 0  # noqa: E741
    seed: int = 0
    trace: Optional[list[dict]] = field(default=None, repr=False)

    @property
    def transmissions_to_converge(self) -> int:
        return self.transmissions


@dataclass(frozen=True)
class SweepConfig:
    ns: tuple[int, ...]
    avg_degrees: tuple[int, ...]
    scenarios: int
    algorithms: tuple[str, ...]
    master_seed: int = 0
    tol: float = DEFAULT_TOL
    budget_factor: float = 3.0
    workers: int = 1
    params: dict = field(default_factory=dict)  # AlgorithmConfig overrides

    def __post_init__(self):
        if self.scenarios < 1:
            raise ValueError("need at least one scenario")
        if not self.algorithms:
            raise ValueError("algorithm list is empty")


@dataclass(frozen=True)
class SweepRow:
    n: int
    avg_degree: int
    algorithm: str
    scenarios: int
    mean_transmissions: float
    std_transmissions: float
    converged_fraction: float


@dataclass
class SweepTable:
    rows: list[SweepRow]
    runs: list[RunResult]

    def row(self, n: int, avg_degree: int, algorithm: str) -> SweepRow:
        for r in self.rows:
            if (r.n, r.avg_degree, r.algorithm) == (n, avg_degree, algorithm):
                return r
        raise KeyError((n, avg_degree, algorithm))


def link_target(n: int, avg_degree) -> int:
    links = n * avg_degree / 2
    if links != int(links):
        raise ValueError(f"n * avg_degree / 2 must be an integer, got {links}")
    return int(links)


def scenario_seed(master_seed: int, n: int, links: int, index: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(master_seed, spawn_key=(n, links, index))


def run_seed(master_seed: int, n: int, links: int, index: int, algorithm: str) -> np.random.SeedSequence:
    return np.random.SeedSequence(
        master_seed, spawn_key=(n, links, index, zlib.crc32(algorithm.encode())))


def generate_scenario(master_seed: int, index: int, n: int, avg_degree) -> Scenario:
    links = link_target(n, avg_degree)
    rng = np.random.default_rng(scenario_seed(master_seed, n, links, index))
    g = build_random_geometric(n, links, rng)
    y = rng.random(n)
    while np.any(y == 0.0):
        y = np.where(y == 0.0, rng.random(n), y)
    return Scenario.from_graph(g, y.tolist(), master_seed, index)


def check_convergence(estimates, x_star: float, tol: float = DEFAULT_TOL) -> bool:
    if not tol > 0:
        raise ValueError(f"tol must be > 0, got {tol}")
    return bool(np.all(np.abs(np.asarray(estimates, dtype=float) - x_star) <= tol))


def default_budget(n: int) -> int:
    return 3 * n * n


def run_once(scenario: Scenario, config: AlgorithmConfig, budget: Optional[int] = None,
             tol: float = DEFAULT_TOL, trace: bool = False, seed=None) -> RunResult:
    """Run until convergence, termination, or the transmission budget.

    Convergence is tested after initialisation and at every iteration
    boundary; the count at the first boundary meeting the criterion is kept.
    Unconverged runs report ``budget``.
    """
    g = scenario.graph
    if budget is None:
        budget = default_budget(g.n)
    if seed is None:
        seed = run_seed(scenario.master_seed, g.n, g.l, scenario.index, config.kind)
    run = initialize(g, scenario.y, config, seed)
    seed_int = seed if isinstance(seed, int) else scenario.master_seed
    total = run.init_overhead
    if budget < total:
        raise ValueError(f"budget {budget} is below the initialisation overhead {total}")
    xs = scenario.x_star
    if run.hopwise:
        run.state.sealed = True
    records: Optional[list[dict]] = [] if trace else None

    est = run.estimates
    off = {i for i, v in enumerate(np.asarray(est, dtype=float)) if abs(v - xs) > tol}

    def record(k, initiator):
        est_arr = np.asarray(run.estimates, dtype=float)
        row = {"k": k, "initiator": initiator, "cum_transmissions": total,
               "V": None, "max_abs_error": float(np.max(np.abs(est_arr - xs))),
               "event_time": None}
        if run.hopwise:
            run.state.sealed = False
            row["V"] = run.lyapunov()
            run.state.sealed = True
        if config.kind == "cha":
            row["event_time"] = 0.0 if k == 0 else run.event_time
        records.append(row)

    if trace:
        record(0, None)
    k = 0
    result = dict(algorithm=config.kind, init_overhead=run.init_overhead,
                  scenario_index=scenario.index, n=g.n, l=g.l, seed=seed_int, trace=records)
    while off:
        if run.terminated:
            break
        cost = run.peek_cost()
        if total + cost > budget:
            break
        out = run.step()
        total += out.transmissions
        k += 1
        est = run.estimates
        if out.touched is None:
            diff = np.abs(est - xs)
            off = set(np.flatnonzero(diff > tol).tolist())
        else:
            for i in out.touched:
                if abs(est[i] - xs) > tol:
                    off.add(i)
                else:
                    off.discard(i)
        if trace:
            record(k, out.initiator)
    if run.hopwise:
        run.state.sealed = False
    if off:
        return RunResult(transmissions=budget, converged=False, iterations=k, **result)
    return RunResult(transmissions=total, converged=True, iterations=k, **result)


def _cell_task(args):
    master_seed, n, avg, index, algorithms, tol, budget, params = args
    sc = generate_scenario(master_seed, index, n, avg)
    out = []
    for alg in algorithms:
        cfg = AlgorithmConfig(alg, **params)
        out.append(run_once(sc, cfg, budget=budget, tol=tol))
    return (n, avg, index), out


def _summarise(n, avg, alg, runs: list[RunResult]) -> SweepRow:
    counts = [r.transmissions for r in runs]
    mean = math.fsum(counts) / len(counts)
    std = statistics.stdev(counts) if len(counts) > 1 else 0.0
    frac = sum(r.converged for r in runs) / len(runs)
    return SweepRow(n, avg, alg, len(runs), mean, std, frac)


def run_sweep(cfg: SweepConfig) -> SweepTable:
    """Paired sweep: every algorithm sees the same scenarios within a cell."""
    tasks = []
    for n in cfg.ns:
        for avg in cfg.avg_degrees:
            budget = int(math.floor(cfg.budget_factor * n * n))
            for index in range(cfg.scenarios):
                tasks.append((cfg.master_seed, n, avg, index, tuple(cfg.algorithms),
                              cfg.tol, budget, dict(cfg.params)))
    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            done = list(pool.map(_cell_task, tasks))
    else:
        done = [_cell_task(t) for t in tasks]
    done.sort(key=lambda item: item[0])
    order = {a: i for i, a in enumerate(cfg.algorithms)}
    runs: list[RunResult] = []
    by_cell: dict[tuple, list[RunResult]] = {}
    for (n, avg, _), results in done:
        for r in results:
            by_cell.setdefault((n, avg, r.algorithm), []).append(r)
    rows = []
    for n in cfg.ns:
        for avg in cfg.avg_degrees:
            for alg in cfg.algorithms:
                rows.append(_summarise(n, avg, alg, by_cell[(n, avg, alg)]))
    for (n, avg, _), results in done:
        runs.extend(sorted(results, key=lambda r: order[r.algorithm]))
    return SweepTable(rows, runs)


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, tuple):
        return "-".join(str(x) for x in v)
    return str(v)


def export_csv(results: Union[SweepTable, Sequence[RunResult], RunResult], path) -> Path:
    """Write runs (one row per scenario and algorithm) or a sweep table (one row per cell)."""
    path = Path(path)
    if isinstance(results, RunResult):
        results = [results]
    if isinstance(results, SweepTable):
        columns = SWEEP_COLUMNS
        rows = [[getattr(r, c) for c in columns] for r in results.rows]
    else:
        if not results:
            raise ValueError("no results to export")
        columns = RUN_COLUMNS
        rows = [[r.scenario_index, r.algorithm, r.n, r.l, r.seed, r.transmissions, r.converged]
                for r in results]
    if not rows:
        raise ValueError("no results to export")
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])
    return path


def export_trace(result: RunResult, path) -> Path:
    if result.trace is None:
        raise ValueError("run was executed without trace recording")
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(TRACE_COLUMNS)
        for rec in result.trace:
            writer.writerow([_fmt(rec[c]) for c in TRACE_COLUMNS])
    return path


def read_csv(path) -> Union[SweepTable, list[RunResult]]:
    """Parse a file written by :func:`export_csv` back into memory."""
    with Path(path).open(newline="") as fh:
        reader = csv.reader(fh)
        header = tuple(next(reader))
        body = list(reader)
    if header == SWEEP_COLUMNS:
        rows = [SweepRow(int(r[0]), int(r[1]), r[2], int(r[3]), float(r[4]), float(r[5]),
                         float(r[6])) for r in body]
        return SweepTable(rows, [])
    if header == RUN_COLUMNS:
        return [RunResult(algorithm=r[1], transmissions=int(r[5]), converged=r[6] == "1",
                          init_overhead=2 * int(r[2]) if r[1] in HOPWISE_KINDS else 0, scenario_index=int(r[0]), n=int(r[2]),
                          l=int(r[3]), seed=int(r[4])) for r in body]
    raise ValueError(f"{path}: unrecognised header {header}")
