"""Command-line entry point: ``hopavg bounds | simulate | sweep``.

Node ids are 0-based everywhere, including trace files.

Exit status: 0 converged (or success), 2 transmission budget exhausted
without convergence, 1 usage or configuration error.
"""

from __future__ import annotations

import argparse
import sys
from typing import Optional

import numpy as np

from . import bounds as bd
from .algorithms import KINDS, AlgorithmConfig
from .graph import GraphError, build_family, graph_invariants, load_edge_list
from .harness import (DEFAULT_TOL, Scenario, SweepConfig, default_budget, export_csv,
                      export_trace, generate_scenario, run_once, run_sweep)
from .hopwise import compute_weights

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_BUDGET = 2

GRAPH_HELP = ("graph spec: family:path,N | family:cycle,N | family:complete,N | "
              "family:k-regular,N,K | family:petersen | geometric:N,AVG_DEGREE | "
              "file:EDGES[,POSITIONS]")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _int_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _float_list(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _algo_params(args) -> dict:
    return dict(cha_c=args.cha_c, cha_eps=args.cha_eps, cp_beta=args.cp_beta,
                a2_gamma=args.a2_gamma, a2_phi=args.a2_phi)


def _add_algo_params(p):
    g = p.add_argument_group("algorithm parameters")
    g.add_argument("--cha-c", type=float, default=1.0,
                   help="CHA schedule constant c in phi(v) = c/v (default 1)")
    g.add_argument("--cha-eps", type=float, default=0.001,
                   help="CHA event-time jitter width (default 0.001; 0 disables jitter)")
    g.add_argument("--cp-beta", type=float, default=1e6,
                   help="consensus propagation beta, 'inf' accepted (default 1e6)")
    g.add_argument("--a2-gamma", type=float, default=0.3, help="A2 gamma in (0,1) (default 0.3)")
    g.add_argument("--a2-phi", type=float, default=0.49, help="A2 phi in (0,1/2) (default 0.49)")


def parse_graph(spec: str, seed: int = 0):
    """Return (graph, scenario-or-None) for a graph spec string."""
    kind, _, rest = spec.partition(":")
    parts = [p for p in rest.split(",") if p] if rest else []
    try:
        if kind == "family":
            if not parts:
                raise UsageError(f"family spec needs a name: {spec!r}")
            name, nums = parts[0], [int(v) for v in parts[1:]]
            if name in ("petersen", "strongly-regular"):
                return build_family("strongly-regular"), None
            if name == "k-regular":
                if len(nums) != 2:
                    raise UsageError("family:k-regular needs N,K")
                return build_family(name, nums[0], nums[1]), None
            if len(nums) != 1:
                raise UsageError(f"family:{name} needs exactly one size N")
            return build_family(name, nums[0]), None
        if kind == "geometric":
            if len(parts) != 2:
                raise UsageError("geometric spec needs N,AVG_DEGREE")
            sc = generate_scenario(seed, 0, int(parts[0]), int(parts[1]))
            return sc.graph, sc
        if kind == "file":
            if not parts:
                raise UsageError("file spec needs a path")
            return load_edge_list(parts[0], parts[1] if len(parts) > 1 else None), None
    except ValueError as exc:
        if isinstance(exc, GraphError):
            raise
        raise UsageError(f"bad graph spec {spec!r}: {exc}")
    raise UsageError(f"unknown graph spec {spec!r}; {GRAPH_HELP}")


# ---------------------------------------------------------------------------
# bounds
# ---------------------------------------------------------------------------

BOUNDS_COLUMNS = ("family", "n", "gamma_general", "gamma_closed_form", "gamma_refined",
                  "gamma_icha", "gamma_pa", "rate", "rate_two_iteration")


def _fmt_gamma(v) -> str:
    if v is None:
        return "n/a"
    if isinstance(v, bd.Unavailable):
        return "out-of-range"
    if isinstance(v, bd.GammaBound):
        v = v.value
    return f"{v:.10g}"


def bounds_rows(family: str, ns: list[int], k: Optional[int] = None,
                srg: Optional[list[int]] = None) -> list[dict]:
    rows = []
    for n in ns:
        mu = None
        kk = k
        g = None
        if family == "strongly-regular":
            n_, kk, _lam, mu = srg or (10, 3, 0, 1)
            if n_ == 10 and (kk, _lam, mu) == (3, 0, 1):
                g = build_family("strongly-regular")
            n = n_
        else:
            try:
                g = build_family(family, n, k)
            except GraphError as exc:
                raise UsageError(str(exc))
        general = None
        d = None
        if g is not None:
            inv = graph_invariants(g)
            d = inv.diameter
            general = bd.gamma_general(inv, compute_weights(g))
        cor, thm = bd.gamma_closed(family, n, kk, d, mu)
        candidates = [s.value for s in (general, cor, thm) if isinstance(s, bd.GammaBound)]
        best = min(candidates) if candidates else None
        icha = bd.gamma_two_iteration(best) if best is not None and best > 1 else None
        rows.append({
            "family": family, "n": n, "gamma_general": general, "gamma_closed_form": cor,
            "gamma_refined": thm, "gamma_icha": icha,
            "gamma_pa": bd.gamma_pa_complete(n) if family == "complete" else None,
            "rate": None if best is None else 1 - 1 / best,
            "rate_two_iteration": None if best is None else (1 - 1 / best) ** 2,
        })
    return rows


def cmd_bounds(args) -> int:
    if args.family == "strongly-regular" and args.srg is not None and len(args.srg) != 4:
        raise UsageError("--srg needs N,K,LAMBDA,MU")
    ns = args.n or ([10] if args.family == "strongly-regular" else None)
    if not ns:
        raise UsageError("--n is required")
    rows = bounds_rows(args.family, ns, args.k, args.srg)
    table = [[str(r["family"]), str(r["n"])] + [_fmt_gamma(r[c]) for c in BOUNDS_COLUMNS[2:]]
             for r in rows]
    widths = [max(len(c), *(len(t[i]) for t in table)) for i, c in enumerate(BOUNDS_COLUMNS)]
    print("  ".join(c.ljust(w) for c, w in zip(BOUNDS_COLUMNS, widths)))
    for t in table:
        print("  ".join(v.ljust(w) for v, w in zip(t, widths)))
    for r in rows:
        for c in ("gamma_closed_form", "gamma_refined"):
            if isinstance(r[c], bd.Unavailable):
                print(f"# n={r['n']} {c}: {r[c].reason}")
    if args.csv:
        with open(args.csv, "w") as fh:
            fh.write(",".join(BOUNDS_COLUMNS) + "\n")
            for t in table:
                fh.write(",".join(t) + "\n")
    return EXIT_OK


# ---------------------------------------------------------------------------
# simulate / sweep
# ---------------------------------------------------------------------------

def cmd_simulate(args) -> int:
    cfg = AlgorithmConfig(args.algo, **_algo_params(args))
    g, sc = parse_graph(args.graph, args.seed)
    if args.y is not None:
        if len(args.y) != g.n:
            raise UsageError(f"--y has {len(args.y)} values, graph has {g.n} nodes")
        sc = Scenario.from_graph(g, args.y, args.seed, 0)
    elif sc is None:
        rng = np.random.default_rng(np.random.SeedSequence(args.seed))
        sc = Scenario.from_graph(g, rng.random(g.n).tolist(), args.seed, 0)
    budget = args.budget if args.budget is not None else default_budget(g.n)
    result = run_once(sc, cfg, budget=budget, tol=args.tol, trace=args.trace is not None)
    if args.trace:
        export_trace(result, args.trace)
    if args.csv:
        export_csv(result, args.csv)
    status = "converged" if result.converged else "not converged"
    print(f"{cfg.kind}: {status} after {result.transmissions} transmissions "
          f"({result.iterations} iterations, n={g.n}, L={g.l}, budget={budget})")
    return EXIT_OK if result.converged else EXIT_BUDGET


def cmd_sweep(args) -> int:
    if not args.algos:
        raise UsageError("--algos must name at least one algorithm")
    for a in args.algos:
        if a not in KINDS:
            raise UsageError(f"unknown algorithm {a!r}; choose from {', '.join(KINDS)}")
    AlgorithmConfig(args.algos[0], **_algo_params(args))  # validates shared parameters
    cfg = SweepConfig(tuple(args.n), tuple(args.avg_degree), args.scenarios, tuple(args.algos),
                      master_seed=args.seed, tol=args.tol, budget_factor=args.budget_factor,
                      workers=args.workers, params=_algo_params(args))
    table = run_sweep(cfg)
    if args.out:
        export_csv(table, args.out)
    if args.runs_out:
        export_csv(table.runs, args.runs_out)
    for r in table.rows:
        print(f"n={r.n} avg_degree={r.avg_degree} {r.algorithm}: mean={r.mean_transmissions:.1f} "
              f"std={r.std_transmissions:.1f} converged={r.converged_fraction:.2f}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="hopavg", description=__doc__.split("\n\n")[0],
                formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    b = sub.add_parser("bounds", help="tabulate convergence-rate bounds",
                       formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    b.add_argument("--family", required=True,
                   choices=("path", "cycle", "complete", "k-regular", "strongly-regular"))
    b.add_argument("--n", type=_int_list, help="node count(s), comma-separated")
    b.add_argument("--k", type=int, help="degree K for k-regular (circulant construction)")
    b.add_argument("--srg", type=_int_list, help="strongly regular parameters N,K,LAMBDA,MU "
                   "(default: Petersen 10,3,0,1)")
    b.add_argument("--csv", help="also write the table as CSV")
    b.set_defaults(func=cmd_bounds)

    s = sub.add_parser("simulate", help="run one algorithm on one network",
                       formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    s.add_argument("--algo", required=True, choices=KINDS)
    s.add_argument("--graph", required=True, help=GRAPH_HELP)
    s.add_argument("--y", type=_float_list,
                   help="explicit observations, comma-separated (default: uniform (0,1) from --seed)")
    s.add_argument("--seed", type=int, default=0, help="master seed")
    s.add_argument("--budget", type=int, help="transmission budget (default 3*n^2)")
    s.add_argument("--tol", type=float, default=DEFAULT_TOL,
                   help="convergence criterion |x_hat_i - x*| <= tol for all i")
    s.add_argument("--trace", help="write per-iteration trace CSV here")
    s.add_argument("--csv", help="write the run result CSV here")
    _add_algo_params(s)
    s.set_defaults(func=cmd_simulate)

    w = sub.add_parser("sweep", help="average transmissions over random geometric scenarios",
                       formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    w.add_argument("--n", type=_int_list, required=True, help="node counts, comma-separated")
    w.add_argument("--avg-degree", type=_int_list, required=True,
                   help="average degrees 2L/N, comma-separated")
    w.add_argument("--scenarios", type=int, default=50, help="scenarios per (n, avg-degree) cell")
    w.add_argument("--algos", type=lambda t: [a for a in t.split(",") if a], required=True,
                   help=f"algorithms, comma-separated from {','.join(KINDS)}")
    w.add_argument("--seed", type=int, default=0, help="master seed")
    w.add_argument("--tol", type=float, default=DEFAULT_TOL,
                   help="convergence criterion |x_hat_i - x*| <= tol for all i")
    w.add_argument("--budget-factor", type=float, default=3.0,
                   help="budget = factor * n^2 transmissions")
    w.add_argument("--workers", type=int, default=1, help="worker processes")
    w.add_argument("--out", help="sweep CSV (one row per cell and algorithm)")
    w.add_argument("--runs-out", help="per-run CSV (one row per scenario and algorithm)")
    _add_algo_params(w)
    w.set_defaults(func=cmd_sweep)
    return p


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, GraphError, ValueError) as exc:
        print(f"hopavg {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
