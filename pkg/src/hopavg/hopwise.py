"""Link-state storage and the hopwise update kernel shared by RHA, ICHA and CHA.

Every link ``{i, j}`` carries a weight ``c`` and a state value held twice,
once by each endpoint. A node's estimate is the ``c``-weighted mean of the
values it holds; its potential drop ``dv`` is the weighted squared spread of
those values around the estimate, i.e. the exact amount by which the
Lyapunov value would fall if that node broadcast its estimate now.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .graph import Graph

MAX_MATRIX_LINKS = 64


@dataclass(frozen=True)
class Weights:
    c: tuple[float, ...]
    b: tuple[float, ...]
    alpha: float
    beta: float


@dataclass(frozen=True)
class UpdateReceipt:
    initiator: int
    transmitted_value: float
    v_drop: float
    transmissions: int = 1


class OracleAccessError(RuntimeError):
    """The true average was read while the state was sealed."""


@dataclass
class HopwiseState:
    """Mutable per-run state. ``x_lo[e]``/``x_hi[e]`` are the copies held by the
    lower- and higher-numbered endpoint of link ``e``."""

    graph: Graph
    y: list[float]
    x_lo: list[float]
    x_hi: list[float]
    x_hat: list[float]
    delta_v: list[float]
    _x_star: float = field(repr=False)
    sealed: bool = field(default=False, repr=False)

    @property
    def x_star(self) -> float:
        if self.sealed:
            raise OracleAccessError("x_star read inside a sealed algorithm step")
        return self._x_star

    def copy_of(self, i: int, e: int) -> float:
        return self.x_lo[e] if self.graph.links[e][0] == i else self.x_hi[e]

    def link_values(self) -> np.ndarray:
        return np.asarray(self.x_lo, dtype=float)


def compute_weights(g: Graph) -> Weights:
    deg = g.degrees()
    c = tuple(1.0 / deg[u] + 1.0 / deg[v] for u, v in g.links)
    b = tuple(0.5 * math.fsum(c[e] for _, e in g.adjacency[i]) for i in range(g.n))
    alpha = max((b[u] + b[v]) / c[e] for e, (u, v) in enumerate(g.links))
    beta = math.fsum(b[i] * (b[i] + math.fsum(b[j] for j, _ in g.adjacency[i]))
                     for i in range(g.n))
    return Weights(c, b, alpha, beta)


def _node_stats(s: HopwiseState, w: Weights, i: int) -> tuple[float, float]:
    """Estimate and potential drop of node ``i`` from its own copies."""
    links = s.graph.links
    num = 0.0
    den = 0.0
    vals = []
    for _, e in s.graph.adjacency[i]:
        x = s.x_lo[e] if links[e][0] == i else s.x_hi[e]
        ce = w.c[e]
        num += ce * x
        den += ce
        vals.append((ce, x))
    xh = num / den
    dv = 0.0
    for ce, x in vals:
        dv += ce * (x - xh) ** 2
    return xh, dv


def estimate(s: HopwiseState, w: Weights, i: int) -> float:
    return _node_stats(s, w, i)[0]


def delta_v(s: HopwiseState, w: Weights, i: int) -> float:
    return _node_stats(s, w, i)[1]


def init_state(g: Graph, w: Weights, y: Sequence[float]) -> HopwiseState:
    y = [float(v) for v in y]
    if len(y) != g.n:
        raise ValueError(f"expected {g.n} observations, got {len(y)}")
    deg = g.degrees()
    x0 = [(y[u] / deg[u] + y[v] / deg[v]) / w.c[e] for e, (u, v) in enumerate(g.links)]
    s = HopwiseState(g, y, list(x0), list(x0), [0.0] * g.n, [0.0] * g.n,
                     _x_star=math.fsum(y) / g.n)
    for i in range(g.n):
        s.x_hat[i], s.delta_v[i] = _node_stats(s, w, i)
    return s


def lyapunov(s: HopwiseState, w: Weights) -> float:
    xs = s.x_star
    return math.fsum(ce * (x - xs) ** 2 for ce, x in zip(w.c, s.x_lo))


def conserved_sum(s: HopwiseState, w: Weights) -> float:
    return math.fsum(ce * x for ce, x in zip(w.c, s.x_lo))


def decomposition_rhs(s: HopwiseState, w: Weights) -> float:
    """Half the summed potential drops plus the b-weighted estimate error.

    Equals :func:`lyapunov` on any conservation-respecting state.
    """
    xs = s.x_star
    return (0.5 * math.fsum(s.delta_v)
            + math.fsum(bi * (xh - xs) ** 2 for bi, xh in zip(w.b, s.x_hat)))


def hopwise_update(s: HopwiseState, w: Weights, i: int) -> UpdateReceipt:
    """Node ``i`` sets its incident link states to its estimate and broadcasts it.

    Only ``i`` and its neighbours change; neighbour caches are refreshed from
    their own copies.
    """
    value = s.x_hat[i]
    drop = s.delta_v[i]
    adj = s.graph.adjacency
    for _, e in adj[i]:
        s.x_lo[e] = value
        s.x_hi[e] = value
    s.delta_v[i] = 0.0
    for j, _ in adj[i]:
        s.x_hat[j], s.delta_v[j] = _node_stats(s, w, j)
    return UpdateReceipt(i, value, drop)


def cache_errors(s: HopwiseState, w: Weights) -> tuple[float, float]:
    """Largest relative deviation of the x_hat and delta_v caches from recomputation."""
    ex = ed = 0.0
    for i in range(s.graph.n):
        xh, dv = _node_stats(s, w, i)
        ex = max(ex, abs(xh - s.x_hat[i]) / max(abs(xh), 1e-300))
        scale = max(abs(dv), max(s.delta_v), 1e-300)
        ed = max(ed, abs(dv - s.delta_v[i]) / scale)
    return ex, ed


def copies_coherent(s: HopwiseState) -> bool:
    return s.x_lo == s.x_hi


def update_matrix(g: Graph, w: Weights, i: int) -> np.ndarray:
    """Row-stochastic ``A_i`` with ``x(k) = A_i x(k-1)`` when node ``i`` initiates."""
    if g.l > MAX_MATRIX_LINKS:
        raise ValueError(f"update_matrix is for L <= {MAX_MATRIX_LINKS}, got L={g.l}")
    a = np.eye(g.l)
    incident = [e for _, e in g.adjacency[i]]
    row = np.zeros(g.l)
    for e in incident:
        row[e] = w.c[e]
    row /= row.sum()
    for e in incident:
        a[e] = row
    return a


def trace_record(s: HopwiseState, w: Weights, k: int, initiator: Optional[int],
                 cum_transmissions: int) -> dict:
    xs = s.x_star
    return {
        "k": k,
        "initiator": initiator,
        "cum_transmissions": cum_transmissions,
        "V": lyapunov(s, w),
        "max_abs_error": max(abs(v - xs) for v in s.x_hat),
    }
