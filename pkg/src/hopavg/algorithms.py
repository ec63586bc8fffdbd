"""Step functions for the seven averaging algorithms and a uniform run wrapper.

Hopwise variants (``rha``, ``icha``, ``cha``) act on a :class:`HopwiseState`.
The baselines (``pa``, ``cp``, ``a2``, ``drg``) keep one estimate per node
plus whatever per-directed-link bookkeeping they need.

Directed links are numbered ``2e`` for ``u -> v`` and ``2e + 1`` for
``v -> u``, where ``(u, v)`` is undirected link ``e`` with ``u < v``.

Randomness comes from a single ``numpy.random.Generator`` per run. Within a
step the initiator (node, link or directed link) is drawn first, then any
tie-break draw, then the jitter draws of CHA in neighbour order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

from .graph import Graph
from .hopwise import HopwiseState, Weights, compute_weights, hopwise_update, init_state, lyapunov

INF = math.inf

HOPWISE_KINDS = ("rha", "icha", "cha")
BASELINE_KINDS = ("pa", "cp", "a2", "drg")
KINDS = HOPWISE_KINDS + BASELINE_KINDS


@dataclass(frozen=True)
class AlgorithmConfig:
    """Algorithm choice and tuning. CHA uses the reciprocal schedule
    ``phi(v) = cha_c / v`` with constant jitter width ``cha_eps``."""

    kind: str
    cha_c: float = 1.0
    cha_eps: float = 0.001
    cp_beta: float = 1e6
    a2_gamma: float = 0.3
    a2_phi: float = 0.49

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown algorithm {self.kind!r}; choose from {', '.join(KINDS)}")
        if not self.cha_c > 0:
            raise ValueError(f"cha_c must be > 0, got {self.cha_c}")
        if not self.cha_eps >= 0:
            raise ValueError(f"cha_eps must be >= 0, got {self.cha_eps}")
        if not self.cp_beta > 0:
            raise ValueError(f"cp_beta must be in (0, inf], got {self.cp_beta}")
        if not 0 < self.a2_gamma < 1:
            raise ValueError(f"a2_gamma must be in (0, 1), got {self.a2_gamma}")
        if not 0 < self.a2_phi < 0.5:
            raise ValueError(f"a2_phi must be in (0, 1/2), got {self.a2_phi}")

    def phi(self, v: float) -> float:
        return self.cha_c / v if v > 0 else INF

    def phi_inverse(self, t: float) -> float:
        return self.cha_c / t


Initiator = Union[int, tuple[int, int], None]


@dataclass(frozen=True)
class StepOutcome:
    transmissions: int
    initiator: Initiator
    terminated: bool = False
    touched: Optional[tuple[int, ...]] = None  # nodes whose estimate may have changed; None = all
    event_time: Optional[float] = None
    v_drop: Optional[float] = None


@dataclass
class ChaSchedule:
    tau: list[float]
    t_now: float = 0.0
    finite: int = 0

    def all_infinite(self) -> bool:
        return self.finite == 0


@dataclass
class BaselineState:
    """Per-node estimates plus algorithm bookkeeping.

    ``k``/``mu`` (CP) are indexed by directed link and held by its receiver.
    ``delta`` (A2) is indexed by directed link ``j -> i`` and held by ``i``.
    """

    y: np.ndarray
    x_hat: np.ndarray
    k: Optional[list[float]] = None
    mu: Optional[list[float]] = None
    delta: Optional[np.ndarray] = None
    delta_sum: Optional[np.ndarray] = field(default=None, repr=False)


def _rand_open(rng: np.random.Generator) -> float:
    r = rng.random()
    while r == 0.0:
        r = rng.random()
    return r


def _directed(g: Graph, src: int, e: int) -> int:
    return 2 * e if g.links[e][0] == src else 2 * e + 1


def _draw_directed(g: Graph, rng: np.random.Generator) -> tuple[int, int, int]:
    d = int(rng.integers(2 * g.l))
    u, v = g.links[d // 2]
    return (u, v, d) if d % 2 == 0 else (v, u, d)


# ---------------------------------------------------------------------------
# Hopwise family
# ---------------------------------------------------------------------------

def _hopwise_outcome(s: HopwiseState, i: int, receipt, **extra) -> StepOutcome:
    touched = (i,) + tuple(j for j, _ in s.graph.adjacency[i])
    return StepOutcome(1, i, touched=touched, v_drop=receipt.v_drop, **extra)


def step_rha(s: HopwiseState, w: Weights, rng: np.random.Generator) -> StepOutcome:
    i = int(rng.integers(s.graph.n))
    return _hopwise_outcome(s, i, hopwise_update(s, w, i))


def step_icha(s: HopwiseState, w: Weights) -> StepOutcome:
    dv = s.delta_v
    m = max(dv)
    if m <= 0.0:
        return StepOutcome(0, None, terminated=True, touched=())
    i = dv.index(m)  # lowest id among the maximisers
    receipt = hopwise_update(s, w, i)
    return _hopwise_outcome(s, i, receipt, terminated=max(dv) <= 0.0)


def cha_schedule_init(s: HopwiseState, cfg: AlgorithmConfig,
                      rng: np.random.Generator) -> ChaSchedule:
    tau = []
    for v in s.delta_v:
        t = cfg.phi(v)
        if t < INF and cfg.cha_eps > 0:
            t += cfg.cha_eps * _rand_open(rng)
        tau.append(t)
    return ChaSchedule(tau, 0.0, sum(1 for t in tau if t < INF))


def step_cha(s: HopwiseState, w: Weights, sched: ChaSchedule, cfg: AlgorithmConfig,
             rng: np.random.Generator) -> StepOutcome:
    tau = sched.tau
    if sched.finite == 0:
        raise RuntimeError("step_cha called with every event time infinite")
    t = min(tau)
    if cfg.cha_eps > 0:
        i = tau.index(t)
    else:
        ties = [j for j, tj in enumerate(tau) if tj == t]
        i = ties[0] if len(ties) == 1 else ties[int(rng.integers(len(ties)))]
    sched.t_now = t
    receipt = hopwise_update(s, w, i)
    tau[i] = INF
    sched.finite -= 1
    for j, _ in s.graph.adjacency[i]:
        was_finite = tau[j] < INF
        p = cfg.phi(s.delta_v[j])
        if p < INF:
            p = max(p, t)
            if cfg.cha_eps > 0:
                p += cfg.cha_eps * _rand_open(rng)
        tau[j] = p
        sched.finite += (p < INF) - was_finite
    return _hopwise_outcome(s, i, receipt, terminated=sched.finite == 0, event_time=t)


# ---------------------------------------------------------------------------
# Baselines
# ---------------------------------------------------------------------------

def init_baseline(g: Graph, y: Sequence[float], kind: str) -> BaselineState:
    y = np.asarray(y, dtype=float)
    st = BaselineState(y=y.copy(), x_hat=y.copy())
    if kind == "cp":
        st.k = [0.0] * (2 * g.l)
        st.mu = [0.0] * (2 * g.l)
    elif kind == "a2":
        st.delta = np.zeros(2 * g.l)
        st.delta_sum = np.zeros(g.n)
    return st


def step_pa(st: BaselineState, g: Graph, rng: np.random.Generator) -> StepOutcome:
    e = int(rng.integers(g.l))
    i, j = g.links[e]
    xh = st.x_hat
    m = (xh[i] + xh[j]) / 2
    xh[j] = m
    xh[i] = xh[j]
    return StepOutcome(2, (i, j), touched=(i, j))


def step_cp(st: BaselineState, g: Graph, beta: float, rng: np.random.Generator) -> StepOutcome:
    i, j, d = _draw_directed(g, rng)
    k, mu = st.k, st.mu
    sum_k = 0.0
    sum_km = 0.0
    for ell, e in g.adjacency[i]:
        if ell == j:
            continue
        din = _directed(g, ell, e)
        sum_k += k[din]
        sum_km += k[din] * mu[din]
    inv_beta = 0.0 if math.isinf(beta) else 1.0 / beta
    k[d] = (1.0 + sum_k) / (1.0 + inv_beta * (1.0 + sum_k))
    mu[d] = (st.y[i] + sum_km) / (1.0 + sum_k)
    tot_k = 0.0
    tot_km = 0.0
    for ell, e in g.adjacency[j]:
        din = _directed(g, ell, e)
        tot_k += k[din]
        tot_km += k[din] * mu[din]
    st.x_hat[j] = (st.y[j] + tot_km) / (1.0 + tot_k)
    return StepOutcome(2, (i, j), touched=(j,))


def step_a2(st: BaselineState, g: Graph, gamma: float, phi: float,
            rng: np.random.Generator, gain: Optional[np.ndarray] = None) -> StepOutcome:
    i, j, d = _draw_directed(g, rng)
    xh = st.x_hat
    delta = phi * (xh[i] - xh[j])
    st.delta[d] += delta            # delta_ji, held by j
    st.delta[d ^ 1] -= delta        # delta_ij, held by i
    st.delta_sum[j] += delta
    st.delta_sum[i] -= delta
    if gain is None:
        gain = gamma / (np.asarray(g.degrees(), dtype=float) + 1.0)
    xh += gain * (st.delta_sum + st.y - xh)
    return StepOutcome(2, (i, j), touched=None)


def drg_group(g: Graph, leader: int) -> tuple[int, ...]:
    return (leader,) + tuple(j for j, _ in g.adjacency[leader])


def step_drg(st: BaselineState, g: Graph, rng: np.random.Generator,
             leader: Optional[int] = None) -> StepOutcome:
    """One grouping round. ``leader`` may be pre-drawn so the caller can check
    its cost (``degree + 1``) against a budget before committing."""
    if leader is None:
        leader = int(rng.integers(g.n))
    group = drg_group(g, leader)
    xh = st.x_hat
    m = math.fsum(xh[v] for v in group) / len(group)
    for v in group:
        xh[v] = m
    return StepOutcome(len(group), leader, touched=group)


# ---------------------------------------------------------------------------
# Uniform run interface
# ---------------------------------------------------------------------------

class AlgorithmRun:
    """One algorithm executing on one graph and observation vector.

    ``peek_cost()`` reports the real-number transmissions of the next step
    without changing the estimates; ``step()`` then performs it.
    """

    def __init__(self, graph: Graph, y: Sequence[float], config: AlgorithmConfig,
                 rng: np.random.Generator):
        self.graph = graph
        self.config = config
        self.kind = config.kind
        self.rng = rng
        self.hopwise = self.kind in HOPWISE_KINDS
        self.schedule: Optional[ChaSchedule] = None
        self._pending: Optional[int] = None
        self.event_time: Optional[float] = None
        if self.hopwise:
            self.weights = compute_weights(graph)
            self.state = init_state(graph, self.weights, y)
            self.init_overhead = 2 * graph.n
            if self.kind == "cha":
                self.schedule = cha_schedule_init(self.state, config, rng)
                self.terminated = self.schedule.all_infinite()
            else:
                self.terminated = self.kind == "icha" and max(self.state.delta_v) <= 0.0
        else:
            self.weights = None
            self.state = init_baseline(graph, y, self.kind)
            self.init_overhead = 0
            self.terminated = False
            if self.kind == "a2":
                self._gain = config.a2_gamma / (np.asarray(graph.degrees(), dtype=float) + 1.0)

    @property
    def estimates(self):
        return self.state.x_hat

    def snapshot(self) -> np.ndarray:
        return np.array(self.state.x_hat, dtype=float)

    def peek_cost(self) -> int:
        if self.hopwise:
            return 1
        if self.kind == "drg":
            if self._pending is None:
                self._pending = int(self.rng.integers(self.graph.n))
            return self.graph.degree(self._pending) + 1
        return 2

    def step(self) -> StepOutcome:
        if self.terminated:
            raise RuntimeError(f"{self.kind} run has terminated")
        kind, cfg, st, g = self.kind, self.config, self.state, self.graph
        if kind == "rha":
            out = step_rha(st, self.weights, self.rng)
        elif kind == "icha":
            out = step_icha(st, self.weights)
        elif kind == "cha":
            out = step_cha(st, self.weights, self.schedule, cfg, self.rng)
            self.event_time = out.event_time
        elif kind == "pa":
            out = step_pa(st, g, self.rng)
        elif kind == "cp":
            out = step_cp(st, g, cfg.cp_beta, self.rng)
        elif kind == "a2":
            out = step_a2(st, g, cfg.a2_gamma, cfg.a2_phi, self.rng, gain=self._gain)
        else:
            self.peek_cost()
            out = step_drg(st, g, self.rng, leader=self._pending)
            self._pending = None
        self.terminated = out.terminated
        return out

    def lyapunov(self) -> Optional[float]:
        return lyapunov(self.state, self.weights) if self.hopwise else None


def initialize(graph: Graph, y: Sequence[float], config: AlgorithmConfig,
               seed) -> AlgorithmRun:
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    return AlgorithmRun(graph, y, config, rng)
