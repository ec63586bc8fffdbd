"""Undirected connected graphs: constructors, validation, and invariants.

Nodes are labelled 0..n-1. Links are stored as ``(u, v)`` pairs with
``u < v`` in canonical (lexicographic) order, and a link's id is its position
in that sequence.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

FAMILIES = ("path", "cycle", "complete", "k-regular", "strongly-regular", "geometric")

MAX_GEOMETRIC_REDRAWS = 1000


class GraphError(ValueError):
    """Raised when a graph cannot be built or fails validation."""


@dataclass(frozen=True)
class Graph:
    n: int
    links: tuple[tuple[int, int], ...]
    adjacency: tuple[tuple[tuple[int, int], ...], ...] = field(repr=False)
    positions: Optional[np.ndarray] = field(default=None, repr=False, compare=False)
    family: Optional[str] = None

    @property
    def l(self) -> int:  # noqa: E743
        return len(self.links)

    def degree(self, i: int) -> int:
        return len(self.adjacency[i])

    def degrees(self) -> list[int]:
        return [len(a) for a in self.adjacency]

    def neighbors(self, i: int) -> list[int]:
        return [j for j, _ in self.adjacency[i]]

    def has_link(self, i: int, j: int) -> bool:
        return any(k == j for k, _ in self.adjacency[i])


@dataclass(frozen=True)
class GraphInvariants:
    n: int
    l: int  # noqa: E741
    min_degree: int
    max_degree: int
    diameter: int
    family_tag: Optional[str] = None


def from_links(n: int, links: Sequence[tuple[int, int]], positions=None,
               family: Optional[str] = None) -> Graph:
    """Build and validate a graph from an arbitrary list of node pairs."""
    if n < 2:
        raise GraphError(f"need n >= 2 nodes, got {n}")
    canon = set()
    for u, v in links:
        u, v = int(u), int(v)
        if u == v:
            raise GraphError(f"self-loop at node {u}")
        if not (0 <= u < n and 0 <= v < n):
            raise GraphError(f"link ({u}, {v}) references a node outside 0..{n - 1}")
        pair = (min(u, v), max(u, v))
        if pair in canon:
            raise GraphError(f"duplicate link {pair}")
        canon.add(pair)
    ordered = tuple(sorted(canon))
    adj: list[list[tuple[int, int]]] = [[] for _ in range(n)]
    for e, (u, v) in enumerate(ordered):
        adj[u].append((v, e))
        adj[v].append((u, e))
    adjacency = tuple(tuple(sorted(a)) for a in adj)
    if positions is not None:
        positions = np.asarray(positions, dtype=float)
        if positions.shape != (n, 2):
            raise GraphError(f"positions must have shape ({n}, 2), got {positions.shape}")
        positions.setflags(write=False)
    g = Graph(n, ordered, adjacency, positions, family)
    if not is_connected(g):
        raise GraphError("graph is not connected")
    return g


def _bfs(adjacency, src: int) -> list[int]:
    dist = [-1] * len(adjacency)
    dist[src] = 0
    queue = deque([src])
    while queue:
        u = queue.popleft()
        for v, _ in adjacency[u]:
            if dist[v] < 0:
                dist[v] = dist[u] + 1
                queue.append(v)
    return dist


def is_connected(g: Graph) -> bool:
    return min(_bfs(g.adjacency, 0)) >= 0


def diameter(g: Graph) -> int:
    """Largest shortest-path hop count, by BFS from every node."""
    return max(max(_bfs(g.adjacency, s)) for s in range(g.n))


def graph_invariants(g: Graph) -> GraphInvariants:
    deg = g.degrees()
    return GraphInvariants(g.n, g.l, min(deg), max(deg), diameter(g), g.family)


def path_graph(n: int) -> Graph:
    if n < 2:
        raise GraphError(f"path needs n >= 2, got {n}")
    return from_links(n, [(i, i + 1) for i in range(n - 1)], family="path")


def cycle_graph(n: int) -> Graph:
    if n < 3:
        raise GraphError(f"cycle needs n >= 3, got {n}")
    return from_links(n, [(i, i + 1) for i in range(n - 1)] + [(0, n - 1)], family="cycle")


def complete_graph(n: int) -> Graph:
    if n < 2:
        raise GraphError(f"complete graph needs n >= 2, got {n}")
    return from_links(n, [(i, j) for i in range(n) for j in range(i + 1, n)],
                      family="complete")


def circulant_regular(n: int, k: int) -> Graph:
    """K-regular circulant: i ~ i±1..i±K/2, plus the antipode i+n/2 when K is odd."""
    if n < 3:
        raise GraphError(f"k-regular circulant needs n >= 3, got {n}")
    if not 2 <= k <= n - 1:
        raise GraphError(f"k-regular circulant needs 2 <= K <= n-1, got K={k}, n={n}")
    if k % 2 == 1 and n % 2 == 1:
        raise GraphError(f"odd K={k} requires even n, got n={n}")
    links = set()
    for i in range(n):
        for d in range(1, k // 2 + 1):
            j = (i + d) % n
            links.add((min(i, j), max(i, j)))
        if k % 2 == 1:
            j = (i + n // 2) % n
            links.add((min(i, j), max(i, j)))
    return from_links(n, sorted(links), family="k-regular")


def petersen_graph() -> Graph:
    """The (10, 3, 0, 1) strongly regular Petersen graph."""
    links = []
    for i in range(5):
        links.append((i, (i + 1) % 5))
        links.append((i, i + 5))
        links.append((i + 5, (i + 2) % 5 + 5))
    return from_links(10, links, family="strongly-regular")


def build_family(family: str, n: Optional[int] = None, k: Optional[int] = None) -> Graph:
    """Construct a named graph family with canonical labelling."""
    if family == "strongly-regular" or family == "petersen":
        if n not in (None, 10):
            raise GraphError(f"the Petersen fixture has n = 10, got n={n}")
        return petersen_graph()
    if n is None:
        raise GraphError(f"family {family!r} needs n")
    if family == "path":
        return path_graph(n)
    if family == "cycle":
        return cycle_graph(n)
    if family == "complete":
        return complete_graph(n)
    if family == "k-regular":
        if k is None:
            raise GraphError("k-regular needs K")
        return circulant_regular(n, k)
    raise GraphError(f"unknown family {family!r}")


def build_random_geometric(n: int, target_links: int, rng: np.random.Generator) -> Graph:
    """Uniform placement in the unit square, radius grown until ``target_links`` links.

    The radius is taken as the ``target_links``-th smallest pairwise distance,
    with ties ordered by canonical pair. Disconnected placements are redrawn.
    """
    if n < 2:
        raise GraphError(f"need n >= 2, got {n}")
    if not n - 1 <= target_links <= n * (n - 1) // 2:
        raise GraphError(
            f"target_links must lie in [{n - 1}, {n * (n - 1) // 2}] for n={n}, got {target_links}")
    iu, ju = np.triu_indices(n, k=1)
    for _ in range(MAX_GEOMETRIC_REDRAWS):
        pos = rng.random((n, 2))
        while np.any(pos == 0.0):  # open interval (0, 1)
            pos = np.where(pos == 0.0, rng.random((n, 2)), pos)
        d = np.hypot(pos[iu, 0] - pos[ju, 0], pos[iu, 1] - pos[ju, 1])
        chosen = np.sort(np.argsort(d, kind="stable")[:target_links])
        links = list(zip(iu[chosen].tolist(), ju[chosen].tolist()))
        try:
            return from_links(n, links, positions=pos, family="geometric")
        except GraphError:
            continue
    raise GraphError(
        f"{MAX_GEOMETRIC_REDRAWS} consecutive disconnected placements for n={n}, "
        f"L={target_links}; density too low")


def load_edge_list(path, positions_path=None, expect_degree: Optional[int] = None) -> Graph:
    """Read the ``n l`` header + ``u v`` lines format, optionally with ``i x y`` positions."""
    lines = [ln.split() for ln in Path(path).read_text().splitlines()
             if ln.strip() and not ln.lstrip().startswith("#")]
    if not lines or len(lines[0]) != 2:
        raise GraphError(f"{path}: first line must be 'n l'")
    n, l = int(lines[0][0]), int(lines[0][1])  # noqa: E741
    links = []
    for row in lines[1:]:
        if len(row) != 2:
            raise GraphError(f"{path}: expected 'u v', got {' '.join(row)!r}")
        u, v = int(row[0]), int(row[1])
        if u >= v:
            raise GraphError(f"{path}: links must be written with u < v, got {u} {v}")
        links.append((u, v))
    if len(links) != l:
        raise GraphError(f"{path}: header says {l} links, found {len(links)}")
    pos = None
    if positions_path is not None:
        pos = np.zeros((n, 2))
        seen = set()
        for ln in Path(positions_path).read_text().splitlines():
            if not ln.strip():
                continue
            i, x, y = ln.split()
            pos[int(i)] = (float(x), float(y))
            seen.add(int(i))
        if len(seen) != n:
            raise GraphError(f"{positions_path}: expected {n} positions, found {len(seen)}")
    g = from_links(n, links, positions=pos)
    if expect_degree is not None:
        bad = [i for i in range(n) if g.degree(i) != expect_degree]
        if bad:
            raise GraphError(f"node {bad[0]} has degree {g.degree(bad[0])}, expected {expect_degree}")
        g = Graph(g.n, g.links, g.adjacency, g.positions, "k-regular")
    return g


def write_edge_list(g: Graph, path) -> None:
    rows = [f"{g.n} {g.l}"] + [f"{u} {v}" for u, v in g.links]
    Path(path).write_text("\n".join(rows) + "\n")
