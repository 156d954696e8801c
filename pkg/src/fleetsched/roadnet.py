"""Road network with per-edge congestion coefficients and traffic-aware routing.

The network is an undirected geometric graph. Every edge carries a congestion
level (five classes, fixed for the whole scheduling window) and a coefficient
that inflates its effective length; routing minimises the coefficient-weighted
length.
"""

from __future__ import annotations

import heapq
import json
from dataclasses import dataclass
from enum import IntEnum

import numpy as np


class TrafficStatus(IntEnum):
    FREE_FLOW = 0
    STABLE = 1
    SLOW = 2
    CONGESTED = 3
    SEVERE = 4


#: Default congestion multipliers per status. Strictly increasing, free flow
#: is neutral by definition.
DEFAULT_COEFFICIENTS = (1.0, 1.25, 1.75, 2.5, 4.0)


class NoPathError(Exception):
    """Destination not reachable from the source node."""


@dataclass(frozen=True)
class RoadEdge:
    id: int
    a: int
    b: int
    length_m: float
    status: TrafficStatus
    coefficient: float

    def __post_init__(self):
        if self.length_m <= 0:
            raise ValueError(f"edge {self.id}: length must be positive")
        if self.coefficient < 1.0:
            raise ValueError(f"edge {self.id}: coefficient must be >= 1")
        if self.a == self.b:
            raise ValueError(f"edge {self.id}: self-loop not allowed")


def traffic_adjusted_weight(edge: RoadEdge) -> float:
    """Effective cost of traversing ``edge`` (meters-equivalent)."""
    return edge.coefficient * edge.length_m


@dataclass(frozen=True)
class Route:
    nodes: tuple[int, ...]
    edges: tuple[int, ...]
    length_m: float
    adjusted_cost: float


class RoadGraph:
    """Immutable undirected road graph. Safe for concurrent queries."""

    def __init__(self, nodes: np.ndarray, edges: list[RoadEdge]):
        nodes = np.asarray(nodes, dtype=float).reshape(-1, 2)
        n = len(nodes)
        for e in edges:
            if not (0 <= e.a < n and 0 <= e.b < n):
                raise ValueError(f"edge {e.id} references invalid node")
        self.nodes = nodes
        self.nodes.setflags(write=False)
        self.edges = list(edges)
        adj: dict[int, list[tuple[int, int]]] = {i: [] for i in range(n)}
        for e in edges:
            adj[int(e.a)].append((int(e.b), e.id))
            adj[int(e.b)].append((int(e.a), e.id))
        # Sorted neighbour lists make iteration order deterministic.
        self._adj = {u: sorted(vs) for u, vs in adj.items()}

    @property
    def num_nodes(self) -> int:
        return len(self.nodes)

    def neighbors(self, u: int) -> list[tuple[int, int]]:
        return self._adj[u]

    def edge_between(self, u: int, v: int) -> RoadEdge:
        for w, eid in self._adj[u]:
            if w == v:
                return self.edges[eid]
        raise KeyError((u, v))

    def with_status(self, edge_id: int, status: TrafficStatus,
                    coefficients=DEFAULT_COEFFICIENTS) -> "RoadGraph":
        """Copy of the graph with one edge's congestion level replaced."""
        edges = list(self.edges)
        e = edges[edge_id]
        edges[edge_id] = RoadEdge(e.id, e.a, e.b, e.length_m,
                                  TrafficStatus(status),
                                  coefficients[int(status)])
        return RoadGraph(self.nodes, edges)


def shortest_route(graph: RoadGraph, src: int, dst: int) -> Route:
    """Minimum traffic-adjusted-cost route from ``src`` to ``dst``.

    Dijkstra over coefficient-weighted edge lengths. Among equal-cost paths
    the lexicographically smallest node sequence is returned, which makes the
    result deterministic across runs and platforms.
    """
    n = graph.num_nodes
    if not (0 <= src < n and 0 <= dst < n):
        raise ValueError("invalid src/dst node")
    if src == dst:
        return Route((src,), (), 0.0, 0.0)

    # Heap entries carry the full node path so that cost ties resolve to the
    # lexicographically smallest sequence.
    heap: list[tuple[float, tuple[int, ...]]] = [(0.0, (src,))]
    done: set[int] = set()
    while heap:
        cost, path = heapq.heappop(heap)
        u = path[-1]
        if u in done:
            continue
        done.add(u)
        if u == dst:
            edge_ids = []
            length = 0.0
            for a, b in zip(path, path[1:]):
                # parallel edges are possible; the route used the cheapest
                e = min((graph.edges[eid]
                         for v, eid in graph.neighbors(a) if v == b),
                        key=lambda e: (traffic_adjusted_weight(e), e.id))
                edge_ids.append(e.id)
                length += e.length_m
            return Route(path, tuple(edge_ids), length, cost)
        for v, eid in graph.neighbors(u):
            if v in done:
                continue
            w = traffic_adjusted_weight(graph.edges[eid])
            heapq.heappush(heap, (cost + w, path + (v,)))
    raise NoPathError(f"node {dst} unreachable from {src}")


# ---------------------------------------------------------------------------
# Synthetic map generation and JSON serialization
# ---------------------------------------------------------------------------

def generate_grid_map(rng: np.random.Generator,
                      rows: int = 6, cols: int = 6,
                      spacing_m: float = 1000.0,
                      chord_fraction: float = 0.1,
                      status_weights=(0.35, 0.25, 0.2, 0.12, 0.08),
                      coefficients=DEFAULT_COEFFICIENTS) -> RoadGraph:
    """Grid street network plus random diagonal chords.

    Stands in for a real city map: nodes at grid intersections, horizontal
    and vertical streets, and a few diagonal shortcuts. Congestion levels are
    sampled i.i.d. from ``status_weights``.
    """
    nodes = np.array([[c * spacing_m, r * spacing_m]
                      for r in range(rows) for c in range(cols)])

    def nid(r, c):
        return r * cols + c

    pairs = []
    for r in range(rows):
        for c in range(cols):
            if c + 1 < cols:
                pairs.append((nid(r, c), nid(r, c + 1)))
            if r + 1 < rows:
                pairs.append((nid(r, c), nid(r + 1, c)))
    n_chords = int(chord_fraction * len(pairs))
    existing = set(pairs)
    attempts = 0
    while n_chords > 0 and attempts < 50 * n_chords:
        attempts += 1
        r = rng.integers(0, rows - 1)
        c = rng.integers(0, cols - 1)
        a, b = nid(r, c), nid(r + 1, c + 1)
        if rng.random() < 0.5:
            a, b = nid(r, c + 1), nid(r + 1, c)
        if (a, b) in existing or (b, a) in existing:
            continue
        existing.add((a, b))
        pairs.append((a, b))
        n_chords -= 1

    edges = []
    for i, (a, b) in enumerate(pairs):
        length = float(np.hypot(*(nodes[a] - nodes[b])))
        status = TrafficStatus(rng.choice(5, p=np.asarray(status_weights)))
        edges.append(RoadEdge(i, int(a), int(b), length, status,
                              coefficients[status]))
    return RoadGraph(nodes, edges)


def graph_to_dict(graph: RoadGraph) -> dict:
    return {
        "nodes": [[float(x), float(y)] for x, y in graph.nodes],
        "edges": [{"a": int(e.a), "b": int(e.b), "length": float(e.length_m),
                   "status": int(e.status)} for e in graph.edges],
    }


def graph_from_dict(doc: dict, coefficients=DEFAULT_COEFFICIENTS) -> RoadGraph:
    nodes = np.asarray(doc["nodes"], dtype=float)
    edges = [
        RoadEdge(i, rec["a"], rec["b"], float(rec["length"]),
                 TrafficStatus(rec["status"]),
                 coefficients[int(rec["status"])])
        for i, rec in enumerate(doc["edges"])
    ]
    return RoadGraph(nodes, edges)


def save_map(graph: RoadGraph, path: str) -> None:
    with open(path, "w") as fh:
        json.dump(graph_to_dict(graph), fh, sort_keys=True)


def load_map(path: str, coefficients=DEFAULT_COEFFICIENTS) -> RoadGraph:
    with open(path) as fh:
        return graph_from_dict(json.load(fh), coefficients)
