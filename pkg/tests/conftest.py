import itertools

import numpy as np
import pytest

from fleetsched import evaluation, scenario as scen
from fleetsched.roadnet import (DEFAULT_COEFFICIENTS, RoadEdge, RoadGraph,
                                TrafficStatus, traffic_adjusted_weight)

SMALL_PARAMS = {
    "num_missions": 6, "Z": 6, "K_star": 2, "num_mec": 5,
    "grid_rows": 4, "grid_cols": 4,
}


def small_scenario(seed, **overrides):
    params = dict(SMALL_PARAMS)
    params.update(overrides)
    return scen.generate_scenario(seed, params)


@pytest.fixture(scope="session")
def default_scenario():
    return scen.generate_scenario(0)


def make_edge(eid, a, b, length, status=TrafficStatus.FREE_FLOW, coeff=None):
    if coeff is None:
        coeff = DEFAULT_COEFFICIENTS[int(status)]
    return RoadEdge(eid, a, b, length, status, coeff)


def random_graph(rng, n_nodes, extra_edges=20):
    """Connected random graph: a random spanning tree plus chords."""
    nodes = rng.uniform(0, 1000, size=(n_nodes, 2))
    edges = []
    for v in range(1, n_nodes):
        u = int(rng.integers(0, v))
        edges.append(make_edge(len(edges), u, v,
                               float(rng.uniform(10, 500)),
                               TrafficStatus(int(rng.integers(0, 5)))))
    for _ in range(extra_edges):
        u, v = rng.integers(0, n_nodes, size=2)
        if u == v:
            continue
        edges.append(make_edge(len(edges), int(u), int(v),
                               float(rng.uniform(10, 500)),
                               TrafficStatus(int(rng.integers(0, 5)))))
    return RoadGraph(nodes, edges)


def bellman_ford_cost(graph, src, dst):
    """Independent routing oracle: plain relaxation over adjusted weights."""
    n = graph.num_nodes
    dist = [float("inf")] * n
    dist[src] = 0.0
    for _ in range(n - 1):
        changed = False
        for e in graph.edges:
            w = traffic_adjusted_weight(e)
            for a, b in ((e.a, e.b), (e.b, e.a)):
                if dist[a] + w < dist[b]:
                    dist[b] = dist[a] + w
                    changed = True
        if not changed:
            break
    return dist[dst]


def enumerate_assignments(Z, K_star):
    """All structurally valid assignments under the balanced quota."""
    pattern = evaluation.quota_pattern(Z, K_star)
    slots = list(range(Z))

    def rec(vehicle, remaining):
        if vehicle > K_star or not remaining:
            if not remaining:
                yield []
            return
        load = pattern[vehicle - 1]
        if load == 0:
            if not remaining:
                yield []
            return
        for subset in itertools.combinations(remaining, load):
            rest = [i for i in remaining if i not in subset]
            for perm in itertools.permutations(subset):
                for tail in rec(vehicle + 1, rest):
                    yield [(vehicle, perm)] + tail

    for chunks in rec(1, slots):
        theta = np.zeros(Z, dtype=int)
        sigma = np.zeros(Z, dtype=int)
        for vehicle, perm in chunks:
            for order, slot in enumerate(perm, start=1):
                theta[slot] = vehicle
                sigma[slot] = order
        yield evaluation.AssignmentSolution(theta, sigma)


def brute_force_optimum(scenario):
    """Exhaustive-search optimum: max completed count and max fitness."""
    best_count, best_fitness = -1, -np.inf
    for D in enumerate_assignments(scenario.Z, scenario.K_star):
        report = evaluation.evaluate(D, scenario)
        best_count = max(best_count, report.completed_count)
        best_fitness = max(best_fitness, report.fitness)
    return best_count, best_fitness
