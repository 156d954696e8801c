"""Scenario assembly: map + servers + vehicles + missions, all derived
deterministically from one seed, with JSON round-tripping."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import roadnet
from .missions import Mission, OffloadTask, validate_dependencies
from .radio import RadioUnit, Server, ServerKind, VehicleProfile
from .roadnet import RoadGraph, shortest_route


class InvalidParams(ValueError):
    pass


class InvalidScenario(ValueError):
    pass


# Table-driven radio defaults: 10 MHz cell split over 10 FDMA channels,
# 16-antenna radio units, -174 dBm/Hz noise floor, 150 Gbps fiber backhaul.
DEFAULT_RADIO = {
    "bandwidth_hz": 10e6,
    "channels": 10,
    "antennas": 16,
    "noise_psd_w_per_hz": 10 ** ((-174 - 30) / 10),
    "fiber_rate_bps": 150e9,
    "tx_power_w": 0.199526,
}

DEFAULT_PARAMS = {
    "num_missions": 25,
    "Z": 25,
    "K_star": 5,
    "num_mec": 20,
    "num_rus": 5,
    "dep_density": 0.15,
    "task_count_range": (1, 3),
    "alpha_range_bits": (2e6, 10e6),
    "beta_range_cycles": (2e8, 1e9),
    "deadline_slack": 3.0,
    "budget_range": (2.0, 10.0),
    "benefit_per_meter": 0.025,
    "comm_benefit_range": (50.0, 100.0),
    "v_max": 20.0,
    "coverage_radius_m": 2500.0,
    "mec_capacity_hz": 1e10,
    "cloud_capacity_hz": 1e11,
    "mec_unit_cost": 1.0,
    "cloud_unit_cost": 0.5,
    "overload_prob": 0.1,
    "grid_rows": 6,
    "grid_cols": 6,
    "grid_spacing_m": 1000.0,
}


@dataclass
class Scenario:
    seed: int
    graph: RoadGraph
    missions: list[Mission]
    vehicles: list[VehicleProfile]
    servers: list[Server]
    rus: list[RadioUnit]
    Z: int
    K_star: int
    comm_benefit: dict[int, float]
    noise_psd: float
    fiber_rate_bps: float
    params: dict = field(default_factory=dict)
    _routes: dict = field(default_factory=dict, repr=False)

    @property
    def vehicle_ids(self) -> list[int]:
        return [v.id for v in self.vehicles]

    def route_for(self, mission: Mission) -> roadnet.Route:
        key = (mission.start_node, mission.end_node)
        if key not in self._routes:
            self._routes[key] = shortest_route(self.graph, *key)
        return self._routes[key]


def generate_scenario(seed: int, params: dict | None = None) -> Scenario:
    """Build a complete scenario deterministically from ``seed``.

    Dependencies are sampled only from lower to higher mission ids, which
    guarantees acyclicity; deadlines are a configurable slack multiple of
    each mission's isolated delay estimate; mission benefit is proportional
    to its best-route length.
    """
    p = dict(DEFAULT_PARAMS)
    if params:
        p.update(params)
    _check_params(p)
    rng = np.random.default_rng(seed)

    graph = roadnet.generate_grid_map(
        rng, rows=p["grid_rows"], cols=p["grid_cols"],
        spacing_m=p["grid_spacing_m"])
    extent = graph.nodes.max(axis=0)

    rus = [RadioUnit(i, tuple(rng.uniform([0, 0], extent)),
                     DEFAULT_RADIO["antennas"], DEFAULT_RADIO["channels"],
                     DEFAULT_RADIO["bandwidth_hz"])
           for i in range(p["num_rus"])]

    servers = [Server(0, ServerKind.CLOUD, None, p["cloud_capacity_hz"],
                      p["cloud_unit_cost"])]
    for i in range(p["num_mec"]):
        servers.append(Server(i + 1, ServerKind.MEC,
                              tuple(rng.uniform([0, 0], extent)),
                              p["mec_capacity_hz"], p["mec_unit_cost"],
                              available=bool(rng.random() >= p["overload_prob"])))

    vehicles = [
        VehicleProfile(k + 1,
                       tuple(graph.nodes[rng.integers(graph.num_nodes)]),
                       p["v_max"], p["v_max"], p["coverage_radius_m"],
                       DEFAULT_RADIO["tx_power_w"])
        for k in range(p["K_star"])
    ]
    comm_benefit = {v.id: float(rng.uniform(*p["comm_benefit_range"]))
                    for v in vehicles}

    # Missions: endpoints, tasks, budgets, intra-row low-id -> high-id deps.
    Z = p["Z"]
    n_missions = p["num_missions"]
    raw = []
    for i in range(n_missions):
        start = int(rng.integers(graph.num_nodes))
        end = int(rng.integers(graph.num_nodes))
        while end == start:
            end = int(rng.integers(graph.num_nodes))
        n_tasks = int(rng.integers(p["task_count_range"][0],
                                   p["task_count_range"][1] + 1))
        tasks = tuple(OffloadTask(float(rng.uniform(*p["alpha_range_bits"])),
                                  float(rng.uniform(*p["beta_range_cycles"])))
                      for _ in range(n_tasks))
        budget = float(rng.uniform(*p["budget_range"]))
        raw.append((start, end, tasks, budget))

    preds: dict[int, set[int]] = {i: set() for i in range(n_missions)}
    succs: dict[int, set[int]] = {i: set() for i in range(n_missions)}
    for i in range(n_missions):
        for j in range(i + 1, n_missions):
            if i // Z != j // Z:
                continue  # keep both endpoints in the same row
            if rng.random() < p["dep_density"]:
                preds[j].add(i)
                succs[i].add(j)

    # Deadlines need isolated delay estimates, so assemble a provisional
    # scenario first and finish the missions afterwards.
    missions = [Mission(i, raw[i][0], raw[i][1], deadline_s=1.0,
                        budget=raw[i][3], preds=frozenset(preds[i]),
                        succs=frozenset(succs[i]), tasks=raw[i][2])
                for i in range(n_missions)]
    scenario = Scenario(seed=seed, graph=graph, missions=missions,
                        vehicles=vehicles, servers=servers, rus=rus,
                        Z=Z, K_star=p["K_star"], comm_benefit=comm_benefit,
                        noise_psd=DEFAULT_RADIO["noise_psd_w_per_hz"],
                        fiber_rate_bps=DEFAULT_RADIO["fiber_rate_bps"],
                        params=p)

    from .evaluation import isolated_delay  # deferred: circular import
    finished = []
    for m in missions:
        route = scenario.route_for(m)
        breakdown, _cost = isolated_delay(m, vehicles[0], scenario)
        finished.append(Mission(
            m.id, m.start_node, m.end_node,
            deadline_s=p["deadline_slack"] * breakdown.total_s,
            budget=m.budget, preds=m.preds, succs=m.succs, tasks=m.tasks,
            benefit_coeff=p["benefit_per_meter"] * route.length_m))
    scenario.missions = finished
    scenario._routes.clear()
    return scenario


def _check_params(p: dict) -> None:
    if p["num_missions"] < 0 or p["Z"] < 1 or p["K_star"] < 1:
        raise InvalidParams("counts must be positive")
    if not (0 <= p["dep_density"] < 1):
        raise InvalidParams("dep_density must lie in [0, 1)")
    for key in ("task_count_range", "alpha_range_bits", "beta_range_cycles",
                "budget_range", "comm_benefit_range"):
        lo, hi = p[key]
        if lo > hi or lo < 0:
            raise InvalidParams(f"bad range for {key}")
    if p["deadline_slack"] <= 0:
        raise InvalidParams("deadline_slack must be positive")


# ---------------------------------------------------------------------------
# JSON serialization
# ---------------------------------------------------------------------------

def scenario_to_dict(s: Scenario) -> dict:
    return {
        "header": {"seed": s.seed, "Z": s.Z, "K_star": s.K_star},
        "map": roadnet.graph_to_dict(s.graph),
        "missions": [
            {"id": m.id, "start": m.start_node, "end": m.end_node,
             "deadline": m.deadline_s, "budget": m.budget,
             "preds": sorted(m.preds), "succs": sorted(m.succs),
             "benefit_coeff": m.benefit_coeff,
             "tasks": [{"alpha": t.alpha_bits, "beta": t.beta_cycles}
                       for t in m.tasks]}
            for m in s.missions
        ],
        "vehicles": [
            {"id": v.id, "pos": list(v.position), "v_max": v.v_max,
             "v_avg": v.v_avg, "coverage": v.coverage_radius_m,
             "tx_power": v.tx_power_w,
             "comm_benefit": s.comm_benefit[v.id]}
            for v in s.vehicles
        ],
        "servers": [
            {"id": sv.id, "kind": sv.kind.value,
             "pos": list(sv.position) if sv.position else None,
             "f": sv.capacity_hz, "c": sv.unit_cost,
             "available": sv.available}
            for sv in s.servers
        ],
        "rus": [
            {"id": r.id, "pos": list(r.position), "E": r.antennas,
             "U": r.channels, "W": r.bandwidth_hz}
            for r in s.rus
        ],
        "radio": {"noise_psd": s.noise_psd, "fiber_rate": s.fiber_rate_bps},
    }


def scenario_from_dict(doc: dict) -> Scenario:
    try:
        graph = roadnet.graph_from_dict(doc["map"])
        missions = [
            Mission(rec["id"], rec["start"], rec["end"], rec["deadline"],
                    rec["budget"], frozenset(rec["preds"]),
                    frozenset(rec["succs"]),
                    tuple(OffloadTask(t["alpha"], t["beta"])
                          for t in rec["tasks"]),
                    rec["benefit_coeff"])
            for rec in doc["missions"]
        ]
        vehicles = [VehicleProfile(rec["id"], tuple(rec["pos"]),
                                   rec["v_max"], rec["v_avg"],
                                   rec["coverage"], rec["tx_power"])
                    for rec in doc["vehicles"]]
        comm_benefit = {rec["id"]: rec["comm_benefit"]
                        for rec in doc["vehicles"]}
        servers = [Server(rec["id"], ServerKind(rec["kind"]),
                          tuple(rec["pos"]) if rec["pos"] else None,
                          rec["f"], rec["c"], rec["available"])
                   for rec in doc["servers"]]
        rus = [RadioUnit(rec["id"], tuple(rec["pos"]), rec["E"],
                         rec["U"], rec["W"]) for rec in doc["rus"]]
        return Scenario(seed=doc["header"]["seed"], graph=graph,
                        missions=missions, vehicles=vehicles,
                        servers=servers, rus=rus, Z=doc["header"]["Z"],
                        K_star=doc["header"]["K_star"],
                        comm_benefit=comm_benefit,
                        noise_psd=doc["radio"]["noise_psd"],
                        fiber_rate_bps=doc["radio"]["fiber_rate"])
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidScenario(str(exc)) from exc


def save_scenario(s: Scenario, path: str) -> None:
    if problems := validate_dependencies(s.missions):
        raise InvalidScenario("; ".join(problems))
    with open(path, "w") as fh:
        json.dump(scenario_to_dict(s), fh, sort_keys=True)


def load_scenario(path: str) -> Scenario:
    with open(path) as fh:
        return scenario_from_dict(json.load(fh))
