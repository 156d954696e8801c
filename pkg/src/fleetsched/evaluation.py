"""Assignment solutions, constraint validation, completion-time aggregation
and the scalar fitness shared by all solvers."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .missions import Mission
from .radio import VehicleProfile, greedy_offload
from .scenario import Scenario

#: Fitness weights (benefit sum, remaining-budget sum).
DEFAULT_GAMMAS = (1.0, 0.5)

UNASSIGNED = 0


class DuplicateOrder(ValueError):
    pass


@dataclass
class AssignmentSolution:
    """Per-mission (vehicle, order) decision for one row of Z missions.

    ``theta[i]`` is the vehicle id handling mission slot i (0 = unassigned),
    ``sigma[i]`` its 1-based processing order on that vehicle.
    """
    theta: np.ndarray
    sigma: np.ndarray

    def __post_init__(self):
        self.theta = np.asarray(self.theta, dtype=int)
        self.sigma = np.asarray(self.sigma, dtype=int)
        if self.theta.shape != self.sigma.shape:
            raise ValueError("theta and sigma must have equal length")

    @property
    def Z(self) -> int:
        return len(self.theta)


def derive_vehicle_schedules(D: AssignmentSolution) -> dict[int, list[int]]:
    """Partition mission slots by vehicle, each sorted by ascending order."""
    seen = set()
    for i in range(D.Z):
        if D.theta[i] == UNASSIGNED:
            continue
        key = (int(D.theta[i]), int(D.sigma[i]))
        if key in seen:
            raise DuplicateOrder(
                f"vehicle {key[0]} has two missions with order {key[1]}")
        seen.add(key)
    schedules: dict[int, list[int]] = {}
    for i in np.argsort(D.sigma, kind="stable"):
        v = int(D.theta[i])
        if v != UNASSIGNED:
            schedules.setdefault(v, []).append(int(i))
    return schedules


def quota(Z: int, K_star: int) -> int:
    return math.ceil(Z / K_star)


def quota_pattern(Z: int, K_star: int) -> list[int]:
    """Canonical balanced load vector: blocks of ceil(Z/K*) missions."""
    q = quota(Z, K_star)
    return [min(q, max(0, Z - v * q)) for v in range(K_star)]


def validate(D: AssignmentSolution, missions: list[Mission],
             K_star: int) -> list[str]:
    """Check structural and precedence constraints; empty list means valid.

    Reported constraints: every mission carries exactly one vehicle; at most
    one order per mission and distinct orders within a vehicle; a balanced
    vehicle-count quota (exactly the block loads implied by K*); and
    predecessors ordered strictly before their dependents.
    """
    problems = []
    Z = D.Z
    for i in range(Z):
        if D.theta[i] == UNASSIGNED:
            problems.append(f"mission slot {i}: no vehicle assigned")
        elif D.sigma[i] < 1:
            problems.append(f"mission slot {i}: order must be >= 1")

    per_vehicle: dict[int, list[int]] = {}
    for i in range(Z):
        if D.theta[i] != UNASSIGNED:
            per_vehicle.setdefault(int(D.theta[i]), []).append(int(D.sigma[i]))
    for v, orders in sorted(per_vehicle.items()):
        if len(set(orders)) != len(orders):
            problems.append(f"vehicle {v}: duplicate scheduling orders")

    loads = sorted((len(o) for o in per_vehicle.values()), reverse=True)
    expected = sorted((c for c in quota_pattern(Z, K_star) if c > 0),
                      reverse=True)
    if loads != expected:
        problems.append(
            f"vehicle loads {loads} do not match the balanced quota "
            f"{expected} for K*={K_star}")

    index_of = {m.id: i for i, m in enumerate(missions)}
    for i, m in enumerate(missions):
        for p in m.preds:
            j = index_of.get(p)
            if j is None:
                continue
            if D.sigma[j] >= D.sigma[i]:
                problems.append(
                    f"mission {m.id}: predecessor {p} has order "
                    f"{D.sigma[j]} >= {D.sigma[i]}")
    return problems


@dataclass(frozen=True)
class DelayBreakdown:
    move_s: float
    comm_s: float
    comp_s: float

    @property
    def total_s(self) -> float:
        return self.move_s + self.comm_s + self.comp_s


def isolated_delay(mission: Mission, vehicle: VehicleProfile,
                   scenario: Scenario,
                   rng: np.random.Generator | None = None
                   ) -> tuple[DelayBreakdown, float]:
    """Delay of one mission executed with an empty queue, plus offload cost.

    Travel time is the traffic-adjusted route cost over the vehicle's average
    speed; each attached task is offloaded greedily from the mission's start
    point. Channel fading draws come from a substream keyed by the scenario
    seed and the mission id, so the result is a pure function of the
    scenario.
    """
    if mission.padding:
        return DelayBreakdown(0.0, 0.0, 0.0), 0.0
    if rng is None:
        rng = np.random.default_rng([scenario.seed, mission.id, 0xD])
    route = scenario.route_for(mission)
    move_s = route.adjusted_cost / vehicle.v_avg

    start_pos = tuple(scenario.graph.nodes[mission.start_node])
    probe = replace(vehicle, position=start_pos)
    comm = comp = cost = 0.0
    for task in mission.tasks:
        dec = greedy_offload(probe, task, scenario.servers, scenario.rus,
                             scenario.noise_psd, scenario.fiber_rate_bps, rng)
        comm += dec.comm_s
        comp += dec.comp_s
        cost += dec.cost
    return DelayBreakdown(move_s, comm, comp), cost


@dataclass
class ScenarioCache:
    """Assignment-independent per-mission arrays, computed once."""
    delays: np.ndarray
    costs: np.ndarray
    budgets: np.ndarray
    remaining: np.ndarray
    benefits: np.ndarray
    deadlines: np.ndarray
    padding: np.ndarray
    preds_idx: list[np.ndarray]


def mission_profiles(scenario: Scenario) -> tuple[np.ndarray, np.ndarray]:
    """Cached per-mission (total isolated delay, offload cost) arrays."""
    cache = scenario_cache(scenario)
    return cache.delays, cache.costs


def scenario_cache(scenario: Scenario) -> ScenarioCache:
    cached = getattr(scenario, "_eval_cache", None)
    if cached is not None:
        return cached
    missions = scenario.missions
    n = len(missions)
    delays = np.empty(n)
    costs = np.empty(n)
    for i, m in enumerate(missions):
        bd, c = isolated_delay(m, scenario.vehicles[0], scenario)
        delays[i] = bd.total_s
        costs[i] = c
    budgets = np.array([m.budget for m in missions])
    index_of = {m.id: i for i, m in enumerate(missions)}
    preds_idx = [np.array(sorted(index_of[p] for p in m.preds
                                 if p in index_of), dtype=int)
                 for m in missions]
    cache = ScenarioCache(
        delays=delays, costs=costs, budgets=budgets,
        remaining=budgets - costs,
        benefits=np.array([m.benefit_coeff for m in missions]),
        deadlines=np.array([m.deadline_s for m in missions]),
        padding=np.array([m.padding for m in missions]),
        preds_idx=preds_idx)
    scenario._eval_cache = cache
    return cache


def mct_bound(D: AssignmentSolution, delays: np.ndarray,
              missions: list[Mission]) -> np.ndarray:
    """Completion time per mission slot (the lower bound taken as realized).

    For each mission: its own delay, plus every earlier-ordered mission on
    the same vehicle, plus, for each predecessor handled by another vehicle,
    that predecessor's delay together with everything queued before it
    there. Unassigned slots get +inf.
    """
    Z = D.Z
    theta, sigma = D.theta, D.sigma
    assigned = theta != UNASSIGNED
    index_of = {m.id: i for i, m in enumerate(missions)}

    # Completion time on the own vehicle: own delay plus the queue ahead,
    # via per-vehicle prefix sums in sigma order.
    through_queue = np.full(Z, np.inf)
    order = np.lexsort((sigma, theta))
    acc = 0.0
    prev_vehicle = None
    for i in order:
        if not assigned[i]:
            continue
        if theta[i] != prev_vehicle:
            acc = 0.0
            prev_vehicle = theta[i]
        acc += delays[i]
        through_queue[i] = acc

    delta = through_queue.copy()
    for i in range(Z):
        if not assigned[i]:
            continue
        for p in missions[i].preds:
            ip = index_of.get(p)
            if ip is None or not assigned[ip] or theta[ip] == theta[i]:
                continue
            # predecessor elsewhere: wait for it and its own queue
            delta[i] += through_queue[ip]
    return delta


@dataclass
class EvalReport:
    mct_s: np.ndarray
    completed: np.ndarray
    costs: np.ndarray
    remaining_budget: np.ndarray
    completed_count: int
    total_benefit: float
    fitness: float

    def csv_row(self, seed: int, algo: str, wall_ms: float) -> str:
        return (f"{seed},{algo},{self.fitness:.6f},{self.completed_count},"
                f"{self.total_benefit:.6f},{wall_ms:.3f}")


def evaluate(D: AssignmentSolution, scenario: Scenario,
             gammas: tuple[float, float] = DEFAULT_GAMMAS) -> EvalReport:
    """Score an assignment: completion flags, benefit and scalar fitness.

    A mission counts as completed when it finishes before its deadline, its
    offloading stays within budget, and every predecessor has a strictly
    lower order. Precedence or budget violations mark the mission failed
    rather than invalidating the whole solution, so any decoded candidate is
    scoreable.
    """
    missions = scenario.missions
    cache = scenario_cache(scenario)
    delta = mct_bound(D, cache.delays, missions)
    remaining = cache.remaining

    completed = np.zeros(D.Z, dtype=bool)
    theta, sigma = D.theta, D.sigma
    for i in range(D.Z):
        if cache.padding[i] or theta[i] == UNASSIGNED:
            continue
        if delta[i] > cache.deadlines[i] or remaining[i] < 0:
            continue
        ok = True
        for ip in cache.preds_idx[i]:
            if theta[ip] == UNASSIGNED or sigma[ip] >= sigma[i]:
                ok = False
                break
        completed[i] = ok

    g1, g2 = gammas
    benefit = float(cache.benefits[completed].sum())
    budget_left = float(remaining[completed].sum())
    fitness = g1 * benefit + g2 * budget_left

    active_vehicles = {int(theta[i]) for i in np.flatnonzero(completed)}
    total_benefit = benefit + sum(scenario.comm_benefit.get(v, 0.0)
                                  for v in active_vehicles)
    return EvalReport(mct_s=delta, completed=completed, costs=cache.costs,
                      remaining_budget=remaining,
                      completed_count=int(completed.sum()),
                      total_benefit=float(total_benefit),
                      fitness=float(fitness))
