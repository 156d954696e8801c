"""Population-based solvers over continuous random-key genotypes.

A genotype has 2Z coordinates: Z mission keys in [1, Z] whose argsort gives
the processing permutation, and Z vehicle keys in [1, K*] that are
quota-repaired into a balanced vehicle assignment. The update rules operate
on the continuous vector; decoding keeps every candidate structurally
feasible.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .evaluation import AssignmentSolution, evaluate, quota
from .scenario import Scenario


class DomainError(ValueError):
    pass


class IndexCollision(ValueError):
    pass


@dataclass
class OptimizerConfig:
    pop_size: int = 30
    iterations: int = 1000
    rho: float = 0.4
    seed: int = 0

    def __post_init__(self):
        if self.pop_size < 4:
            raise ValueError("population must be >= 4")
        if not (0 < self.rho < 0.5):
            raise ValueError("rho must lie in (0, 0.5)")


@dataclass
class TracePoint:
    generation: int
    best_fitness: float
    mean_fitness: float
    completed_at_best: int


@dataclass
class OptimizerResult:
    best_solution: AssignmentSolution
    best_fitness: float
    best_genotype: np.ndarray
    trace: list[TracePoint]
    wall_s: float
    evaluations: int


def bounds(Z: int, K_star: int) -> tuple[np.ndarray, np.ndarray]:
    lb = np.ones(2 * Z)
    ub = np.concatenate([np.full(Z, float(Z)), np.full(Z, float(K_star))])
    return lb, ub


def decode(x: np.ndarray, Z: int, K_star: int,
           vehicle_ids: list[int] | None = None) -> AssignmentSolution:
    """Continuous genotype -> feasible (vehicle, order) assignment.

    Mission keys are argsorted (stable, so key ties fall back to slot index)
    into a processing permutation. Vehicle keys are rank-repaired: slots are
    ranked by key and handed out in blocks of ceil(Z/K*) per vehicle, which
    enforces the balanced quota by construction. Orders are running counts
    per vehicle along the permutation.
    """
    if vehicle_ids is None:
        vehicle_ids = list(range(1, K_star + 1))
    mission_keys = np.asarray(x[:Z], dtype=float)
    vehicle_keys = np.asarray(x[Z:2 * Z], dtype=float)
    q = quota(Z, K_star)

    theta = np.empty(Z, dtype=int)
    for rank, slot in enumerate(np.argsort(vehicle_keys, kind="stable")):
        theta[slot] = vehicle_ids[rank // q]

    sigma = np.zeros(Z, dtype=int)
    counts: dict[int, int] = {}
    for slot in np.argsort(mission_keys, kind="stable"):
        v = int(theta[slot])
        counts[v] = counts.get(v, 0) + 1
        sigma[slot] = counts[v]
    return AssignmentSolution(theta, sigma)


def pcm_refine(x, rho: float):
    """Piecewise chaotic map on [0, 1), applied coordinate-wise.

    Four linear branches with breakpoints at rho, 0.5 and 1-rho; used once
    after random initialization to spread the population more uniformly.
    """
    if not (0 < rho < 0.5):
        raise DomainError("rho must lie in (0, 0.5)")
    scalar = np.isscalar(x) or np.ndim(x) == 0
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any(x < 0) or np.any(x >= 1):
        raise DomainError("inputs must lie in [0, 1)")
    out = np.empty_like(x)
    b1 = x < rho
    b2 = (x >= rho) & (x < 0.5)
    b3 = (x >= 0.5) & (x < 1 - rho)
    b4 = x >= 1 - rho
    out[b1] = x[b1] / rho
    out[b2] = (x[b2] - rho) / (0.5 - rho)
    out[b3] = (1 - rho - x[b3]) / (0.5 - rho)
    out[b4] = (1 - x[b4]) / rho
    out = np.clip(out, 0.0, 1.0)  # guard rounding at the branch peaks
    return float(out[0]) if scalar else out


def explore_gaussian(x: np.ndarray, pop_std: np.ndarray,
                     rng: np.random.Generator,
                     lb: np.ndarray, ub: np.ndarray) -> np.ndarray:
    """Diversity-scaled random walk: masked Gaussian step with per-dimension
    standard deviation equal to the population spread."""
    mask = rng.integers(0, 2, size=x.shape)
    step = mask * rng.normal(0.0, 1.0, size=x.shape) * pop_std
    return np.clip(x + step, lb, ub)


def exploit_opposition(x: np.ndarray, x_best: np.ndarray,
                       lb: np.ndarray, ub: np.ndarray,
                       rng: np.random.Generator) -> np.ndarray:
    """Masked blend of the bound-reflected point and the global best."""
    r = rng.random()
    if r < 0.2:
        w = 0.0
    elif r < 0.8:
        w = 1.0
    else:
        w = rng.random()
    mask = rng.integers(0, 2, size=x.shape)
    d1 = ub + lb - x
    d2 = x_best - x
    return np.clip(x + mask * (w * d1 + (1 - w) * d2), lb, ub)


def running_vector(g: int, g_max: int, dim: int,
                   rng: np.random.Generator) -> np.ndarray:
    """Length-scale factor times a 0/1 dimension mask (the ARO running
    characteristic)."""
    length = (math.e - math.exp(((g - 1) / g_max) ** 2)) \
        * math.sin(2 * math.pi * rng.random())
    return length * rng.integers(0, 2, size=dim)


def random_hiding(population: np.ndarray, p: int, p1: int, p2: int,
                  x_best: np.ndarray, run_vec: np.ndarray, u: float,
                  lb: np.ndarray, ub: np.ndarray) -> np.ndarray:
    """Best-guided hiding move built from two distinct peers of member p."""
    if len({p, p1, p2}) != 3:
        raise IndexCollision(f"indices must be pairwise distinct: {p, p1, p2}")
    cand = population[p1] + (2 * u - 1) * run_vec * (x_best - population[p2])
    return np.clip(cand, lb, ub)


def _aro_detour(x: np.ndarray, peer: np.ndarray, run_vec: np.ndarray,
                rng: np.random.Generator,
                lb: np.ndarray, ub: np.ndarray) -> np.ndarray:
    # Original detour foraging: move around a random peer with a rounded
    # perturbation term.
    n1 = rng.normal(0.0, 1.0, size=x.shape)
    cand = peer + run_vec * (x - peer) \
        + np.round(0.5 * (0.05 + rng.random(size=x.shape))) * n1
    return np.clip(cand, lb, ub)


def _aro_hiding(x: np.ndarray, g: int, g_max: int,
                rng: np.random.Generator,
                lb: np.ndarray, ub: np.ndarray) -> np.ndarray:
    # Original random hiding: jump toward a randomly generated burrow.
    dim = len(x)
    r4 = rng.random()
    hide = (g_max - g + 1) / g_max * r4
    onehot = np.zeros(dim)
    onehot[rng.integers(0, dim)] = 1.0
    burrow = x + hide * onehot * x
    run_vec = running_vector(g, g_max, dim, rng)
    return np.clip(x + run_vec * (r4 * burrow - x), lb, ub)


def energy_factor(g: int, g_max: int, rng: np.random.Generator) -> float:
    """Exploration/exploitation switch: decays with progress, long-tailed."""
    return 4.0 * (1.0 - g / g_max) * math.log(1.0 / rng.random())


def _run(scenario: Scenario, config: OptimizerConfig,
         variant: str) -> OptimizerResult:
    Z, K = scenario.Z, scenario.K_star
    vehicle_ids = scenario.vehicle_ids
    lb, ub = bounds(Z, K)
    dim = 2 * Z
    P = config.pop_size
    g_max = config.iterations
    rng = np.random.default_rng(config.seed)

    pop = rng.uniform(lb, ub, size=(P, dim))
    if variant == "cgg":
        # One refinement pass of the chaotic map over the normalized
        # population.
        unit = (pop - lb) / (ub - lb)
        unit = np.clip(unit, 0.0, np.nextafter(1.0, 0.0))
        pop = lb + pcm_refine(unit, config.rho) * (ub - lb)

    evaluations = 0

    def fitness_of(x):
        nonlocal evaluations
        evaluations += 1
        return evaluate(decode(x, Z, K, vehicle_ids), scenario).fitness

    fit = np.array([fitness_of(x) for x in pop])
    best_idx = int(np.argmax(fit))
    x_best = pop[best_idx].copy()
    f_best = float(fit[best_idx])

    trace: list[TracePoint] = []
    t0 = time.perf_counter()
    for g in range(1, g_max + 1):
        pop_std = pop.std(axis=0)  # population spread, fixed per generation
        for p in range(P):
            A = energy_factor(g, g_max, rng)
            if variant == "cgg":
                if A > 1:
                    if rng.random() > 0.5:
                        cand = explore_gaussian(pop[p], pop_std, rng, lb, ub)
                    else:
                        cand = exploit_opposition(pop[p], x_best, lb, ub, rng)
                else:
                    if rng.random() > 0.5:
                        p1, p2 = _distinct_peers(p, P, rng)
                        cand = random_hiding(
                            pop, p, p1, p2, x_best,
                            running_vector(g, g_max, dim, rng),
                            rng.random(), lb, ub)
                    else:
                        cand = _aro_hiding(pop[p], g, g_max, rng, lb, ub)
            else:  # plain artificial-rabbits baseline
                if A > 1:
                    peer = pop[rng.integers(0, P)]
                    cand = _aro_detour(pop[p], peer,
                                       running_vector(g, g_max, dim, rng),
                                       rng, lb, ub)
                else:
                    cand = _aro_hiding(pop[p], g, g_max, rng, lb, ub)

            f_cand = fitness_of(cand)
            if f_cand > fit[p]:
                pop[p] = cand
                fit[p] = f_cand
                if f_cand > f_best:
                    f_best = f_cand
                    x_best = cand.copy()
        best_report = evaluate(decode(x_best, Z, K, vehicle_ids), scenario)
        trace.append(TracePoint(g, f_best, float(fit.mean()),
                                best_report.completed_count))
    wall = time.perf_counter() - t0

    return OptimizerResult(
        best_solution=decode(x_best, Z, K, vehicle_ids),
        best_fitness=f_best, best_genotype=x_best, trace=trace,
        wall_s=wall, evaluations=evaluations)


def _distinct_peers(p: int, P: int, rng: np.random.Generator):
    p1, p2 = rng.choice(P - 1, size=2, replace=False)
    return (int(p1) + (p1 >= p), int(p2) + (p2 >= p))


def run_cgg_aro(scenario: Scenario,
                config: OptimizerConfig) -> OptimizerResult:
    """Chaotic-init, Gaussian-exploring, best-guided rabbit search.

    Per member, an energy factor picks the phase: while energetic, Gaussian
    exploration or opposition-based exploitation (even odds); otherwise the
    best-guided hiding move or the original hiding rule. Survivor selection
    is greedy, so the best-fitness trace is monotone.
    """
    return _run(scenario, config, "cgg")


def run_aro(scenario: Scenario, config: OptimizerConfig) -> OptimizerResult:
    """Original artificial-rabbits baseline: detour foraging + random
    hiding, random initialization, greedy survivors."""
    return _run(scenario, config, "aro")
