"""Missions: transport jobs with deadlines, budgets, dependency sets and
attached compute tasks, grouped row-wise into fixed-width batches."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import networkx as nx


class InvalidZ(ValueError):
    pass


@dataclass(frozen=True)
class OffloadTask:
    """A compute job shipped off the vehicle: input size and CPU demand."""
    alpha_bits: float
    beta_cycles: float

    def __post_init__(self):
        if self.alpha_bits <= 0 or self.beta_cycles <= 0:
            raise ValueError("task sizes must be strictly positive")


@dataclass(frozen=True)
class Mission:
    id: int
    start_node: int
    end_node: int
    deadline_s: float
    budget: float
    preds: frozenset[int] = frozenset()
    succs: frozenset[int] = frozenset()
    tasks: tuple[OffloadTask, ...] = ()
    benefit_coeff: float = 0.0
    padding: bool = False

    def __post_init__(self):
        if self.id in self.preds or self.id in self.succs:
            raise ValueError(f"mission {self.id} depends on itself")
        if self.preds & self.succs:
            raise ValueError(f"mission {self.id}: preds and succs overlap")


def padding_mission(mid: int) -> Mission:
    """Filler slot: zero benefit, no tasks, no dependencies, deadline 0."""
    return Mission(id=mid, start_node=0, end_node=0, deadline_s=0.0,
                   budget=0.0, padding=True)


@dataclass
class MissionMatrix:
    rows: list[list[Mission]]
    Z: int

    @property
    def num_rows(self) -> int:
        return len(self.rows)


def group_missions(missions: list[Mission], Z: int) -> MissionMatrix:
    """Row-major grouping into ceil(M/Z) rows of width Z.

    The last row is padded with filler missions so every row has exactly Z
    slots.
    """
    if Z < 1:
        raise InvalidZ(f"Z must be >= 1, got {Z}")
    n_rows = math.ceil(len(missions) / Z)
    rows = []
    next_pad_id = -1
    for r in range(n_rows):
        row = list(missions[r * Z:(r + 1) * Z])
        while len(row) < Z:
            row.append(padding_mission(next_pad_id))
            next_pad_id -= 1
        rows.append(row)
    return MissionMatrix(rows, Z)


def dependency_graph(missions: list[Mission]) -> nx.DiGraph:
    g = nx.DiGraph()
    g.add_nodes_from(m.id for m in missions)
    for m in missions:
        for p in m.preds:
            g.add_edge(p, m.id)
    return g


def validate_dependencies(missions: list[Mission]) -> list[str]:
    """Check the dependency structure; returns a list of problems (empty = ok).

    Two classes of defect are reported: directed cycles among the pred
    relation, and mirror inconsistencies (j listed as a predecessor of i
    without i appearing among j's successors, or vice versa).
    """
    problems = []
    by_id = {m.id: m for m in missions}
    for m in missions:
        for p in m.preds:
            if p not in by_id:
                problems.append(f"mission {m.id}: unknown predecessor {p}")
            elif m.id not in by_id[p].succs:
                problems.append(
                    f"mirror inconsistency: {p} in preds({m.id}) but "
                    f"{m.id} not in succs({p})")
        for s in m.succs:
            if s not in by_id:
                problems.append(f"mission {m.id}: unknown successor {s}")
            elif m.id not in by_id[s].preds:
                problems.append(
                    f"mirror inconsistency: {s} in succs({m.id}) but "
                    f"{m.id} not in preds({s})")
    g = dependency_graph(missions)
    for cycle in nx.simple_cycles(g):
        problems.append("dependency cycle: " + " -> ".join(map(str, cycle)))
    return problems
