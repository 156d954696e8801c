"""Multi-agent double DQN for sequential mission selection.

One agent per vehicle. Agents act round-robin, each picking a mission index;
orders are the per-vehicle running counts. Rewards depend on end-of-episode
outcomes, so transitions are buffered with placeholders and the rewards are
written back once the episode has been scored.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
import torch
from torch import nn

from .evaluation import (AssignmentSolution, EvalReport, UNASSIGNED,
                         derive_vehicle_schedules, evaluate, mission_profiles,
                         quota)
from .scenario import Scenario

CHECKPOINT_VERSION = 1


class EmptyBuffer(RuntimeError):
    pass


class MissingPolicy(FileNotFoundError):
    pass


@dataclass
class TrainConfig:
    gamma: float = 0.95
    lr: float = 1e-5
    epsilon_init: float = 1.0
    epsilon_decay: float = 0.99
    epsilon_min: float = 0.05
    batch_size: int = 512
    buffer_capacity: int = 10_000_000
    target_sync: int = 1000          # gradient steps between target copies
    episodes: int = 2000
    hidden_width: int = 256
    updates_per_episode: int = 1
    edge_cap: int = 64               # road segments visible per observation
    double_q: bool = True
    reward_shaping: bool = True      # False = immediate-only ablation
    gammas: tuple = (1.0, 0.5, 1.0, 1.0, 0.5)

    def __post_init__(self):
        if not (0 <= self.gamma <= 1):
            raise ValueError("gamma must lie in [0, 1]")
        if not (self.epsilon_min <= self.epsilon_init <= 1):
            raise ValueError("epsilon out of range")


@dataclass
class Transition:
    obs: np.ndarray
    action: int
    reward: float
    next_obs: np.ndarray
    terminal: bool
    agent: int


class ReplayBuffer:
    """FIFO ring buffer with uniform without-replacement batch sampling."""

    def __init__(self, capacity: int):
        self.capacity = capacity
        self._data: list[Transition] = []
        self._next = 0

    def __len__(self) -> int:
        return len(self._data)

    def push(self, t: Transition) -> None:
        if len(self._data) < self.capacity:
            self._data.append(t)
        else:
            self._data[self._next] = t
            self._next = (self._next + 1) % self.capacity

    def sample(self, batch: int, rng: np.random.Generator) -> list[Transition]:
        if not self._data:
            raise EmptyBuffer("replay buffer is empty")
        n = min(batch, len(self._data))
        idx = rng.choice(len(self._data), size=n, replace=False)
        return [self._data[i] for i in idx]


class QNetwork(nn.Module):
    """Two hidden layers (SELU then ELU), linear head over actions."""

    def __init__(self, obs_dim: int, n_actions: int, width: int = 256):
        super().__init__()
        self.obs_dim = obs_dim
        self.n_actions = n_actions
        self.width = width
        self.net = nn.Sequential(
            nn.Linear(obs_dim, width), nn.SELU(),
            nn.Linear(width, width), nn.ELU(),
            nn.Linear(width, n_actions),
        )

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return self.net(x)

    def q_values(self, obs: np.ndarray) -> np.ndarray:
        with torch.no_grad():
            t = torch.as_tensor(obs, dtype=torch.float32).unsqueeze(0)
            return self(t).squeeze(0).numpy()


def select_action(q: QNetwork, obs: np.ndarray, epsilon: float,
                  rng: np.random.Generator) -> int:
    """Epsilon-greedy over the mission indices; argmax ties resolve to the
    lowest index."""
    if rng.random() < epsilon:
        return int(rng.integers(q.n_actions))
    return int(np.argmax(q.q_values(obs)))


def ddqn_update(online: QNetwork, target: QNetwork,
                optimizer: torch.optim.Optimizer,
                batch: list[Transition], gamma: float,
                double_q: bool = True) -> float:
    """One gradient step on the (double) Q regression target."""
    if not batch:
        raise EmptyBuffer("cannot update from an empty batch")
    obs = torch.as_tensor(np.stack([t.obs for t in batch]),
                          dtype=torch.float32)
    nxt = torch.as_tensor(np.stack([t.next_obs for t in batch]),
                          dtype=torch.float32)
    acts = torch.as_tensor([t.action for t in batch], dtype=torch.int64)
    rews = torch.as_tensor([t.reward for t in batch], dtype=torch.float32)
    term = torch.as_tensor([t.terminal for t in batch], dtype=torch.bool)

    with torch.no_grad():
        if double_q:
            greedy = online(nxt).argmax(dim=1, keepdim=True)
            boot = target(nxt).gather(1, greedy).squeeze(1)
        else:
            boot = target(nxt).max(dim=1).values
        y = rews + gamma * boot * (~term)

    pred = online(obs).gather(1, acts.unsqueeze(1)).squeeze(1)
    loss = nn.functional.mse_loss(pred, y)
    optimizer.zero_grad()
    loss.backward()
    optimizer.step()
    return float(loss.item())


# ---------------------------------------------------------------------------
# Mission-assignment environment
# ---------------------------------------------------------------------------

class MissionAssignmentEnv:
    """Sequential assignment episode over one row of Z missions.

    Tracks the assignment memory, per-vehicle schedules and counts; exposes
    deterministic observation encoding for each agent.
    """

    def __init__(self, scenario: Scenario, edge_cap: int = 64):
        self.scenario = scenario
        self.Z = scenario.Z
        self.K = scenario.K_star
        self.rounds = quota(self.Z, self.K)
        self.edge_cap = min(edge_cap, len(scenario.graph.edges))
        self._static = self._precompute_static()
        self.reset()

    def _precompute_static(self) -> dict:
        s = self.scenario
        extent = float(max(s.graph.nodes.max(), 1.0))
        mids = np.array([(s.graph.nodes[e.a] + s.graph.nodes[e.b]) / 2
                         for e in s.graph.edges])
        mecs = [sv for sv in s.servers if sv.position is not None]
        edge_avail = np.zeros(len(s.graph.edges))
        for j, mid in enumerate(mids):
            if mecs:
                nearest = min(mecs, key=lambda sv: np.hypot(
                    sv.position[0] - mid[0], sv.position[1] - mid[1]))
                edge_avail[j] = float(nearest.available)
        # per-agent nearest-edge subsets keep the input dimension fixed
        edge_idx = {}
        for v in s.vehicles:
            d = np.hypot(mids[:, 0] - v.position[0],
                         mids[:, 1] - v.position[1])
            edge_idx[v.id] = np.argsort(d, kind="stable")[:self.edge_cap]
        routes = np.array([s.route_for(m).adjusted_cost if not m.padding
                           else 0.0 for m in s.missions])
        route_norm = routes / max(routes.max(), 1.0)
        statuses = np.array([int(e.status) for e in s.graph.edges]) / 4.0

        index_of = {m.id: i for i, m in enumerate(s.missions)}
        preds_idx = [np.array([index_of[p] for p in m.preds
                               if p in index_of], dtype=int)
                     for m in s.missions]
        # assignment-independent mission fields; column 7 (preds resolved)
        # is filled per encode
        mis_static = np.zeros((self.Z, 8))
        for i, m in enumerate(s.missions):
            if m.padding:
                continue
            a = s.graph.nodes[m.start_node] / extent
            b = s.graph.nodes[m.end_node] / extent
            mis_static[i, :7] = [a[0], a[1], b[0], b[1], route_norm[i],
                                 len(m.preds) / self.Z,
                                 len(m.succs) / self.Z]
        not_padding = np.array([not m.padding for m in s.missions])
        veh_static = np.zeros((self.K, 5))
        for j, v in enumerate(s.vehicles):
            veh_static[j, 0] = v.position[0] / extent
            veh_static[j, 1] = v.position[1] / extent
            veh_static[j, 4] = v.v_max / max(v.v_max, 1.0)
        return {"extent": extent, "edge_avail": edge_avail,
                "edge_idx": edge_idx, "route_norm": route_norm,
                "statuses": statuses, "preds_idx": preds_idx,
                "mis_static": mis_static, "not_padding": not_padding,
                "veh_static": veh_static}

    @property
    def obs_dim(self) -> int:
        return self.Z + 2 * self.edge_cap + 5 * self.K + 8 * self.Z

    @property
    def n_actions(self) -> int:
        return self.Z

    def reset(self):
        self.assigned = np.zeros(self.Z, dtype=bool)
        self.theta = np.full(self.Z, UNASSIGNED, dtype=int)
        self.sigma = np.zeros(self.Z, dtype=int)
        self.counts = {v.id: 0 for v in self.scenario.vehicles}

    def apply(self, vehicle_id: int, action: int) -> bool:
        """Assign mission ``action`` to the vehicle; returns False for a
        repeated pick (no-op)."""
        if self.assigned[action]:
            return False
        self.assigned[action] = True
        self.theta[action] = vehicle_id
        self.counts[vehicle_id] += 1
        self.sigma[action] = self.counts[vehicle_id]
        return True

    def solution(self) -> AssignmentSolution:
        return AssignmentSolution(self.theta.copy(), self.sigma.copy())

    def encode_observation(self, agent_vehicle_id: int) -> np.ndarray:
        """Flatten assignment memory, road state, vehicle states and mission
        info in a fixed field order, normalized to the map extent and Z."""
        s = self.scenario
        st = self._static
        parts = [self.assigned.astype(float)]

        idx = st["edge_idx"][agent_vehicle_id]
        road = np.empty(2 * self.edge_cap)
        road[0::2] = st["statuses"][idx]
        road[1::2] = st["edge_avail"][idx]
        parts.append(road)

        pred_ok = np.array([bool(self.assigned[pi].all())
                            for pi in st["preds_idx"]])

        veh = st["veh_static"].copy()
        for j, v in enumerate(s.vehicles):
            unresolved = int(np.count_nonzero((self.theta == v.id)
                                              & ~pred_ok))
            veh[j, 2] = unresolved / self.Z
            veh[j, 3] = self.counts[v.id] / self.Z
        parts.append(veh.ravel())

        mis = st["mis_static"].copy()
        mis[:, 7] = pred_ok & st["not_padding"]
        parts.append(mis.ravel())
        return np.concatenate(parts)


def compute_reward(report: EvalReport, scenario: Scenario, agent_vehicle: int,
                   action: int, step: int, was_assigned: bool,
                   D: AssignmentSolution,
                   gammas=(1.0, 0.5, 1.0, 1.0, 0.5),
                   shaped: bool = True) -> float:
    """Composite per-transition reward, resolved after the episode.

    Repeated picks pay a penalty scaled by the mission's benefit and budget.
    A successful, completed pick pays the mission benefit plus leftover
    budget, the agent's mean completed-mission payoff, and an
    early-unblocking bonus that decays with the decision step.
    """
    g1, g2, g3, g4, g5 = gammas
    m = scenario.missions[action]
    if was_assigned:
        return -(g4 * m.benefit_coeff + g5 * m.budget)
    if not shaped:
        return g1 * m.benefit_coeff
    if not report.completed[action]:
        return 0.0
    q = quota(scenario.Z, scenario.K_star)
    r_dep = (q - step) * (len(m.succs) - len(m.preds) + 1)
    schedules = derive_vehicle_schedules(D)
    own = [i for i in schedules.get(agent_vehicle, []) if report.completed[i]]
    if own:
        r_share = float(np.mean([
            g1 * scenario.missions[i].benefit_coeff
            + g2 * report.remaining_budget[i] for i in own]))
    else:
        r_share = 0.0
    return (g1 * m.benefit_coeff + g2 * report.remaining_budget[action]
            + r_share + g3 * r_dep)


@dataclass
class Policy:
    nets: list[QNetwork]
    vehicle_ids: list[int]
    Z: int
    K: int
    edge_cap: int
    hidden_width: int


@dataclass
class EpisodeTrace:
    episode: int
    epsilon: float
    mean_reward: float
    total_benefit: float
    completed: int


def train(scenario: Scenario, config: TrainConfig,
          seed: int = 0) -> tuple[Policy, list[EpisodeTrace]]:
    """Round-robin multi-agent training loop with delayed reward write-back.

    Each episode rolls out ceil(Z/K*) rounds, scores the resulting
    assignment, rewrites the stored transition rewards from the outcome, and
    then takes gradient steps per agent from the shared buffer.
    """
    torch.manual_seed(seed)
    rng = np.random.default_rng(seed)
    env = MissionAssignmentEnv(scenario, config.edge_cap)
    vids = scenario.vehicle_ids
    online = [QNetwork(env.obs_dim, env.n_actions, config.hidden_width)
              for _ in vids]
    target = [QNetwork(env.obs_dim, env.n_actions, config.hidden_width)
              for _ in vids]
    for o, t in zip(online, target):
        t.load_state_dict(o.state_dict())
    opts = [torch.optim.Adam(o.parameters(), lr=config.lr) for o in online]
    buffer = ReplayBuffer(config.buffer_capacity)

    epsilon = config.epsilon_init
    grad_steps = 0
    trace: list[EpisodeTrace] = []
    for ep in range(config.episodes):
        env.reset()
        pending = []  # (agent_idx, step, obs, action, valid, next_obs, term)
        for step in range(1, env.rounds + 1):
            for ai, vid in enumerate(vids):
                obs = env.encode_observation(vid)
                action = select_action(online[ai], obs, epsilon, rng)
                was_assigned = bool(env.assigned[action])
                env.apply(vid, action)
                nxt = env.encode_observation(vid)
                term = step == env.rounds
                pending.append([ai, step, obs, action, was_assigned, nxt,
                                term])

        D = env.solution()
        report = evaluate(D, scenario)
        rewards = []
        for ai, step, obs, action, was_assigned, nxt, term in pending:
            r = compute_reward(report, scenario, vids[ai], action, step,
                               was_assigned, D, config.gammas,
                               config.reward_shaping)
            rewards.append(r)
            buffer.push(Transition(obs, action, r, nxt, term, ai))

        for ai in range(len(vids)):
            for _ in range(config.updates_per_episode):
                batch = buffer.sample(config.batch_size, rng)
                ddqn_update(online[ai], target[ai], opts[ai], batch,
                            config.gamma, config.double_q)
                grad_steps += 1
                if grad_steps % config.target_sync == 0:
                    for o, t in zip(online, target):
                        t.load_state_dict(o.state_dict())

        trace.append(EpisodeTrace(ep, epsilon, float(np.mean(rewards)),
                                  report.total_benefit,
                                  report.completed_count))
        epsilon = max(config.epsilon_min, epsilon * config.epsilon_decay)

    policy = Policy(online, vids, env.Z, env.K, env.edge_cap,
                    config.hidden_width)
    return policy, trace


def _cached_env(scenario: Scenario, edge_cap: int) -> MissionAssignmentEnv:
    """Reuse one environment per scenario; its static encoding tables are
    assignment-independent and cost more than a greedy rollout."""
    env = getattr(scenario, "_env_cache", None)
    if env is None or env.scenario is not scenario \
            or env.edge_cap != min(edge_cap, len(scenario.graph.edges)):
        env = MissionAssignmentEnv(scenario, edge_cap)
        scenario._env_cache = env
    return env


def infer(policy: Policy, scenario: Scenario) -> AssignmentSolution:
    """Greedy rollout; picks are masked to unassigned missions so the
    resulting assignment is always structurally valid."""
    env = _cached_env(scenario, policy.edge_cap)
    env.reset()
    for _ in range(env.rounds):
        for ai, vid in enumerate(policy.vehicle_ids):
            if env.assigned.all():
                break
            obs = env.encode_observation(vid)
            qv = policy.nets[ai].q_values(obs).astype(float)
            qv[env.assigned] = -np.inf
            env.apply(vid, int(np.argmax(qv)))
    return env.solution()


# ---------------------------------------------------------------------------
# Checkpoints
# ---------------------------------------------------------------------------

def save_policy(policy: Policy, path: str) -> None:
    doc = {
        "version": CHECKPOINT_VERSION,
        "meta": {"Z": policy.Z, "K": policy.K,
                 "edge_cap": policy.edge_cap,
                 "hidden_width": policy.hidden_width,
                 "vehicle_ids": policy.vehicle_ids,
                 "obs_dim": policy.nets[0].obs_dim},
        "agents": [
            {name: tensor.numpy().ravel().tolist()
             for name, tensor in net.state_dict().items()}
            for net in policy.nets
        ],
    }
    with open(path, "w") as fh:
        json.dump(doc, fh)


def load_policy(path: str) -> Policy:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except FileNotFoundError as exc:
        raise MissingPolicy(str(exc)) from exc
    meta = doc["meta"]
    nets = []
    for params in doc["agents"]:
        net = QNetwork(meta["obs_dim"], meta["Z"], meta["hidden_width"])
        state = {
            name: torch.as_tensor(params[name],
                                  dtype=tensor.dtype).reshape(tensor.shape)
            for name, tensor in net.state_dict().items()
        }
        net.load_state_dict(state)
        nets.append(net)
    return Policy(nets, meta["vehicle_ids"], meta["Z"], meta["K"],
                  meta["edge_cap"], meta["hidden_width"])


# ---------------------------------------------------------------------------
# Generic single-agent trainer (for small benchmark MDPs)
# ---------------------------------------------------------------------------

def train_single(env, config: TrainConfig, seed: int = 0) -> QNetwork:
    """Plain (double) DQN loop for an env with reset()/step() semantics.

    ``env`` must expose ``obs_dim``, ``n_actions``, ``reset() -> obs`` and
    ``step(action) -> (obs, reward, done)``.
    """
    torch.manual_seed(seed)
    rng = np.random.default_rng(seed)
    online = QNetwork(env.obs_dim, env.n_actions, config.hidden_width)
    target = QNetwork(env.obs_dim, env.n_actions, config.hidden_width)
    target.load_state_dict(online.state_dict())
    opt = torch.optim.Adam(online.parameters(), lr=config.lr)
    buffer = ReplayBuffer(config.buffer_capacity)

    epsilon = config.epsilon_init
    grad_steps = 0
    for _ in range(config.episodes):
        obs = env.reset()
        done = False
        while not done:
            a = select_action(online, obs, epsilon, rng)
            nxt, r, done = env.step(a)
            buffer.push(Transition(obs, a, r, nxt, done, 0))
            obs = nxt
            batch = buffer.sample(config.batch_size, rng)
            ddqn_update(online, target, opt, batch, config.gamma,
                        config.double_q)
            grad_steps += 1
            if grad_steps % config.target_sync == 0:
                target.load_state_dict(online.state_dict())
        epsilon = max(config.epsilon_min, epsilon * config.epsilon_decay)
    return online
