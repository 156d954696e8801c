"""Uplink channel model, edge/cloud servers, offloading delays and costs.

All randomness flows through explicit numpy generators, so every operation is
pure given an rng stream.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .missions import OffloadTask


class ServerKind(Enum):
    MEC = "mec"
    CLOUD = "cloud"


class InvalidDistance(ValueError):
    pass


@dataclass
class Server:
    id: int
    kind: ServerKind
    position: tuple[float, float] | None  # None for the cloud
    capacity_hz: float
    unit_cost: float
    available: bool = True

    def __post_init__(self):
        if self.capacity_hz <= 0:
            raise ValueError(f"server {self.id}: capacity must be positive")


@dataclass(frozen=True)
class RadioUnit:
    id: int
    position: tuple[float, float]
    antennas: int
    channels: int
    bandwidth_hz: float

    @property
    def channel_bandwidth_hz(self) -> float:
        return self.bandwidth_hz / self.channels


@dataclass
class VehicleProfile:
    id: int
    position: tuple[float, float]
    v_max: float
    v_avg: float
    coverage_radius_m: float
    tx_power_w: float

    def __post_init__(self):
        if not (0 < self.v_avg <= self.v_max):
            raise ValueError("need 0 < average speed <= max speed")
        if self.coverage_radius_m <= 0:
            raise ValueError("coverage radius must be positive")


PATH_LOSS_EXPONENT = 3.0


def channel_gain(distance_m: float, antennas: int,
                 rng: np.random.Generator) -> float:
    """Squared channel norm: sum of per-antenna exponential power fades
    whose mean follows a distance^-3 path-loss law."""
    if distance_m <= 0:
        raise InvalidDistance(f"distance must be positive, got {distance_m}")
    mean = distance_m ** (-PATH_LOSS_EXPONENT)
    return float(np.sum(rng.exponential(mean, size=antennas)))


def uplink_throughput(tx_power_w: float, gain: float,
                      channel_bw_hz: float, noise_psd: float) -> float:
    """Achievable uplink rate in bits/s over one FDMA channel."""
    snr = tx_power_w * gain / (channel_bw_hz * noise_psd)
    return channel_bw_hz * math.log2(1.0 + snr)


def fiber_delay(alpha_bits: float, fiber_rate_bps: float) -> float:
    if fiber_rate_bps <= 0:
        raise ValueError("fiber rate must be positive")
    return alpha_bits / fiber_rate_bps


def comm_delay(task: OffloadTask, server: Server, rate_bps: float,
               fiber_rate_bps: float) -> float:
    """Upload delay for one task; cloud offloads pay an extra fiber hop."""
    d = task.alpha_bits / rate_bps
    if server.kind is ServerKind.CLOUD:
        d += fiber_delay(task.alpha_bits, fiber_rate_bps)
    return d


def comp_delay(task: OffloadTask, server: Server) -> float:
    return task.beta_cycles / server.capacity_hz


@dataclass(frozen=True)
class OffloadDecision:
    server_id: int
    comm_s: float
    comp_s: float
    cost: float

    @property
    def total_delay_s(self) -> float:
        return self.comm_s + self.comp_s


def greedy_offload(vehicle: VehicleProfile, task: OffloadTask,
                   servers: list[Server], rus: list[RadioUnit],
                   noise_psd: float, fiber_rate_bps: float,
                   rng: np.random.Generator) -> OffloadDecision:
    """Latency-greedy server choice for one task.

    In-range, available edge servers are queried; the fastest is compared
    against the cloud and the overall latency minimizer wins (ties go to the
    lower server id). The cloud is always reachable, so the policy is total.
    Cost is the server's per-second price times the task's comm+comp time.
    """
    ru = min(rus, key=lambda r: (_dist(vehicle.position, r.position), r.id))
    wc = ru.channel_bandwidth_hz

    best: OffloadDecision | None = None
    for server in sorted(servers, key=lambda s: s.id):
        if server.kind is ServerKind.MEC:
            if not server.available:
                continue
            dist = _dist(vehicle.position, server.position)
            if dist > vehicle.coverage_radius_m:
                continue
        else:
            dist = max(_dist(vehicle.position, ru.position), 1.0)
        gain = channel_gain(max(dist, 1.0), ru.antennas, rng)
        rate = uplink_throughput(vehicle.tx_power_w, gain, wc, noise_psd)
        if rate <= 0:
            continue
        d_comm = comm_delay(task, server, rate, fiber_rate_bps)
        d_comp = comp_delay(task, server)
        cand = OffloadDecision(server.id, d_comm, d_comp,
                               server.unit_cost * (d_comm + d_comp))
        if best is None or cand.total_delay_s < best.total_delay_s:
            best = cand
    if best is None:
        raise RuntimeError("no server produced a usable rate")
    return best


def _dist(a, b) -> float:
    return math.hypot(a[0] - b[0], a[1] - b[1])
