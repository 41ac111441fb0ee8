"""Analytic models: container startup overhead, memory-contention slowdown,
and overlay-network communication cost.

Model notes
-----------
* Startup: hosts create their containers in parallel, creation on one host is
  serialized, so overhead = base + per_container * max(count per host).  More
  hosts means a smaller max count and therefore lower overhead, flattening
  once the per-host count stops shrinking.
* Contention: linear in the number of co-located containers (any job) on the
  bottleneck host, scaled by the job's memory intensity.
* Communication: all-to-all over unordered process pairs.  Co-resident pairs
  pay intra-node latency plus volume/intra_bw.  Cross-node pairs pay
  inter-node latency plus a bandwidth term scaled by the busier endpoint
  host's fan-out share c_h*(n-c_h)/n, modeling the host NIC serializing its
  overlay traffic.  Packing n processes on few hosts therefore saturates the
  NIC term, while spreading raises the share of cross-node pairs; the mean
  pair latency grows with host count and levels off once most pairs are
  already cross-node.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, NamedTuple

from .placement import Placement
from .resources import ResourceVector


@dataclass(frozen=True)
class WorkloadProfile:
    """Per-process workload shape: compute seconds per iteration at unit
    contention, iteration count, memory intensity in [0,1], and MiB sent per
    ordered process pair per iteration (0 for compute-only jobs)."""

    compute_per_iter_s: float
    iterations: int
    mem_intensity: float
    comm_volume_mib: float

    def __post_init__(self) -> None:
        if self.compute_per_iter_s < 0 or self.comm_volume_mib < 0:
            raise ValueError("workload profile fields must be non-negative")
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        if not 0.0 <= self.mem_intensity <= 1.0:
            raise ValueError("mem_intensity must be in [0, 1]")


@dataclass(frozen=True)
class JobSpec:
    """An MPI gang job: n processes, each demanding `demand`."""

    job_id: int
    name: str
    n: int
    demand: ResourceVector
    profile: WorkloadProfile

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError("job needs at least one process")
        if self.demand.is_zero():
            raise ValueError("per-process demand must be positive in some component")

    @property
    def gang_demand(self) -> ResourceVector:
        return self.demand.scaled(self.n)


@dataclass(frozen=True)
class NetworkModel:
    """Overlay network parameters (latencies in microseconds, bandwidth in MiB/s)."""

    intra_latency_us: float
    inter_latency_us: float
    intra_bw_mibs: float
    inter_bw_mibs: float

    def __post_init__(self) -> None:
        if min(self.intra_latency_us, self.inter_latency_us,
               self.intra_bw_mibs, self.inter_bw_mibs) <= 0:
            raise ValueError("network parameters must be positive")
        if self.inter_latency_us < self.intra_latency_us:
            raise ValueError("inter-node latency must be >= intra-node latency")
        if self.intra_bw_mibs < self.inter_bw_mibs:
            raise ValueError("intra-node bandwidth must be >= inter-node bandwidth")


@dataclass(frozen=True)
class OverheadModel:
    """Container creation cost: fixed base plus per-container time, serialized per host."""

    base_s: float
    per_container_s: float

    def __post_init__(self) -> None:
        if self.base_s < 0 or self.per_container_s < 0:
            raise ValueError("overhead parameters must be non-negative")


class CommCost(NamedTuple):
    per_iter_s: float
    avg_pair_latency_us: float


def startup_overhead(p: Placement, m: OverheadModel) -> float:
    """Seconds to create all service containers: base + per_container * max per host."""
    return m.base_s + m.per_container_s * max(p.counts.values())


def contention_factor(co_located: int, mem_intensity: float, alpha: float) -> float:
    """Compute slowdown on a host carrying `co_located` containers in total.

    1.0 with no neighbors; grows linearly with the co-located count, scaled
    by the job's memory intensity and the calibration coefficient alpha.
    """
    if co_located < 1:
        raise ValueError("co_located counts the job's own container: must be >= 1")
    return 1.0 + alpha * mem_intensity * (co_located - 1)


def _fanout_share(count: int, n: int) -> float:
    # Host's share of the all-to-all cross traffic, normalized per process.
    return count * (n - count) / n


def comm_cost(p: Placement, job: JobSpec, net: NetworkModel) -> CommCost:
    """Per-iteration communication time and mean pair latency for a placement.

    Jobs with no communication volume report zero time and the intra-node
    latency by convention.
    """
    volume = job.profile.comm_volume_mib
    n = job.n
    if volume == 0.0 or n < 2:
        return CommCost(0.0, net.intra_latency_us)

    counts = p.counts
    node_ids = sorted(counts)
    intra_cost_us = net.intra_latency_us + volume / net.intra_bw_mibs * 1e6

    pair_cost_total = 0.0
    pair_count = 0
    for node_id in node_ids:
        c = counts[node_id]
        pairs = c * (c - 1) // 2
        pair_cost_total += pairs * intra_cost_us
        pair_count += pairs
    for i, a in enumerate(node_ids):
        for b in node_ids[i + 1:]:
            ca, cb = counts[a], counts[b]
            share = max(_fanout_share(ca, n), _fanout_share(cb, n))
            cost = net.inter_latency_us + volume * share / net.inter_bw_mibs * 1e6
            pair_cost_total += ca * cb * cost
            pair_count += ca * cb
    avg_pair_latency_us = pair_cost_total / pair_count

    # Bottleneck process: intra exchanges serialize per process, inter
    # traffic serializes over the host NIC.
    per_iter_s = 0.0
    for node_id in node_ids:
        c = counts[node_id]
        t = (c - 1) * (net.intra_latency_us * 1e-6 + volume / net.intra_bw_mibs)
        t += (n - c) * net.inter_latency_us * 1e-6
        t += volume * c * (n - c) / net.inter_bw_mibs
        per_iter_s = max(per_iter_s, t)
    return CommCost(per_iter_s, avg_pair_latency_us)


def bottleneck_factor(
    p: Placement, job: JobSpec, host_loads: Mapping[int, int], alpha: float
) -> float:
    """Max contention factor over the job's hosts; gang steps synchronize on it.

    `host_loads` maps node_id to the total container count resident on the
    host (all jobs, this one included).
    """
    factor = 1.0
    for node_id, own in p.counts.items():
        load = host_loads.get(node_id, own)
        factor = max(factor, contention_factor(load, job.profile.mem_intensity, alpha))
    return factor


def mpi_time(job: JobSpec, factor: float, comm: CommCost) -> float:
    """Seconds of MPI execution at a fixed contention factor."""
    prof = job.profile
    return prof.iterations * (prof.compute_per_iter_s * factor + comm.per_iter_s)


def job_runtime(
    p: Placement,
    job: JobSpec,
    host_loads: Mapping[int, int],
    net: NetworkModel,
    m: OverheadModel,
    alpha: float,
) -> float:
    """Total seconds from launch to completion at static host loads."""
    comm = comm_cost(p, job, net)
    factor = bottleneck_factor(p, job, host_loads, alpha)
    return startup_overhead(p, m) + mpi_time(job, factor, comm)
