"""Deterministic discrete-event engine.

Runs a scenario end to end: job arrivals, offer epochs, gang placement
(DRF-ordered co-scheduling or whole-node FCFS exclusive mode), container
startup, piecewise-constant-rate MPI execution under contention, job
completion, and utilization sampling.

Time is integer milliseconds.  Events are processed in (time, kind, seq)
order with a fixed kind priority, so identical scenarios replay identically.
A running job's remaining work is rescaled whenever the container population
of one of its hosts changes (another gang launches or finishes), which makes
execution rates piecewise constant.
"""
from __future__ import annotations

import enum
import heapq
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .drf import FrameworkAccount, drf_admission_order, first_appearance_order
from .metrics import JobMetrics, MetricsReport, UtilizationSample, sample_utilization, summarize
from .placement import (
    Placement,
    PlacementPolicy,
    eligible_offers,
    place,
)
from .profiles import CalibrationProfile, load_profile
from .resources import (
    ClusterState,
    Offer,
    ResourceVector,
    allocate,
    release,
)
from .workload import CommCost, JobSpec, comm_cost, contention_factor, startup_overhead


class ScenarioInvalid(Exception):
    pass


class DeadlockError(Exception):
    """A pending job cannot fit even on an idle cluster."""

    def __init__(self, job_id: int, message: str):
        super().__init__(message)
        self.job_id = job_id


class SchedulingMode(enum.Enum):
    COSCHEDULED = "coscheduled"
    EXCLUSIVE = "exclusive"

    @classmethod
    def parse(cls, text: str) -> "SchedulingMode":
        try:
            return cls(text.lower())
        except ValueError:
            raise ValueError(f"unknown scheduling mode: {text!r}") from None


class EventKind(enum.IntEnum):
    # Numeric order is the tie-break at equal timestamps: releases land
    # before the offer cycle, and sampling sees the post-transition state.
    JOB_FINISH = 0
    CONTAINERS_READY = 1
    JOB_ARRIVAL = 2
    OFFER_EPOCH = 3
    SAMPLE = 4


@dataclass(frozen=True)
class ClusterSpec:
    workers: int
    cpus_per_node: Fraction
    mem_mib_per_node: int

    def capacity(self) -> ResourceVector:
        return ResourceVector.of(self.cpus_per_node, self.mem_mib_per_node)


@dataclass(frozen=True)
class ScenarioJob:
    spec: JobSpec
    arrival_ms: int


@dataclass(frozen=True)
class Scenario:
    cluster: ClusterSpec
    jobs: tuple[ScenarioJob, ...]
    policy: PlacementPolicy
    mode: SchedulingMode
    calibration: str
    epoch_ms: int = 1000
    sample_ms: int = 1000
    seed: int = 0

    def validate(self) -> None:
        if self.cluster.workers < 1:
            raise ScenarioInvalid("scenario needs at least one non-head node")
        if self.cluster.cpus_per_node <= 0 or self.cluster.mem_mib_per_node <= 0:
            raise ScenarioInvalid("per-node capacity must be positive")
        if not self.jobs:
            raise ScenarioInvalid("scenario needs at least one job")
        if self.epoch_ms < 1 or self.sample_ms < 1:
            raise ScenarioInvalid("epoch_ms and sample_ms must be positive")
        ids = [job.spec.job_id for job in self.jobs]
        if len(set(ids)) != len(ids):
            raise ScenarioInvalid("duplicate job_id in scenario")
        for job in self.jobs:
            if job.arrival_ms < 0:
                raise ScenarioInvalid(f"job {job.spec.job_id}: negative arrival time")


def _ms(seconds: float) -> int:
    return round(seconds * 1000)


@dataclass
class _RunningJob:
    spec: JobSpec
    placement: Placement
    arrival_ms: int
    launch_ms: int
    ready_ms: int
    comm: CommCost
    compute_total_s: float  # iterations * compute_per_iter at factor 1
    comm_total_s: float
    mpi_started: bool = False
    remaining: float = 1.0  # fraction of the MPI phase left
    factor: float = 1.0
    segment_start_ms: int = 0
    compute_elapsed_s: float = 0.0
    comm_elapsed_s: float = 0.0
    generation: int = 0

    def segment_rate_s(self) -> float:
        """Seconds one full MPI phase would take at the current factor."""
        return self.compute_total_s * self.factor + self.comm_total_s


class _Engine:
    def __init__(self, scenario: Scenario, profile: CalibrationProfile):
        self.scenario = scenario
        self.profile = profile
        self.cluster = ClusterState.build(scenario.cluster.workers, scenario.cluster.capacity())
        self.heap: list[tuple[int, int, int, object]] = []
        self.seq = 0
        self.epoch_no = 0
        self.pending: dict[int, ScenarioJob] = {}
        self.arrived: set[int] = set()
        self.running: dict[int, _RunningJob] = {}
        self.reserved: dict[int, int] = {}  # node_id -> job_id (exclusive mode)
        self.container_counts: dict[int, int] = {}
        self.samples: list[UtilizationSample] = []
        self.per_job: list[JobMetrics] = []
        self.jobs_by_id = {job.spec.job_id: job for job in scenario.jobs}

    # -- event plumbing -----------------------------------------------------

    def _push(self, time_ms: int, kind: EventKind, payload: object = None) -> None:
        heapq.heappush(self.heap, (time_ms, int(kind), self.seq, payload))
        self.seq += 1

    def _all_done(self) -> bool:
        return not self.pending and not self.running and len(self.arrived) == len(self.jobs_by_id)

    # -- helpers ------------------------------------------------------------

    def _offers(self, full_capacity: bool = False, free_only: bool = False) -> list[Offer]:
        offers = []
        for node in self.cluster.worker_nodes():
            if node.node_id in self.reserved:
                continue
            if free_only and not node.is_idle():
                continue
            avail = node.capacity if full_capacity else node.available
            if avail.cpus > 0 or avail.mem > 0:
                offers.append(Offer(node.node_id, avail, self.epoch_no))
        return offers

    def _gang_fits(self, spec: JobSpec, offers: list[Offer]) -> Optional[list]:
        eligible = eligible_offers(offers, spec.demand)
        if sum(cap for _, cap in eligible) < spec.n:
            return None
        return eligible

    def _check_feasible(self, spec: JobSpec) -> None:
        # Against an idle cluster: every node at full capacity.
        idle_offers = [
            Offer(n.node_id, n.capacity, self.epoch_no)
            for n in self.cluster.worker_nodes()
            if not n.capacity.is_zero()
        ]
        if self._gang_fits(spec, idle_offers) is None:
            raise DeadlockError(
                spec.job_id,
                f"job {spec.job_id} ({spec.name}) can never fit: "
                f"{spec.n} x {spec.demand} exceeds idle cluster capacity",
            )

    def _bottleneck_factor(self, job: _RunningJob) -> float:
        factor = 1.0
        mi = job.spec.profile.mem_intensity
        for node_id in job.placement.counts:
            load = self.container_counts.get(node_id, 0)
            factor = max(factor, contention_factor(load, mi, self.profile.alpha))
        return factor

    def _close_segment(self, job: _RunningJob, now_ms: int) -> None:
        elapsed_s = (now_ms - job.segment_start_ms) / 1000.0
        if elapsed_s <= 0:
            return
        rate = job.segment_rate_s()
        if rate > 0:
            consumed = min(job.remaining, elapsed_s / rate)
            job.compute_elapsed_s += elapsed_s * (job.compute_total_s * job.factor / rate)
            job.comm_elapsed_s += elapsed_s * (job.comm_total_s / rate)
            job.remaining -= consumed
        else:
            job.remaining = 0.0
        job.segment_start_ms = now_ms

    def _schedule_finish(self, job: _RunningJob, now_ms: int) -> None:
        job.generation += 1
        duration_ms = _ms(job.remaining * job.segment_rate_s())
        self._push(now_ms + duration_ms, EventKind.JOB_FINISH,
                   (job.spec.job_id, job.generation))

    def _rescale_running(self, now_ms: int) -> None:
        for job in self.running.values():
            if not job.mpi_started:
                continue
            factor = self._bottleneck_factor(job)
            if factor != job.factor:
                self._close_segment(job, now_ms)
                job.factor = factor
                self._schedule_finish(job, now_ms)

    # -- job lifecycle ------------------------------------------------------

    def _launch(self, sjob: ScenarioJob, placement: Placement, now_ms: int,
                reserve_nodes: bool) -> None:
        spec = sjob.spec
        for node_id, count in placement.counts.items():
            node = allocate(self.cluster.node(node_id), spec.demand.scaled(count))
            self.cluster = self.cluster.with_node(node)
            self.container_counts[node_id] = self.container_counts.get(node_id, 0) + count
            if reserve_nodes:
                self.reserved[node_id] = spec.job_id
        overhead_s = startup_overhead(placement, self.profile.overhead)
        ready_ms = now_ms + _ms(overhead_s)
        comm = comm_cost(placement, spec, self.profile.network)
        prof = spec.profile
        job = _RunningJob(
            spec=spec,
            placement=placement,
            arrival_ms=sjob.arrival_ms,
            launch_ms=now_ms,
            ready_ms=ready_ms,
            comm=comm,
            compute_total_s=prof.iterations * prof.compute_per_iter_s,
            comm_total_s=prof.iterations * comm.per_iter_s,
        )
        self.running[spec.job_id] = job
        del self.pending[spec.job_id]
        self._push(ready_ms, EventKind.CONTAINERS_READY, spec.job_id)
        self._rescale_running(now_ms)
        self._audit()

    def _finish(self, job_id: int, now_ms: int) -> None:
        job = self.running.pop(job_id)
        self._close_segment(job, now_ms)
        spec = job.spec
        for node_id, count in job.placement.counts.items():
            node = release(self.cluster.node(node_id), spec.demand.scaled(count))
            self.cluster = self.cluster.with_node(node)
            remaining = self.container_counts[node_id] - count
            if remaining:
                self.container_counts[node_id] = remaining
            else:
                del self.container_counts[node_id]
            if self.reserved.get(node_id) == job_id:
                del self.reserved[node_id]
        overhead_s = (job.ready_ms - job.launch_ms) / 1000.0
        compute_s = job.compute_elapsed_s
        comm_s = job.comm_elapsed_s
        self.per_job.append(
            JobMetrics(
                job_id=spec.job_id,
                name=spec.name,
                wait_s=(job.launch_ms - job.arrival_ms) / 1000.0,
                overhead_s=overhead_s,
                compute_s=compute_s,
                comm_s=comm_s,
                total_s=overhead_s + compute_s + comm_s,
                hosts_used=job.placement.hosts_used,
                avg_pair_latency_us=job.comm.avg_pair_latency_us,
                arrival_s=job.arrival_ms / 1000.0,
                finish_s=now_ms / 1000.0,
            )
        )
        self._rescale_running(now_ms)
        self._audit()

    # -- scheduling passes --------------------------------------------------

    def _schedule_coscheduled(self, now_ms: int) -> None:
        if not self.pending or not self._offers():
            return
        accounts = [
            FrameworkAccount(
                job_id=jid,
                allocated_total=ResourceVector.zero(),
                demand_per_task=sjob.spec.demand,
                pending_tasks=sjob.spec.n,
            )
            for jid, sjob in sorted(self.pending.items())
        ]
        total = self.cluster.total_capacity()
        order = first_appearance_order(
            drf_admission_order(accounts, total, until_all_ordered=True)
        )
        seen = set(order)
        order += [jid for jid in sorted(self.pending) if jid not in seen]
        for jid in order:
            if jid not in self.pending:
                continue
            sjob = self.pending[jid]
            eligible = self._gang_fits(sjob.spec, self._offers())
            if eligible is None:
                continue  # gang semantics: skip this epoch, retry next
            placement = place(self.scenario.policy, eligible, sjob.spec.n, jid)
            self._launch(sjob, placement, now_ms, reserve_nodes=False)

    def _schedule_exclusive(self, now_ms: int) -> None:
        # Strict FCFS: whole nodes only, stop at the first job that cannot fit.
        while self.pending:
            jid, sjob = min(
                self.pending.items(), key=lambda item: (item[1].arrival_ms, item[0])
            )
            eligible = self._gang_fits(
                sjob.spec, self._offers(full_capacity=True, free_only=True)
            )
            if eligible is None:
                return
            placement = place(self.scenario.policy, eligible, sjob.spec.n, jid)
            self._launch(sjob, placement, now_ms, reserve_nodes=True)

    # -- audits -------------------------------------------------------------

    def _audit(self) -> None:
        """Capacity safety and conservation check.

        Runs after every allocation change (launch and finish); cluster
        state is immutable between those, and NodeState construction
        already rejects any allocation exceeding capacity, so this covers
        every event time.
        """
        expected_cpus: dict[int, Fraction] = {}
        expected_mem: dict[int, int] = {}
        for job in self.running.values():
            demand = job.spec.demand
            for node_id, count in job.placement.counts.items():
                expected_cpus[node_id] = expected_cpus.get(node_id, 0) + demand.cpus * count
                expected_mem[node_id] = expected_mem.get(node_id, 0) + demand.mem * count
        for node in self.cluster.nodes:
            if (node.allocated.cpus != expected_cpus.get(node.node_id, 0)
                    or node.allocated.mem != expected_mem.get(node.node_id, 0)):
                raise RuntimeError(
                    f"conservation violated on node {node.node_id}: "
                    f"allocated {node.allocated} != running job demand"
                )
            if (node.allocated.cpus > node.capacity.cpus
                    or node.allocated.mem > node.capacity.mem):
                raise RuntimeError(f"capacity safety violated on node {node.node_id}")

    # -- main loop ----------------------------------------------------------

    def run(self) -> MetricsReport:
        for sjob in sorted(self.scenario.jobs, key=lambda j: (j.arrival_ms, j.spec.job_id)):
            self._push(sjob.arrival_ms, EventKind.JOB_ARRIVAL, sjob.spec.job_id)
        self._push(0, EventKind.SAMPLE, None)
        self._push(self.scenario.epoch_ms, EventKind.OFFER_EPOCH, None)

        while self.heap:
            time_ms, kind, _seq, payload = heapq.heappop(self.heap)
            kind = EventKind(kind)
            if kind is EventKind.JOB_FINISH:
                job_id, generation = payload
                job = self.running.get(job_id)
                if job is None or job.generation != generation:
                    continue  # superseded by a rescale
                self._finish(job_id, time_ms)
            elif kind is EventKind.CONTAINERS_READY:
                job = self.running[payload]
                job.mpi_started = True
                job.segment_start_ms = time_ms
                job.factor = self._bottleneck_factor(job)
                self._schedule_finish(job, time_ms)
            elif kind is EventKind.JOB_ARRIVAL:
                sjob = self.jobs_by_id[payload]
                self.arrived.add(payload)
                self._check_feasible(sjob.spec)
                self.pending[payload] = sjob
            elif kind is EventKind.OFFER_EPOCH:
                self.epoch_no += 1
                if self.scenario.mode is SchedulingMode.COSCHEDULED:
                    self._schedule_coscheduled(time_ms)
                else:
                    self._schedule_exclusive(time_ms)
                if not self._all_done():
                    self._push(time_ms + self.scenario.epoch_ms, EventKind.OFFER_EPOCH, None)
            elif kind is EventKind.SAMPLE:
                cpu, mem = sample_utilization(self.cluster)
                self.samples.append(UtilizationSample(time_ms, cpu, mem))
                if not self._all_done():
                    self._push(time_ms + self.scenario.sample_ms, EventKind.SAMPLE, None)

        return summarize(self.samples, self.per_job)


def run_scenario(
    scenario: Scenario, profile: Optional[CalibrationProfile] = None
) -> MetricsReport:
    """Run one scenario to completion and return its metrics.

    Output is bit-identical across runs of the same scenario and profile.
    """
    scenario.validate()
    if profile is None:
        profile = load_profile(scenario.calibration)
    return _Engine(scenario, profile).run()
