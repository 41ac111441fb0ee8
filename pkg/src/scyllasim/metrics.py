"""Utilization sampling and run summarization.

Utilization counts BLOCKED (allocated) resources, i.e. what the resource
manager has granted, not instantaneous hardware usage.  In exclusive mode a
reserved-but-idle remainder of a node therefore shows up as the utilization
gap between the two scheduling modes.
"""
from __future__ import annotations

from dataclasses import dataclass

from .resources import ClusterState


class EmptyRun(Exception):
    """A run produced no samples; nothing to summarize."""


@dataclass(frozen=True)
class UtilizationSample:
    time_ms: int
    cpu_util: float
    mem_util: float


@dataclass(frozen=True)
class JobMetrics:
    """Per-job outcome; total_s = overhead_s + compute_s + comm_s exactly."""

    job_id: int
    name: str
    wait_s: float
    overhead_s: float
    compute_s: float
    comm_s: float
    total_s: float
    hosts_used: int
    avg_pair_latency_us: float
    arrival_s: float
    finish_s: float


@dataclass(frozen=True)
class MetricsReport:
    samples: tuple[UtilizationSample, ...]
    per_job: tuple[JobMetrics, ...]
    makespan_s: float
    avg_cpu_util: float
    avg_mem_util: float


def sample_utilization(cluster: ClusterState) -> tuple[float, float]:
    """(cpu fraction, mem fraction) of blocked resources over non-head nodes."""
    cap = cluster.total_capacity()
    alloc = cluster.total_allocated()
    cpu = float(alloc.cpus / cap.cpus) if cap.cpus > 0 else 0.0
    mem = alloc.mem / cap.mem if cap.mem > 0 else 0.0
    return cpu, mem


def summarize(
    samples: list[UtilizationSample], per_job: list[JobMetrics]
) -> MetricsReport:
    """Time-weighted averages over [0, makespan]; makespan = last job finish.

    Each sample's value holds until the next sample (step function), so
    refining a constant interval into sub-samples leaves the averages
    unchanged.
    """
    if not samples:
        raise EmptyRun("no utilization samples recorded")
    ordered_jobs = tuple(sorted(per_job, key=lambda j: j.job_id))
    makespan_s = max((j.finish_s for j in ordered_jobs), default=0.0)
    makespan_ms = round(makespan_s * 1000)

    kept = [s for s in samples if s.time_ms <= makespan_ms]
    if not kept:
        kept = samples[:1]
    if makespan_ms <= 0:
        return MetricsReport(
            tuple(kept), ordered_jobs, makespan_s, kept[-1].cpu_util, kept[-1].mem_util
        )

    cpu_area = 0.0
    mem_area = 0.0
    for i, sample in enumerate(kept):
        end = kept[i + 1].time_ms if i + 1 < len(kept) else makespan_ms
        width = end - sample.time_ms
        cpu_area += sample.cpu_util * width
        mem_area += sample.mem_util * width
    return MetricsReport(
        tuple(kept),
        ordered_jobs,
        makespan_s,
        cpu_area / makespan_ms,
        mem_area / makespan_ms,
    )
