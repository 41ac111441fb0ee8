"""Dominant Resource Fairness admission ordering.

Progressive filling over exact rational shares: repeatedly grant one task's
demand to the account with the lowest dominant share (ties broken by lower
job_id) until no further task fits inside the cluster totals.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .resources import ResourceVector, fits


class ZeroClusterTotal(Exception):
    """Cluster total has a zero component; dominant shares are undefined."""


@dataclass(frozen=True)
class FrameworkAccount:
    """Per-job resource accounting used by the allocator.

    pending_tasks caps how many hypothetical grants the job can receive;
    None means the fill is bounded only by cluster capacity.
    """

    job_id: int
    allocated_total: ResourceVector
    demand_per_task: ResourceVector
    pending_tasks: Optional[int] = None


def dominant_share(allocated: ResourceVector, cluster_total: ResourceVector) -> Fraction:
    """max(allocated.cpus/total.cpus, allocated.mem/total.mem), exact."""
    if cluster_total.cpus == 0 or cluster_total.mem == 0:
        raise ZeroClusterTotal(f"cluster total has a zero component: {cluster_total}")
    return max(
        allocated.cpus / cluster_total.cpus,
        Fraction(allocated.mem, cluster_total.mem),
    )


def drf_admission_order(
    queue: list[FrameworkAccount],
    cluster_total: ResourceVector,
    until_all_ordered: bool = False,
) -> list[int]:
    """Progressive-filling grant sequence (job ids, repeats allowed).

    By default the sequence records every hypothetical one-task grant until
    capacity binds for all jobs.  With `until_all_ordered` the fill stops as
    soon as every grantable job has appeared at least once, which is all a
    caller needs for a per-epoch job ordering.
    """
    if not queue:
        raise ValueError("drf_admission_order requires a nonempty queue")
    if cluster_total.cpus == 0 or cluster_total.mem == 0:
        raise ZeroClusterTotal(f"cluster total has a zero component: {cluster_total}")

    alloc = {a.job_id: a.allocated_total for a in queue}
    remaining = {a.job_id: a.pending_tasks for a in queue}
    demand = {a.job_id: a.demand_per_task for a in queue}
    claimed = ResourceVector.zero()
    for a in queue:
        claimed = claimed + a.allocated_total

    sequence: list[int] = []
    ordered: set[int] = set()
    while True:
        best: Optional[int] = None
        best_share: Optional[Fraction] = None
        for account in queue:
            jid = account.job_id
            if until_all_ordered and jid in ordered:
                continue
            if remaining[jid] is not None and remaining[jid] <= 0:
                continue
            if demand[jid].is_zero():
                continue
            if not fits(claimed + demand[jid], cluster_total):
                continue
            share = dominant_share(alloc[jid], cluster_total)
            if best_share is None or share < best_share or (share == best_share and jid < best):
                best, best_share = jid, share
        if best is None:
            return sequence
        sequence.append(best)
        ordered.add(best)
        alloc[best] = alloc[best] + demand[best]
        claimed = claimed + demand[best]
        if remaining[best] is not None:
            remaining[best] -= 1


def first_appearance_order(sequence: list[int]) -> list[int]:
    """Dedup a grant sequence to the order in which each job first appears."""
    seen: set[int] = set()
    order = []
    for jid in sequence:
        if jid not in seen:
            seen.add(jid)
            order.append(jid)
    return order
