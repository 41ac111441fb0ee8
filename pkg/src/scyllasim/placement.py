"""Container placement policies: Spread and MinHost.

Both policies map a gang of n identical containers onto accepted offers.
Spread balances round-robin across every eligible node; MinHost packs onto
the fewest nodes (greedy by descending capacity, which is optimal for
identical items).
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import cached_property

from .resources import Offer, ResourceVector


class InsufficientCapacity(Exception):
    """The eligible offers cannot hold the whole gang."""


class PlacementPolicy(enum.Enum):
    SPREAD = "spread"
    MINHOST = "minhost"

    @classmethod
    def parse(cls, text: str) -> "PlacementPolicy":
        try:
            return cls(text.lower())
        except ValueError:
            raise ValueError(f"unknown placement policy: {text!r}") from None


@dataclass(frozen=True)
class Placement:
    """Assignment of each process rank of one job to a node."""

    job_id: int
    assignments: tuple[tuple[int, int], ...]  # (rank, node_id)

    @cached_property
    def counts(self) -> dict[int, int]:
        counts: dict[int, int] = {}
        for _rank, node_id in self.assignments:
            counts[node_id] = counts.get(node_id, 0) + 1
        return counts

    @property
    def n(self) -> int:
        return len(self.assignments)

    @property
    def hosts_used(self) -> int:
        return len(self.counts)

    def node_ids(self) -> list[int]:
        return sorted(self.counts)

    @property
    def master_node_id(self) -> int:
        """Node hosting rank 0 (the master container)."""
        for rank, node_id in self.assignments:
            if rank == 0:
                return node_id
        raise ValueError("placement has no rank 0")


def eligible_offers(
    offers: list[Offer], demand: ResourceVector
) -> list[tuple[Offer, int]]:
    """Pair each offer with how many containers of `demand` it can hold.

    A zero demand component is unconstrained.  Offers that cannot hold a
    single container are dropped; input order (ascending node_id) is kept.
    """
    if demand.is_zero():
        raise ValueError("demand must be positive in at least one component")
    result = []
    for offer in offers:
        caps = []
        if demand.cpus > 0:
            caps.append(int(offer.available.cpus / demand.cpus))
        if demand.mem > 0:
            caps.append(offer.available.mem // demand.mem)
        max_containers = min(caps)
        if max_containers > 0:
            result.append((offer, max_containers))
    return result


def place_spread(
    eligible: list[tuple[Offer, int]], n: int, job_id: int = 0
) -> Placement:
    """Round-robin one container per node per pass, skipping saturated nodes."""
    if sum(cap for _, cap in eligible) < n:
        raise InsufficientCapacity(f"cannot place {n} containers on offered capacity")
    counts = {offer.node_id: 0 for offer, _ in eligible}
    caps = {offer.node_id: cap for offer, cap in eligible}
    order = [offer.node_id for offer, _ in eligible]
    assignments = []
    rank = 0
    while rank < n:
        for node_id in order:
            if rank >= n:
                break
            if counts[node_id] < caps[node_id]:
                assignments.append((rank, node_id))
                counts[node_id] += 1
                rank += 1
    return Placement(job_id, tuple(assignments))


def place_minhost(
    eligible: list[tuple[Offer, int]], n: int, job_id: int = 0
) -> Placement:
    """Fill the roomiest nodes first; minimal host count for identical items."""
    if sum(cap for _, cap in eligible) < n:
        raise InsufficientCapacity(f"cannot place {n} containers on offered capacity")
    ordered = sorted(eligible, key=lambda pair: (-pair[1], pair[0].node_id))
    assignments = []
    rank = 0
    for offer, cap in ordered:
        take = min(cap, n - rank)
        for _ in range(take):
            assignments.append((rank, offer.node_id))
            rank += 1
        if rank == n:
            break
    return Placement(job_id, tuple(assignments))


def place(
    policy: PlacementPolicy, eligible: list[tuple[Offer, int]], n: int, job_id: int = 0
) -> Placement:
    if policy is PlacementPolicy.SPREAD:
        return place_spread(eligible, n, job_id)
    return place_minhost(eligible, n, job_id)


def validate_placement(p: Placement, eligible: list[tuple[Offer, int]]) -> bool:
    """Check ranks 0..n-1 appear exactly once and per-node caps hold."""
    ranks = sorted(rank for rank, _ in p.assignments)
    if ranks != list(range(len(p.assignments))):
        return False
    caps = {offer.node_id: cap for offer, cap in eligible}
    for node_id, count in p.counts.items():
        if node_id not in caps or count > caps[node_id]:
            return False
    return True
