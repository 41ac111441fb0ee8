"""Resource arithmetic, node/cluster state, and offer generation.

CPU quantities are exact rationals (``fractions.Fraction``) and memory is an
integer MiB count, so capacity and conservation checks never suffer float
drift.  All state objects are immutable; "mutation" returns a new value.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Union

CpuLike = Union[int, float, str, Fraction]


class CapacityExceeded(Exception):
    """An allocation would push a node past its capacity (scheduler bug)."""


def _as_cpus(value: CpuLike) -> Fraction:
    # Floats go through str() so literals like 1.8 mean the decimal 1.8,
    # not its binary approximation.
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        return Fraction(str(value))
    if isinstance(value, str):
        return Fraction(value)
    raise TypeError(f"cannot interpret {value!r} as a cpu quantity")


@dataclass(frozen=True)
class ResourceVector:
    """A (cpus, mem MiB) quantity: capacity, demand, allocation, or offer."""

    cpus: Fraction
    mem: int

    def __post_init__(self) -> None:
        if not isinstance(self.cpus, Fraction):
            object.__setattr__(self, "cpus", _as_cpus(self.cpus))
        if self.cpus < 0 or self.mem < 0:
            raise ValueError(f"negative resource component: {self}")

    @classmethod
    def of(cls, cpus: CpuLike, mem: int) -> "ResourceVector":
        return cls(_as_cpus(cpus), int(mem))

    @classmethod
    def zero(cls) -> "ResourceVector":
        return cls(Fraction(0), 0)

    def __add__(self, other: "ResourceVector") -> "ResourceVector":
        return ResourceVector(self.cpus + other.cpus, self.mem + other.mem)

    def __sub__(self, other: "ResourceVector") -> "ResourceVector":
        cpus = self.cpus - other.cpus
        mem = self.mem - other.mem
        if cpus < 0 or mem < 0:
            raise ValueError(f"subtraction yields negative component: {self} - {other}")
        return ResourceVector(cpus, mem)

    def scaled(self, count: int) -> "ResourceVector":
        return ResourceVector(self.cpus * count, self.mem * count)

    def is_zero(self) -> bool:
        return self.cpus == 0 and self.mem == 0

    def __str__(self) -> str:
        return f"({float(self.cpus)} cpus, {self.mem} MiB)"


def fits(demand: ResourceVector, available: ResourceVector) -> bool:
    """True iff demand <= available component-wise."""
    return demand.cpus <= available.cpus and demand.mem <= available.mem


@dataclass(frozen=True)
class NodeState:
    """One agent's capacity and current allocation."""

    node_id: int
    capacity: ResourceVector
    allocated: ResourceVector = field(default_factory=ResourceVector.zero)

    def __post_init__(self) -> None:
        if not fits(self.allocated, self.capacity):
            raise CapacityExceeded(f"node {self.node_id}: allocated exceeds capacity")

    @property
    def available(self) -> ResourceVector:
        return self.capacity - self.allocated

    def is_idle(self) -> bool:
        return self.allocated.is_zero()


def allocate(node: NodeState, demand: ResourceVector) -> NodeState:
    """Block `demand` on the node; raises CapacityExceeded if it cannot fit."""
    if not fits(demand, node.available):
        raise CapacityExceeded(
            f"node {node.node_id}: demand {demand} exceeds available {node.available}"
        )
    return NodeState(node.node_id, node.capacity, node.allocated + demand)


def release(node: NodeState, demand: ResourceVector) -> NodeState:
    """Inverse of :func:`allocate`; restores the prior state exactly."""
    return NodeState(node.node_id, node.capacity, node.allocated - demand)


@dataclass(frozen=True)
class Offer:
    """One node's unallocated remainder, advertised for an offer cycle."""

    node_id: int
    available: ResourceVector
    epoch: int


@dataclass(frozen=True)
class ClusterState:
    """All agent nodes plus the head node, which never hosts containers."""

    nodes: tuple[NodeState, ...]
    head_node_id: int

    def __post_init__(self) -> None:
        ids = [n.node_id for n in self.nodes]
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate node_id in cluster")
        if ids != sorted(ids):
            object.__setattr__(self, "nodes", tuple(sorted(self.nodes, key=lambda n: n.node_id)))

    @classmethod
    def build(cls, workers: int, capacity: ResourceVector, head_node_id: int = 0) -> "ClusterState":
        """A head node (zero capacity, never offered) plus `workers` agents."""
        head = NodeState(head_node_id, ResourceVector.zero())
        agents = tuple(NodeState(head_node_id + i + 1, capacity) for i in range(workers))
        return cls((head,) + agents, head_node_id)

    def node(self, node_id: int) -> NodeState:
        for n in self.nodes:
            if n.node_id == node_id:
                return n
        raise KeyError(node_id)

    def worker_nodes(self) -> tuple[NodeState, ...]:
        return tuple(n for n in self.nodes if n.node_id != self.head_node_id)

    def with_node(self, node: NodeState) -> "ClusterState":
        return ClusterState(
            tuple(node if n.node_id == node.node_id else n for n in self.nodes),
            self.head_node_id,
        )

    def total_capacity(self) -> ResourceVector:
        total = ResourceVector.zero()
        for n in self.worker_nodes():
            total = total + n.capacity
        return total

    def total_allocated(self) -> ResourceVector:
        total = ResourceVector.zero()
        for n in self.worker_nodes():
            total = total + n.allocated
        return total


def make_offers(cluster: ClusterState, epoch: int) -> list[Offer]:
    """One offer per non-head node with anything left, ascending node_id."""
    offers = []
    for node in cluster.worker_nodes():
        avail = node.available
        if avail.cpus > 0 or avail.mem > 0:
            offers.append(Offer(node.node_id, avail, epoch))
    return offers
