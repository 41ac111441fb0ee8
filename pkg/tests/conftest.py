from __future__ import annotations

import pytest

from scyllasim import (
    CalibrationProfile,
    NetworkModel,
    Offer,
    OverheadModel,
    ResourceVector,
)


def rv(cpus, mem) -> ResourceVector:
    return ResourceVector.of(cpus, mem)


def offers_from_maxes(maxes, demand_cpus=1):
    """Offers sized so node i can hold exactly maxes[i] unit-cpu containers."""
    return [
        Offer(node_id=i + 1, available=rv(demand_cpus * m, 10**9), epoch=0)
        for i, m in enumerate(maxes)
    ]


@pytest.fixture
def simple_profile() -> CalibrationProfile:
    return CalibrationProfile(
        name="test",
        alpha=0.1,
        overhead=OverheadModel(base_s=1.0, per_container_s=0.5),
        network=NetworkModel(
            intra_latency_us=1.0,
            inter_latency_us=10.0,
            intra_bw_mibs=1e9,
            inter_bw_mibs=1e8,
        ),
    )
