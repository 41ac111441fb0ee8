"""scylla-sim: deterministic simulator of an offer-based two-level cluster
scheduler placing gangs of containerized MPI processes."""

from .drf import FrameworkAccount, dominant_share, drf_admission_order
from .engine import (
    ClusterSpec,
    DeadlockError,
    Scenario,
    ScenarioInvalid,
    ScenarioJob,
    SchedulingMode,
    run_scenario,
)
from .metrics import JobMetrics, MetricsReport, sample_utilization, summarize
from .placement import (
    Placement,
    PlacementPolicy,
    eligible_offers,
    place_minhost,
    place_spread,
    validate_placement,
)
from .profiles import CalibrationProfile, load_profile, save_profile
from .resources import (
    CapacityExceeded,
    ClusterState,
    NodeState,
    Offer,
    ResourceVector,
    allocate,
    fits,
    make_offers,
    release,
)
from .scenario_io import load_bundled_scenario, load_scenario
from .workload import (
    JobSpec,
    NetworkModel,
    OverheadModel,
    WorkloadProfile,
    comm_cost,
    contention_factor,
    job_runtime,
    startup_overhead,
)

__version__ = "0.1.0"
