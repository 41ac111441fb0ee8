"""End-to-end engine tests on small hand-built scenarios."""
import pytest

from scyllasim import (
    ClusterSpec,
    DeadlockError,
    JobSpec,
    Scenario,
    ScenarioInvalid,
    ScenarioJob,
    SchedulingMode,
    WorkloadProfile,
    run_scenario,
)
from scyllasim.placement import PlacementPolicy
from tests.conftest import rv


def job(job_id, n, cpus, mem=1024, compute=2.0, iterations=1, mem_intensity=0.0,
        volume=0.0, arrival_ms=0, name=None):
    spec = JobSpec(
        job_id=job_id,
        name=name or f"job{job_id}",
        n=n,
        demand=rv(cpus, mem),
        profile=WorkloadProfile(compute, iterations, mem_intensity, volume),
    )
    return ScenarioJob(spec=spec, arrival_ms=arrival_ms)


def scenario(jobs, workers=1, cpus=48, mem=126976, policy=PlacementPolicy.SPREAD,
             mode=SchedulingMode.COSCHEDULED, epoch_ms=1000, sample_ms=1000):
    return Scenario(
        cluster=ClusterSpec(workers, rv(cpus, mem).cpus, mem),
        jobs=tuple(jobs),
        policy=policy,
        mode=mode,
        calibration="test",
        epoch_ms=epoch_ms,
        sample_ms=sample_ms,
    )


def test_degenerate_single_job_makespan(simple_profile):
    # epoch latency (1 s) + overhead (1 + 0.5) + runtime (2 s)
    report = run_scenario(scenario([job(1, n=1, cpus=4, compute=2.0)]), simple_profile)
    assert report.makespan_s == pytest.approx(1.0 + 1.5 + 2.0)
    [j] = report.per_job
    assert j.wait_s == pytest.approx(1.0)
    assert j.overhead_s == pytest.approx(1.5)
    assert j.compute_s == pytest.approx(2.0)
    assert j.comm_s == 0.0
    assert j.hosts_used == 1


def test_utilization_plateau(simple_profile):
    report = run_scenario(
        scenario([job(1, n=1, cpus=12, mem=126976 // 4)], sample_ms=500), simple_profile
    )
    values = {s.time_ms: s.cpu_util for s in report.samples}
    assert values[0] == 0.0
    assert values[2000] == pytest.approx(0.25)  # mid-run plateau
    assert report.per_job[0].finish_s == pytest.approx(4.5)


def test_per_job_decomposition_exact(simple_profile):
    report = run_scenario(
        scenario([job(1, n=4, cpus=2, compute=1.5, iterations=3, volume=0.5)]),
        simple_profile,
    )
    [j] = report.per_job
    assert j.total_s == j.overhead_s + j.compute_s + j.comm_s
    assert j.finish_s == pytest.approx(1.0 + j.total_s)


def test_gang_skip_then_launch(simple_profile):
    # two 4x12 jobs on one 48-cpu node: both cannot co-reside
    jobs = [job(1, n=4, cpus=12, compute=2.0), job(2, n=4, cpus=12, compute=2.0)]
    report = run_scenario(scenario(jobs, policy=PlacementPolicy.MINHOST), simple_profile)
    j1, j2 = report.per_job
    assert j1.wait_s == pytest.approx(1.0)
    # second gang waits for the first to finish (launch at the next epoch)
    assert j2.wait_s > j1.wait_s + 2.0


def test_coscheduling_shares_node(simple_profile):
    # two 2x12 jobs fit one 48-cpu node together
    jobs = [job(1, n=2, cpus=12, compute=2.0), job(2, n=2, cpus=12, compute=2.0)]
    report = run_scenario(scenario(jobs, policy=PlacementPolicy.MINHOST), simple_profile)
    j1, j2 = report.per_job
    assert j1.wait_s == j2.wait_s == pytest.approx(1.0)
    peak = max(s.cpu_util for s in report.samples)
    assert peak == pytest.approx(1.0)


def test_exclusive_blocks_whole_node(simple_profile):
    # 4 containers x 3 cpus = 12 of 48 cpus; the whole node is still blocked,
    # so an identical second job waits even though 36 cpus sit idle.
    jobs = [job(1, n=4, cpus=3, compute=2.0), job(2, n=4, cpus=3, compute=2.0)]
    report = run_scenario(
        scenario(jobs, mode=SchedulingMode.EXCLUSIVE, policy=PlacementPolicy.MINHOST),
        simple_profile,
    )
    j1, j2 = report.per_job
    assert j2.wait_s > j1.wait_s + 2.0
    # utilization reflects demand, not the blocked node: that is the gap
    peak = max(s.cpu_util for s in report.samples)
    assert peak == pytest.approx(12 / 48)


def test_exclusive_two_free_nodes_run_in_parallel(simple_profile):
    jobs = [job(1, n=4, cpus=3, compute=2.0), job(2, n=4, cpus=3, compute=2.0)]
    report = run_scenario(
        scenario(jobs, workers=2, mode=SchedulingMode.EXCLUSIVE,
                 policy=PlacementPolicy.MINHOST),
        simple_profile,
    )
    j1, j2 = report.per_job
    assert j1.wait_s == j2.wait_s == pytest.approx(1.0)
    assert j1.hosts_used == j2.hosts_used == 1


def test_exclusive_fcfs_no_backfill(simple_profile):
    # Job 1 blocks one node; job 2 (head of queue) needs both nodes; job 3
    # would fit the free node but must not jump the blocked head.
    jobs = [
        job(1, n=4, cpus=12, compute=4.0),          # one whole node
        job(2, n=8, cpus=12, compute=4.0),          # both nodes
        job(3, n=1, cpus=1, compute=0.5),           # tiny, would backfill
    ]
    report = run_scenario(
        scenario(jobs, workers=2, mode=SchedulingMode.EXCLUSIVE,
                 policy=PlacementPolicy.MINHOST),
        simple_profile,
    )
    by_id = {j.job_id: j for j in report.per_job}
    assert by_id[1].wait_s == pytest.approx(1.0)
    # job 3 launches strictly after job 2 despite an idle node being free
    launch_2 = by_id[2].arrival_s + by_id[2].wait_s
    launch_3 = by_id[3].arrival_s + by_id[3].wait_s
    assert launch_3 >= launch_2
    assert by_id[2].wait_s > 4.0  # waited for job 1 to release its node


def test_deadlock_reports_job_id(simple_profile):
    too_big = job(1, n=5, cpus=12, compute=1.0)  # 60 cpus > one 48-cpu node? fits on 2...
    with pytest.raises(DeadlockError) as exc:
        run_scenario(scenario([too_big], workers=1), simple_profile)
    assert exc.value.job_id == 1


def test_exclusive_job_larger_than_cluster_deadlocks(simple_profile):
    jobs = [job(1, n=20, cpus=12, compute=1.0)]  # 240 cpus > 2x48
    with pytest.raises(DeadlockError):
        run_scenario(
            scenario(jobs, workers=2, mode=SchedulingMode.EXCLUSIVE), simple_profile
        )


def test_contention_rescaling_two_overlapping_jobs(simple_profile):
    # Job 1 runs alone, then job 2's container lands on the same host and
    # slows it.  Containers block resources (and contend) from launch, so
    # job 1 is rescaled at job 2's launch instant.
    # alpha=0.1, mem_intensity=1: alone factor=1.0, together factor=1.1.
    jobs = [
        job(1, n=1, cpus=4, compute=10.0, mem_intensity=1.0),
        job(2, n=1, cpus=4, compute=10.0, mem_intensity=1.0, arrival_ms=3000),
    ]
    report = run_scenario(scenario(jobs), simple_profile)
    j1 = report.per_job[0]
    # j1: ready at 2.5s, alone until j2 launches at 3.0s (0.5s at rate 1),
    # then factor 1.1 for the remaining 9.5 units -> 10.45s more.
    assert j1.compute_s == pytest.approx(0.5 + 10.45, abs=0.01)
    assert j1.finish_s == pytest.approx(13.45, abs=0.01)
    j2 = report.per_job[1]
    # j2: ready at 4.5s, factor 1.1 until j1 finishes at 13.45s (8.95s of
    # wall time = 8.136 units), then alone for the remaining 1.864 units.
    assert j2.compute_s == pytest.approx(8.95 + 1.864, abs=0.01)
    assert j2.compute_s > 10.0


def test_determinism_identical_reports(simple_profile):
    jobs = [
        job(1, n=3, cpus=5, compute=1.7, iterations=3, mem_intensity=0.8),
        job(2, n=2, cpus=7, compute=0.9, iterations=2, volume=0.25, arrival_ms=1500),
    ]
    s = scenario(jobs, workers=3)
    assert run_scenario(s, simple_profile) == run_scenario(s, simple_profile)


def test_scenario_validation():
    with pytest.raises(ScenarioInvalid):
        run_scenario(scenario([], workers=1))
    with pytest.raises(ScenarioInvalid):
        run_scenario(scenario([job(1, 1, 1)], workers=0))


def test_event_causality_ready_before_finish(simple_profile):
    report = run_scenario(scenario([job(1, n=2, cpus=4, compute=1.0)]), simple_profile)
    [j] = report.per_job
    assert j.finish_s >= j.wait_s + j.overhead_s


def test_arrival_at_epoch_boundary_launches_same_epoch(simple_profile):
    report = run_scenario(
        scenario([job(1, n=1, cpus=4, compute=1.0, arrival_ms=2000)]), simple_profile
    )
    assert report.per_job[0].wait_s == 0.0


def test_samples_start_at_zero_and_strictly_increase(simple_profile):
    report = run_scenario(
        scenario([job(1, n=2, cpus=4, compute=3.0)], sample_ms=700), simple_profile
    )
    times = [s.time_ms for s in report.samples]
    assert times[0] == 0
    assert all(b > a for a, b in zip(times, times[1:]))


def test_zero_length_mpi_phase(simple_profile):
    report = run_scenario(
        scenario([job(1, n=1, cpus=4, compute=0.0)]), simple_profile
    )
    [j] = report.per_job
    assert j.compute_s == 0.0
    assert j.comm_s == 0.0
    assert j.total_s == pytest.approx(j.overhead_s)


def test_lower_job_id_launches_first_when_capacity_binds(simple_profile):
    # identical pending jobs, room for one: id order decides
    jobs = [job(2, n=4, cpus=12, compute=2.0), job(1, n=4, cpus=12, compute=2.0)]
    report = run_scenario(scenario(jobs, policy=PlacementPolicy.MINHOST), simple_profile)
    by_id = {j.job_id: j for j in report.per_job}
    assert by_id[1].wait_s < by_id[2].wait_s


def test_exclusive_reservation_released_after_finish(simple_profile):
    jobs = [
        job(1, n=2, cpus=3, compute=1.0),
        job(2, n=2, cpus=3, compute=1.0, arrival_ms=0),
        job(3, n=2, cpus=3, compute=1.0, arrival_ms=0),
    ]
    report = run_scenario(
        scenario(jobs, workers=1, mode=SchedulingMode.EXCLUSIVE,
                 policy=PlacementPolicy.MINHOST),
        simple_profile,
    )
    finishes = sorted(j.finish_s for j in report.per_job)
    assert len(report.per_job) == 3
    assert finishes[0] < finishes[1] < finishes[2]  # strictly serial on one node
    assert max(s.cpu_util for s in report.samples) == pytest.approx(6 / 48)


def test_run_scenario_loads_profile_by_name():
    s = scenario([job(1, n=1, cpus=4, compute=1.0)])
    s = __import__("dataclasses").replace(s, calibration="chameleon-2017")
    report = run_scenario(s)  # profile resolved from the bundled data dir
    assert report.per_job[0].overhead_s == pytest.approx(2.04)  # base 2 + 0.04


def test_offer_epochs_counted(simple_profile):
    # two jobs forced into consecutive occupancy: job 1 launches at epoch 1,
    # runs 1.0 + 3.0 overhead + 0.4 compute = finishes at 4.4; job 2 gets the
    # first epoch after that, at t=5.
    jobs = [job(1, n=4, cpus=12, compute=0.4), job(2, n=4, cpus=12, compute=0.4)]
    report = run_scenario(scenario(jobs, policy=PlacementPolicy.MINHOST), simple_profile)
    waits = sorted(j.wait_s for j in report.per_job)
    assert waits[0] == pytest.approx(1.0)
    assert waits[1] == pytest.approx(5.0)


def test_static_runtime_matches_engine_when_no_overlap(simple_profile):
    # engine total equals the closed-form runtime (within ms quantization)
    # when host loads never change
    from scyllasim import job_runtime
    from scyllasim.placement import Placement

    sjob = job(1, n=4, cpus=6, compute=1.2, iterations=5, volume=0.3, mem_intensity=0.5)
    report = run_scenario(scenario([sjob], workers=2), simple_profile)
    [metrics] = report.per_job
    placement = Placement(1, ((0, 1), (1, 2), (2, 1), (3, 2)))
    expected = job_runtime(
        placement, sjob.spec, dict(placement.counts),
        simple_profile.network, simple_profile.overhead, simple_profile.alpha,
    )
    assert metrics.total_s == pytest.approx(expected, abs=2e-3)
