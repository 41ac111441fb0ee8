import pytest

from scyllasim import ClusterState, allocate, sample_utilization, summarize
from scyllasim.metrics import EmptyRun, JobMetrics, UtilizationSample
from tests.conftest import rv


def job_metrics(job_id=1, finish_s=10.0, **overrides):
    values = dict(
        job_id=job_id,
        name="j",
        wait_s=1.0,
        overhead_s=2.0,
        compute_s=3.0,
        comm_s=0.5,
        total_s=5.5,
        hosts_used=2,
        avg_pair_latency_us=1.0,
        arrival_s=0.0,
        finish_s=finish_s,
    )
    values.update(overrides)
    return JobMetrics(**values)


def test_sample_idle_cluster():
    cluster = ClusterState.build(4, rv(48, 126976))
    assert sample_utilization(cluster) == (0.0, 0.0)


def test_sample_fully_allocated():
    cluster = ClusterState.build(2, rv(48, 126976))
    for node_id in (1, 2):
        cluster = cluster.with_node(allocate(cluster.node(node_id), rv(48, 126976)))
    assert sample_utilization(cluster) == (1.0, 1.0)


def test_sample_quarter_cpu():
    cluster = ClusterState.build(4, rv(48, 126976))
    cluster = cluster.with_node(allocate(cluster.node(1), rv(48, 0)))
    cpu, mem = sample_utilization(cluster)
    assert cpu == 0.25
    assert mem == 0.0


def test_summarize_constant_utilization():
    samples = [UtilizationSample(t, 0.5, 0.25) for t in (0, 1000, 2000, 3000)]
    report = summarize(samples, [job_metrics(finish_s=4.0)])
    assert report.avg_cpu_util == pytest.approx(0.5)
    assert report.avg_mem_util == pytest.approx(0.25)
    assert report.makespan_s == 4.0


def test_summarize_weighted_mean():
    # half the run at 0.2, half at 0.6
    samples = [UtilizationSample(0, 0.2, 0.2), UtilizationSample(5000, 0.6, 0.6)]
    report = summarize(samples, [job_metrics(finish_s=10.0)])
    assert report.avg_cpu_util == pytest.approx(0.4)


def test_summarize_invariant_under_refinement():
    coarse = [UtilizationSample(0, 0.3, 0.1), UtilizationSample(4000, 0.7, 0.9)]
    fine = [
        UtilizationSample(0, 0.3, 0.1),
        UtilizationSample(1000, 0.3, 0.1),
        UtilizationSample(2500, 0.3, 0.1),
        UtilizationSample(4000, 0.7, 0.9),
        UtilizationSample(6000, 0.7, 0.9),
    ]
    jobs = [job_metrics(finish_s=8.0)]
    a = summarize(coarse, jobs)
    b = summarize(fine, jobs)
    assert a.avg_cpu_util == pytest.approx(b.avg_cpu_util)
    assert a.avg_mem_util == pytest.approx(b.avg_mem_util)


def test_summarize_truncates_samples_after_makespan():
    samples = [UtilizationSample(0, 0.5, 0.5), UtilizationSample(9000, 0.0, 0.0)]
    report = summarize(samples, [job_metrics(finish_s=4.0)])
    assert report.avg_cpu_util == pytest.approx(0.5)
    assert len(report.samples) == 1


def test_summarize_empty_raises():
    with pytest.raises(EmptyRun):
        summarize([], [job_metrics()])


def test_summarize_orders_jobs_by_id():
    samples = [UtilizationSample(0, 0.0, 0.0)]
    report = summarize(samples, [job_metrics(job_id=2), job_metrics(job_id=1)])
    assert [j.job_id for j in report.per_job] == [1, 2]


def test_job_decomposition_sums():
    j = job_metrics()
    assert j.total_s == pytest.approx(j.overhead_s + j.compute_s + j.comm_s)
