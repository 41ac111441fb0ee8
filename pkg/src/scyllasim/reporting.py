"""CSV and summary rendering.

Output is a bit-exact contract: '.' decimal separator, LF line endings, a
header row, fixed decimal places.  Identical runs must render identical
bytes.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from .metrics import MetricsReport

SAMPLES_HEADER = "time_ms,cpu_util,mem_util"
JOBS_HEADER = "job_id,wait_s,overhead_s,compute_s,comm_s,total_s,hosts_used,avg_pair_latency_us"
COMPARE_HEADER = (
    "axis,value,makespan_s,avg_cpu_util,avg_mem_util,mean_total_s,"
    "mean_overhead_s,mean_avg_pair_latency_us,rel_makespan,rel_cpu_util,"
    "rel_mem_util,rel_total,rel_latency"
)


def render_samples_csv(report: MetricsReport) -> str:
    lines = [SAMPLES_HEADER]
    for s in report.samples:
        lines.append(f"{s.time_ms},{s.cpu_util:.6f},{s.mem_util:.6f}")
    return "\n".join(lines) + "\n"


def render_jobs_csv(report: MetricsReport) -> str:
    lines = [JOBS_HEADER]
    for j in report.per_job:
        lines.append(
            f"{j.job_id},{j.wait_s:.6f},{j.overhead_s:.6f},{j.compute_s:.6f},"
            f"{j.comm_s:.6f},{j.total_s:.6f},{j.hosts_used},{j.avg_pair_latency_us:.3f}"
        )
    return "\n".join(lines) + "\n"


def render_summary(report: MetricsReport) -> str:
    return (
        f"makespan_s={report.makespan_s:.6f}\n"
        f"avg_cpu_util={report.avg_cpu_util:.6f}\n"
        f"avg_mem_util={report.avg_mem_util:.6f}\n"
        f"jobs={len(report.per_job)}\n"
    )


@dataclass(frozen=True)
class CompareRow:
    axis: str
    value: str
    report: MetricsReport

    @property
    def mean_total_s(self) -> float:
        jobs = self.report.per_job
        return sum(j.total_s for j in jobs) / len(jobs)

    @property
    def mean_overhead_s(self) -> float:
        jobs = self.report.per_job
        return sum(j.overhead_s for j in jobs) / len(jobs)

    @property
    def mean_latency_us(self) -> float:
        jobs = self.report.per_job
        return sum(j.avg_pair_latency_us for j in jobs) / len(jobs)


def _rel(value: float, base: float) -> float:
    return (value - base) / base if base else 0.0


def render_compare_csv(rows: list[CompareRow]) -> str:
    lines = [COMPARE_HEADER]
    base = rows[0]
    for row in rows:
        r = row.report
        lines.append(
            f"{row.axis},{row.value},{r.makespan_s:.6f},{r.avg_cpu_util:.6f},"
            f"{r.avg_mem_util:.6f},{row.mean_total_s:.6f},{row.mean_overhead_s:.6f},"
            f"{row.mean_latency_us:.3f},"
            f"{_rel(r.makespan_s, base.report.makespan_s):.6f},"
            f"{_rel(r.avg_cpu_util, base.report.avg_cpu_util):.6f},"
            f"{_rel(r.avg_mem_util, base.report.avg_mem_util):.6f},"
            f"{_rel(row.mean_total_s, base.mean_total_s):.6f},"
            f"{_rel(row.mean_latency_us, base.mean_latency_us):.6f}"
        )
    return "\n".join(lines) + "\n"


def write_run_outputs(report: MetricsReport, out_dir: Path) -> list[Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    outputs = {
        "samples.csv": render_samples_csv(report),
        "jobs.csv": render_jobs_csv(report),
        "summary.txt": render_summary(report),
    }
    written = []
    for name, text in outputs.items():
        path = out_dir / name
        path.write_text(text, encoding="utf-8")
        written.append(path)
    return written
