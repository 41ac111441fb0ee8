"""Scenario file loading and validation.

Scenarios are JSON documents with a closed schema: unknown keys are
rejected.  Numeric literals are parsed exactly (cpu counts become rationals
from their decimal text) so resource arithmetic stays drift-free.
"""
from __future__ import annotations

import json
from fractions import Fraction
from importlib import resources as importlib_resources
from pathlib import Path
from typing import Any

from .engine import ClusterSpec, Scenario, ScenarioJob, SchedulingMode
from .placement import PlacementPolicy
from .resources import ResourceVector
from .workload import JobSpec, WorkloadProfile


class ParseError(Exception):
    """The file is not well-formed JSON."""


class SchemaError(Exception):
    """The document shape is wrong: unknown/missing key or wrong type."""


class ValidationError(Exception):
    """The document is schema-valid but violates a scenario invariant."""


_TOP_KEYS = {
    "cluster": True,
    "jobs": True,
    "policy": True,
    "mode": True,
    "calibration": True,
    "epoch_ms": False,
    "sample_ms": False,
    "seed": False,
}
_CLUSTER_KEYS = {"nodes": True, "cpus_per_node": True, "mem_mib_per_node": True}
_JOB_KEYS = {
    "name": True,
    "n": True,
    "cpus": True,
    "mem_mib": True,
    "compute_per_iter_s": True,
    "iterations": True,
    "mem_intensity": True,
    "comm_volume_mib": True,
    "arrival_s": False,
}

_NUMBER = (int, float, Fraction)


def _check_keys(obj: dict, allowed: dict[str, bool], where: str) -> None:
    if not isinstance(obj, dict):
        raise SchemaError(f"{where}: expected an object")
    for key in obj:
        if key not in allowed:
            raise SchemaError(f"{where}: unknown key {key!r}")
    for key, required in allowed.items():
        if required and key not in obj:
            raise SchemaError(f"{where}: missing key {key!r}")


def _number(obj: dict, key: str, where: str) -> Fraction:
    value = obj[key]
    if isinstance(value, bool) or not isinstance(value, _NUMBER):
        raise SchemaError(f"{where}.{key}: expected a number")
    if isinstance(value, float):
        # Floats only appear in documents built in code; files are parsed
        # with parse_float=Fraction.  str() preserves the decimal intent.
        return Fraction(str(value))
    return Fraction(value)


def _integer(obj: dict, key: str, where: str, default: int | None = None) -> int:
    if key not in obj:
        if default is None:
            raise SchemaError(f"{where}: missing key {key!r}")
        return default
    value = obj[key]
    if isinstance(value, bool) or not isinstance(value, int):
        raise SchemaError(f"{where}.{key}: expected an integer")
    return value


def _string(obj: dict, key: str, where: str) -> str:
    value = obj[key]
    if not isinstance(value, str):
        raise SchemaError(f"{where}.{key}: expected a string")
    return value


def scenario_from_dict(doc: Any) -> Scenario:
    """Build a validated Scenario from a parsed JSON document."""
    _check_keys(doc, _TOP_KEYS, "scenario")

    cluster_doc = doc["cluster"]
    _check_keys(cluster_doc, _CLUSTER_KEYS, "cluster")
    nodes = _integer(cluster_doc, "nodes", "cluster")
    cpus_per_node = _number(cluster_doc, "cpus_per_node", "cluster")
    mem_per_node = _integer(cluster_doc, "mem_mib_per_node", "cluster")
    if nodes < 1:
        raise ValidationError("cluster.nodes must be >= 1")
    if cpus_per_node <= 0:
        raise ValidationError("cluster.cpus_per_node must be > 0")
    if mem_per_node <= 0:
        raise ValidationError("cluster.mem_mib_per_node must be > 0")

    jobs_doc = doc["jobs"]
    if not isinstance(jobs_doc, list):
        raise SchemaError("jobs: expected a list")
    if not jobs_doc:
        raise ValidationError("jobs must contain at least one job")

    jobs: list[ScenarioJob] = []
    for index, job_doc in enumerate(jobs_doc):
        where = f"jobs[{index}]"
        _check_keys(job_doc, _JOB_KEYS, where)
        name = _string(job_doc, "name", where)
        n = _integer(job_doc, "n", where)
        cpus = _number(job_doc, "cpus", where)
        mem = _integer(job_doc, "mem_mib", where)
        compute = _number(job_doc, "compute_per_iter_s", where)
        iterations = _integer(job_doc, "iterations", where)
        mem_intensity = _number(job_doc, "mem_intensity", where)
        comm_volume = _number(job_doc, "comm_volume_mib", where)
        arrival = _number(job_doc, "arrival_s", where) if "arrival_s" in job_doc else Fraction(0)

        if n < 1:
            raise ValidationError(f"{where}.n must be >= 1")
        if cpus < 0 or mem < 0:
            raise ValidationError(f"{where}: cpus and mem_mib must be non-negative")
        if cpus == 0 and mem == 0:
            raise ValidationError(f"{where}: demand must be positive in some component")
        if compute < 0:
            raise ValidationError(f"{where}.compute_per_iter_s must be non-negative")
        if iterations < 1:
            raise ValidationError(f"{where}.iterations must be >= 1")
        if not 0 <= mem_intensity <= 1:
            raise ValidationError(f"{where}.mem_intensity must be in [0, 1]")
        if comm_volume < 0:
            raise ValidationError(f"{where}.comm_volume_mib must be non-negative")
        if arrival < 0:
            raise ValidationError(f"{where}.arrival_s must be non-negative")

        spec = JobSpec(
            job_id=index + 1,
            name=name,
            n=n,
            demand=ResourceVector(cpus, mem),
            profile=WorkloadProfile(
                compute_per_iter_s=float(compute),
                iterations=iterations,
                mem_intensity=float(mem_intensity),
                comm_volume_mib=float(comm_volume),
            ),
        )
        jobs.append(ScenarioJob(spec=spec, arrival_ms=round(float(arrival) * 1000)))

    try:
        policy = PlacementPolicy.parse(_string(doc, "policy", "scenario"))
    except ValueError as exc:
        raise ValidationError(str(exc)) from None
    try:
        mode = SchedulingMode.parse(_string(doc, "mode", "scenario"))
    except ValueError as exc:
        raise ValidationError(str(exc)) from None

    epoch_ms = _integer(doc, "epoch_ms", "scenario", default=1000)
    sample_ms = _integer(doc, "sample_ms", "scenario", default=1000)
    seed = _integer(doc, "seed", "scenario", default=0)
    if epoch_ms < 1:
        raise ValidationError("epoch_ms must be >= 1")
    if sample_ms < 1:
        raise ValidationError("sample_ms must be >= 1")

    return Scenario(
        cluster=ClusterSpec(nodes, cpus_per_node, mem_per_node),
        jobs=tuple(jobs),
        policy=policy,
        mode=mode,
        calibration=_string(doc, "calibration", "scenario"),
        epoch_ms=epoch_ms,
        sample_ms=sample_ms,
        seed=seed,
    )


def loads_scenario(text: str) -> Scenario:
    try:
        doc = json.loads(text, parse_float=Fraction)
    except json.JSONDecodeError as exc:
        raise ParseError(f"malformed JSON: {exc}") from None
    return scenario_from_dict(doc)


def load_scenario(path: str | Path) -> Scenario:
    path = Path(path)
    if not path.exists():
        raise ParseError(f"no such scenario file: {path}")
    return loads_scenario(path.read_text(encoding="utf-8"))


def bundled_scenario_path(name: str) -> Path:
    """Path of a scenario shipped with the package (name without extension)."""
    return Path(importlib_resources.files("scyllasim") / "data" / "scenarios" / f"{name}.json")


def load_bundled_scenario(name: str) -> Scenario:
    return load_scenario(bundled_scenario_path(name))
