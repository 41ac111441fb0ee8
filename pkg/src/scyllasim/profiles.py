"""Calibration profiles: the fitted model constants, stored as flat
key-value text files (one `key = value` per line, '#' comments).

Profiles are looked up by name in SCYLLA_SIM_PROFILE_DIR (when set) and then
in the bundled data directory.
"""
from __future__ import annotations

import os
from dataclasses import dataclass
from importlib import resources as importlib_resources
from pathlib import Path

from .workload import NetworkModel, OverheadModel

PROFILE_SUFFIX = ".profile"
PROFILE_KEYS = (
    "alpha",
    "base_s",
    "per_container_s",
    "intra_latency_us",
    "inter_latency_us",
    "intra_bw_mibs",
    "inter_bw_mibs",
)

_ENV_DIR = "SCYLLA_SIM_PROFILE_DIR"


class ProfileNotFound(Exception):
    pass


class ProfileFormatError(Exception):
    pass


@dataclass(frozen=True)
class CalibrationProfile:
    name: str
    alpha: float
    overhead: OverheadModel
    network: NetworkModel

    def as_dict(self) -> dict[str, float]:
        return {
            "alpha": self.alpha,
            "base_s": self.overhead.base_s,
            "per_container_s": self.overhead.per_container_s,
            "intra_latency_us": self.network.intra_latency_us,
            "inter_latency_us": self.network.inter_latency_us,
            "intra_bw_mibs": self.network.intra_bw_mibs,
            "inter_bw_mibs": self.network.inter_bw_mibs,
        }

    @classmethod
    def from_dict(cls, name: str, values: dict[str, float]) -> "CalibrationProfile":
        missing = [k for k in PROFILE_KEYS if k not in values]
        if missing:
            raise ProfileFormatError(f"profile {name!r} missing keys: {', '.join(missing)}")
        return cls(
            name=name,
            alpha=values["alpha"],
            overhead=OverheadModel(values["base_s"], values["per_container_s"]),
            network=NetworkModel(
                values["intra_latency_us"],
                values["inter_latency_us"],
                values["intra_bw_mibs"],
                values["inter_bw_mibs"],
            ),
        )


def parse_profile_text(text: str, name: str) -> CalibrationProfile:
    values: dict[str, float] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ProfileFormatError(f"{name}:{lineno}: expected 'key = value'")
        key, _, value = line.partition("=")
        key = key.strip()
        if key not in PROFILE_KEYS:
            raise ProfileFormatError(f"{name}:{lineno}: unknown key {key!r}")
        try:
            values[key] = float(value.strip())
        except ValueError:
            raise ProfileFormatError(f"{name}:{lineno}: bad value for {key!r}") from None
    return CalibrationProfile.from_dict(name, values)


def dump_profile(profile: CalibrationProfile) -> str:
    lines = [f"{key} = {value:g}" for key, value in profile.as_dict().items()]
    return "\n".join(lines) + "\n"


def save_profile(profile: CalibrationProfile, path: Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dump_profile(profile), encoding="utf-8")


def bundled_profile_dir() -> Path:
    return Path(importlib_resources.files("scyllasim") / "data" / "profiles")


def profile_search_dirs() -> list[Path]:
    dirs = []
    env = os.environ.get(_ENV_DIR)
    if env:
        dirs.append(Path(env))
    dirs.append(bundled_profile_dir())
    return dirs


def load_profile(name_or_path: str) -> CalibrationProfile:
    """Load by bare profile name (searched) or by explicit file path."""
    candidate = Path(name_or_path)
    if candidate.suffix == PROFILE_SUFFIX or "/" in str(name_or_path):
        if not candidate.exists():
            raise ProfileNotFound(f"no such profile file: {name_or_path}")
        return parse_profile_text(candidate.read_text(encoding="utf-8"), candidate.stem)
    for directory in profile_search_dirs():
        path = directory / f"{name_or_path}{PROFILE_SUFFIX}"
        if path.exists():
            return parse_profile_text(path.read_text(encoding="utf-8"), name_or_path)
    raise ProfileNotFound(
        f"profile {name_or_path!r} not found in: "
        + ", ".join(str(d) for d in profile_search_dirs())
    )
