"""Access to the bundled data snapshot (cases/deaths through 2020-05-12).

The snapshot ships with the package: JHU-layout case and death tables for 9
European countries and 31 US states, the NPI table, and region metadata.
``bundled_config()`` carries the matching analysis defaults (the nine
countries, detector parameters, state cutoff).
"""

from __future__ import annotations

from importlib import resources
from pathlib import Path

from .cli import RunConfig, load_config_file

BUNDLE_FILES = (
    "cases_global.csv",
    "deaths_global.csv",
    "cases_us.csv",
    "deaths_us.csv",
    "interventions.csv",
    "region_meta.csv",
    "config.toml",
)


def bundle_dir() -> Path:
    return Path(resources.files("driftlag") / "bundled")


def bundle_path(name: str) -> Path:
    if name not in BUNDLE_FILES:
        raise KeyError(f"not a bundled file: {name!r}")
    path = bundle_dir() / name
    if not path.exists():
        raise FileNotFoundError(f"bundled snapshot file missing: {path}")
    return path


def bundled_config(out: str = "out") -> RunConfig:
    """The bundled analysis configuration with absolute input paths."""
    from dataclasses import replace

    config = load_config_file(bundle_path("config.toml"))
    return replace(
        config,
        cases=(str(bundle_path("cases_global.csv")), str(bundle_path("cases_us.csv"))),
        deaths=(str(bundle_path("deaths_global.csv")), str(bundle_path("deaths_us.csv"))),
        npis=str(bundle_path("interventions.csv")),
        meta=str(bundle_path("region_meta.csv")),
        out=out,
    )
