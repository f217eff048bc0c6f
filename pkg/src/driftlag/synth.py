"""Synthetic daily-count streams with a known growth-rate break.

The mean curve grows geometrically, switches growth rate at the break day
with no level jump, and carries an additive weekly reporting pattern scaled
relative to the local level (weekend underreporting).  Ground truth for
detector-delay and end-to-end pipeline tests.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import DailySeries, InterventionEvent, NpiKind, RegionId, RegionKind
from .pipeline import PipelineConfig, run_region

#: Relative weekly reporting pattern (Mon..Sun shape; weekend dips).
WEEKLY_PATTERN = np.array([0.0, 0.1, 0.15, 0.15, 0.1, -0.25, -0.25])

_SYNTH_REGION = RegionId("synthetic", RegionKind.COUNTRY)


@dataclass(frozen=True)
class SyntheticSpec:
    n_days: int
    base_level: float
    growth_pre: float    # daily multiplicative factor before the break
    growth_post: float
    break_day: int
    season_amplitude: float = 0.0
    noise: str = "none"  # "none" | "poisson"
    seed: int = 0

    def __post_init__(self) -> None:
        if self.n_days < 1 or self.base_level <= 0:
            raise ValueError("need n_days >= 1 and positive base_level")
        if not 0 <= self.break_day < self.n_days:
            raise ValueError("break_day must lie inside the series")
        for g in (self.growth_pre, self.growth_post):
            if not 0.8 < g < 1.5:
                raise ValueError(f"growth factor {g} outside the sane range (0.8, 1.5)")
        if self.season_amplitude < 0:
            raise ValueError("season_amplitude must be non-negative")
        if self.noise not in ("none", "poisson"):
            raise ValueError(f"unknown noise kind {self.noise!r}")


def mean_curve(spec: SyntheticSpec) -> np.ndarray:
    """Expected value per day: geometric trend (continuous at the break)
    times the relative weekly pattern."""
    t = np.arange(spec.n_days)
    pre_days = np.minimum(t, spec.break_day)
    post_days = np.maximum(t - spec.break_day, 0)
    trend = spec.base_level * spec.growth_pre**pre_days * spec.growth_post**post_days
    mu = trend * (1.0 + spec.season_amplitude * WEEKLY_PATTERN[t % 7])
    return np.maximum(mu, 0.0)


def generate(spec: SyntheticSpec) -> DailySeries:
    """Emit the stream: the mean curve itself, or seeded Poisson draws."""
    mu = mean_curve(spec)
    if spec.noise == "poisson":
        rng = np.random.default_rng(spec.seed)
        values = rng.poisson(mu).astype(np.float64)
    else:
        values = mu
    return DailySeries(_SYNTH_REGION, 0, values)


def measure_detection_delay(
    spec: SyntheticSpec,
    cfg: PipelineConfig = PipelineConfig(),
    npi_day: int | None = None,
) -> int | None:
    """Detected drift day minus break day after running the full pipeline.

    A synthetic first NPI is placed before the break (default ten days) so
    the training window ends and monitoring starts ahead of it.  Returns
    None when no drift is detected.
    """
    if npi_day is None:
        npi_day = spec.break_day - 10
    monitor_start = npi_day + cfg.training_offset_days + 1
    if not monitor_start <= spec.break_day:
        raise ValueError(
            f"break day {spec.break_day} not inside the monitoring window "
            f"(starts day {monitor_start})"
        )
    series = generate(spec)
    events = [InterventionEvent(_SYNTH_REGION, NpiKind.LOCKDOWN, npi_day)]
    run = run_region(series, events, cfg)
    if run.drift.drift_day is None:
        return None
    return run.drift.drift_day - spec.break_day
