"""Per-region pipeline: training window, grid search, static forecast, drift.

The training window covers all days up to seven days after the region's
first NPI.  Smoothing parameters are grid-searched against the three days
that follow, the model is refit on the training window only, and a single
static multi-horizon forecast from the window's end feeds the detector.
The monitored stream starts the day after the window ends, so the three
validation days are also the first three monitored days.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .data import DailySeries, InterventionEvent
from .drift import DriftResult, PhtConfig, detect_drift
from .forecast import ForecastSeries, SmoothingParams, fit, grid_search


class NoInterventions(ValueError):
    pass


class InsufficientData(ValueError):
    pass


@dataclass(frozen=True)
class PipelineConfig:
    pht: PhtConfig = field(default_factory=PhtConfig)
    training_offset_days: int = 7   # window ends this many days after the first NPI
    validation_days: int = 3
    death_threshold_per_capita: float = 1e-6
    us_state_min_cases: int = 10000


@dataclass
class TrainingWindow:
    series: DailySeries  # the training slice
    end_day: int         # inclusive; equals first NPI day + offset

    @property
    def start_day(self) -> int:
        return self.series.start_day


def training_window(
    series: DailySeries,
    events: list[InterventionEvent],
    offset_days: int = 7,
) -> TrainingWindow:
    """All days up to ``offset_days`` after the earliest NPI, inclusive."""
    if not events:
        raise NoInterventions(f"{series.region.name}: no intervention events")
    end_day = min(e.day for e in events) + offset_days
    if end_day > series.end_day:
        raise InsufficientData(
            f"{series.region.name}: training window ends {end_day - series.end_day} "
            "days beyond the available data"
        )
    if end_day < series.start_day:
        raise InsufficientData(f"{series.region.name}: training window ends before the data starts")
    return TrainingWindow(series.slice(series.start_day, end_day), end_day)


@dataclass
class RegionRun:
    region_name: str
    window: TrainingWindow
    params: SmoothingParams
    one_step_forecasts: ForecastSeries   # in-sample, over the training window
    monitor_forecast: ForecastSeries     # static forecast over the monitored days
    drift: DriftResult


def run_region(
    daily: DailySeries,
    events: list[InterventionEvent],
    cfg: PipelineConfig = PipelineConfig(),
) -> RegionRun:
    """Run the full detection pipeline for one region's daily series."""
    window = training_window(daily, events, cfg.training_offset_days)
    horizon = daily.end_day - window.end_day
    if horizon < cfg.validation_days:
        raise InsufficientData(
            f"{daily.region.name}: only {horizon} days after the training window, "
            f"need at least {cfg.validation_days} for validation"
        )
    validation = daily.slice(window.end_day + 1, window.end_day + cfg.validation_days)
    params = grid_search(window.series.values, validation.values)
    one_step, state = fit(window.series.values, params, start_day=window.start_day)

    monitor_start = window.end_day + 1
    from .forecast import hw_forecast

    forecast = hw_forecast(state, horizon, start_day=monitor_start)
    actuals = daily.slice(monitor_start, daily.end_day)
    drift = detect_drift(actuals, forecast, cfg.pht)
    return RegionRun(
        region_name=daily.region.name,
        window=window,
        params=params,
        one_step_forecasts=one_step,
        monitor_forecast=forecast,
        drift=drift,
    )
