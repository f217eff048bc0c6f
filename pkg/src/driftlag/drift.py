"""Forecast-error stream and sequential change detection.

The monitored variable is the daily SMAPE between actuals and the static
forecast.  The Page-Hinkley statistic tracks the cumulative excess of the
stream over its (fading) running mean; an alarm fires when the statistic
rises more than ``threshold`` above its running minimum.  The test is
one-sided: drift here means the forecast error grows.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from sklearn.base import BaseEstimator

from .data import DailySeries
from .forecast import ForecastSeries


class MisalignedInputs(ValueError):
    pass


def smape(actual: float, forecast: float) -> float:
    """Symmetric absolute percentage error, 2|f-a|/(a+f), in [0, 2].

    Both-zero is defined as 0.
    """
    if not (math.isfinite(actual) and math.isfinite(forecast)):
        raise ValueError(f"non-finite inputs ({actual!r}, {forecast!r})")
    if actual < 0 or forecast < 0:
        raise ValueError("smape is defined for non-negative inputs")
    denom = actual + forecast
    if denom == 0.0:
        return 0.0
    return 2.0 * abs(forecast - actual) / denom


def smape_series(actuals: np.ndarray, forecasts: np.ndarray) -> np.ndarray:
    actuals = np.asarray(actuals, dtype=np.float64)
    forecasts = np.asarray(forecasts, dtype=np.float64)
    if actuals.shape != forecasts.shape:
        raise MisalignedInputs(f"shape mismatch {actuals.shape} vs {forecasts.shape}")
    if not (np.isfinite(actuals).all() and np.isfinite(forecasts).all()):
        raise ValueError("non-finite inputs")
    denom = actuals + forecasts
    safe = np.where(denom > 0, denom, 1.0)
    return np.where(denom > 0, 2.0 * np.abs(forecasts - actuals) / safe, 0.0)


@dataclass(frozen=True)
class PhtConfig:
    threshold: float = 0.3
    min_instances: int = 3
    delta: float = 0.005
    forgetting: float = 0.9999  # weight on past observations in the running mean

    def __post_init__(self) -> None:
        if self.threshold <= 0:
            raise ValueError("threshold must be positive")
        if self.min_instances < 1:
            raise ValueError("min_instances must be at least 1")
        if self.delta < 0:
            raise ValueError("delta must be non-negative")
        if not 0.0 < self.forgetting <= 1.0:
            raise ValueError("forgetting must lie in (0, 1]")


@dataclass(frozen=True)
class PhtState:
    n: int = 0
    mean: float = 0.0
    weight: float = 0.0  # total weight behind the fading mean
    cum: float = 0.0     # cumulative deviation statistic m_T
    cum_min: float = 0.0


def pht_step(state: PhtState, x: float, cfg: PhtConfig) -> tuple[PhtState, bool]:
    """Advance the Page-Hinkley statistic by one observation.

    The running mean fades past observations by ``cfg.forgetting`` per step
    (1.0 gives the plain mean); the deviation ``x - mean - delta`` is
    accumulated and compared against the running minimum.
    """
    if not math.isfinite(x):
        raise ValueError(f"non-finite observation {x!r}")
    weight = cfg.forgetting * state.weight + 1.0
    mean = (cfg.forgetting * state.weight * state.mean + x) / weight
    cum = state.cum + (x - mean - cfg.delta)
    cum_min = min(state.cum_min, cum)
    n = state.n + 1
    alarm = n >= cfg.min_instances and (cum - cum_min) > cfg.threshold
    return PhtState(n, mean, weight, cum, cum_min), alarm


class PageHinkleyDetector(BaseEstimator):
    """Streaming wrapper around :func:`pht_step` with trace recording."""

    def __init__(self, threshold: float = 0.3, min_instances: int = 3,
                 delta: float = 0.005, forgetting: float = 0.9999):
        self.threshold = threshold
        self.min_instances = min_instances
        self.delta = delta
        self.forgetting = forgetting
        self.reset()

    def reset(self) -> None:
        self.state_ = PhtState()
        self.trace_ = []

    def update(self, x: float) -> bool:
        cfg = PhtConfig(self.threshold, self.min_instances, self.delta, self.forgetting)
        self.state_, alarm = pht_step(self.state_, x, cfg)
        self.trace_.append(self.state_.cum - self.state_.cum_min)
        return alarm


@dataclass
class DriftResult:
    drift_day: int | None
    alarm_index: int | None  # 1-based position in the monitored stream
    ph_trace: np.ndarray
    smape_trace: np.ndarray
    monitor_start_day: int

    def __post_init__(self) -> None:
        if len(self.ph_trace) != len(self.smape_trace):
            raise ValueError("traces must have equal length")


def detect_drift(
    actuals: DailySeries,
    forecasts: ForecastSeries,
    cfg: PhtConfig = PhtConfig(),
) -> DriftResult:
    """Feed daily SMAPE values through the Page-Hinkley test in date order.

    The first alarm ends detection; traces cover every monitored day up to
    and including the alarm day (or the whole stream when none fires).
    """
    if actuals.start_day != forecasts.start_day or len(actuals.values) != len(forecasts.values):
        raise MisalignedInputs(
            f"actuals cover {actuals.start_day}+{len(actuals.values)}, "
            f"forecasts {forecasts.start_day}+{len(forecasts.values)}"
        )
    if len(actuals.values) < 1:
        raise MisalignedInputs("empty monitoring stream")
    errors = smape_series(actuals.values, forecasts.values)
    state = PhtState()
    ph_trace = np.empty(len(errors))
    drift_day = None
    alarm_index = None
    consumed = len(errors)
    for i, x in enumerate(errors):
        state, alarm = pht_step(state, float(x), cfg)
        ph_trace[i] = state.cum - state.cum_min
        if alarm:
            drift_day = actuals.start_day + i
            alarm_index = i + 1
            consumed = i + 1
            break
    return DriftResult(
        drift_day=drift_day,
        alarm_index=alarm_index,
        ph_trace=ph_trace[:consumed],
        smape_trace=errors[:consumed],
        monitor_start_day=actuals.start_day,
    )


# --- ADWIN cross-check -----------------------------------------------------
#
# Kept deliberately simple: the window is stored in full and every split
# point is tested with the Hoeffding-style cut bound.  Fine for daily-series
# lengths; never feeds the lag analysis.

@dataclass
class AdwinState:
    window: list[float] = field(default_factory=list)


def adwin_step(
    state: AdwinState,
    x: float,
    confidence_delta: float = 0.002,
) -> tuple[AdwinState, bool]:
    """Add an observation; alarm and drop the stale sub-window on a cut.

    A cut happens when two adjacent sub-windows have mean difference above
    ``sqrt(1/(2m) * ln(4n/delta))`` with ``m`` the harmonic mean of the two
    sub-window sizes.
    """
    if not math.isfinite(x):
        raise ValueError(f"non-finite observation {x!r}")
    if not 0.0 < confidence_delta < 1.0:
        raise ValueError("confidence_delta must lie in (0, 1)")
    window = state.window + [x]
    alarm = False
    while len(window) >= 2:
        values = np.asarray(window)
        n = len(values)
        totals = np.cumsum(values)
        n0 = np.arange(1, n)
        n1 = n - n0
        mean0 = totals[:-1] / n0
        mean1 = (totals[-1] - totals[:-1]) / n1
        m = 1.0 / (1.0 / n0 + 1.0 / n1)
        eps_cut = np.sqrt(np.log(4.0 * n / confidence_delta) / (2.0 * m))
        cuts = np.nonzero(np.abs(mean0 - mean1) > eps_cut)[0]
        if len(cuts) == 0:
            break
        alarm = True
        window = window[int(cuts[-1]) + 1 :]  # drop everything before the latest cut
    return AdwinState(window), alarm
