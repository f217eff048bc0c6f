"""Exponential smoothing with multiplicative trend and additive 7-day seasonality.

The level/trend/season recursions are

    level'    = alpha * (y - s_old) + (1 - alpha) * level * trend
    trend'    = beta  * (level' / level) + (1 - beta) * trend
    season'   = gamma * (y - level * trend) + (1 - gamma) * s_old

with level and trend clamped at a small positive floor so the multiplicative
trend never degenerates.  Daily inputs are floored at 1 before fitting
(zero-count days otherwise break the trend update); raw values are kept for
reporting and monitoring.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator

SEASON_LENGTH = 7
STATE_FLOOR = 1e-6
FORECAST_FLOOR = 1e-6
INPUT_FLOOR = 1.0

#: Grid-search candidate values for each smoothing parameter.
PARAM_GRID = tuple(round(0.1 * k, 1) for k in range(1, 10))


class TooShort(ValueError):
    """Training series shorter than two seasons."""


@dataclass(frozen=True)
class SmoothingParams:
    alpha: float  # level
    beta: float   # trend
    gamma: float  # season

    def __post_init__(self) -> None:
        for name in ("alpha", "beta", "gamma"):
            v = getattr(self, name)
            if not 0.0 < v < 1.0:
                raise ValueError(f"{name} must lie strictly in (0,1), got {v}")


@dataclass
class HoltWintersState:
    level: float
    trend: float  # multiplicative growth factor per day
    seasonal: np.ndarray  # 7 additive offsets
    season_index: int = 0

    def __post_init__(self) -> None:
        self.seasonal = np.asarray(self.seasonal, dtype=np.float64)
        if self.seasonal.shape != (SEASON_LENGTH,):
            raise ValueError("seasonal component must have length 7")
        if self.level <= 0 or self.trend <= 0:
            raise ValueError("level and trend must be positive")
        self.season_index = int(self.season_index) % SEASON_LENGTH

    def copy(self) -> "HoltWintersState":
        return HoltWintersState(self.level, self.trend, self.seasonal.copy(), self.season_index)


@dataclass
class ForecastSeries:
    start_day: int
    values: np.ndarray

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=np.float64)
        if (self.values <= 0).any():
            raise ValueError("forecast values must be positive")

    @property
    def end_day(self) -> int:
        return self.start_day + len(self.values) - 1


def init_state(train: np.ndarray) -> HoltWintersState:
    """Two-week initialization heuristic.

    Level is the first-week mean (floored at 1), trend the seventh root of
    the week-2/week-1 mean ratio, and the seasonal offsets are the first
    week's deviations from the level.
    """
    train = np.asarray(train, dtype=np.float64)
    if len(train) < 2 * SEASON_LENGTH:
        raise TooShort(f"need at least {2 * SEASON_LENGTH} days, got {len(train)}")
    week1 = float(np.mean(train[:SEASON_LENGTH]))
    week2 = float(np.mean(train[SEASON_LENGTH : 2 * SEASON_LENGTH]))
    level = max(week1, INPUT_FLOOR)
    trend = max((week2 / week1) ** (1.0 / SEASON_LENGTH) if week1 > 0 else STATE_FLOOR,
                STATE_FLOOR)
    seasonal = train[:SEASON_LENGTH] - level
    return HoltWintersState(level, trend, seasonal, 0)


def hw_update(state: HoltWintersState, y: float, p: SmoothingParams) -> HoltWintersState:
    """One smoothing step; returns a new state, input state untouched."""
    if not np.isfinite(y):
        raise ValueError(f"non-finite observation {y!r}")
    s_old = float(state.seasonal[state.season_index])
    level_trend = state.level * state.trend
    level = p.alpha * (y - s_old) + (1.0 - p.alpha) * level_trend
    level = max(level, STATE_FLOOR)
    trend = p.beta * (level / state.level) + (1.0 - p.beta) * state.trend
    trend = max(trend, STATE_FLOOR)
    seasonal = state.seasonal.copy()
    seasonal[state.season_index] = p.gamma * (y - level_trend) + (1.0 - p.gamma) * s_old
    return HoltWintersState(level, trend, seasonal, (state.season_index + 1) % SEASON_LENGTH)


def hw_forecast(state: HoltWintersState, horizon: int, start_day: int = 0) -> ForecastSeries:
    """Static multi-horizon forecast from a state: level * trend**h + season."""
    if horizon < 1:
        raise ValueError("horizon must be at least 1")
    h = np.arange(1, horizon + 1)
    seasonal = state.seasonal[(state.season_index + h - 1) % SEASON_LENGTH]
    values = np.maximum(state.level * state.trend ** h + seasonal, FORECAST_FLOOR)
    return ForecastSeries(start_day, values)


def one_step_forecast(state: HoltWintersState) -> float:
    return max(state.level * state.trend + float(state.seasonal[state.season_index]),
               FORECAST_FLOOR)


def fit(
    train: np.ndarray,
    p: SmoothingParams,
    start_day: int = 0,
    init: HoltWintersState | None = None,
) -> tuple[ForecastSeries, HoltWintersState]:
    """Run the recursions over a training slice from the initial state.

    Inputs are floored at 1 (fitting only).  Returns the in-sample
    one-step-ahead forecasts and the final state.  ``init`` overrides the
    two-week heuristic, e.g. when the exact state is known.
    """
    values = np.maximum(np.asarray(train, dtype=np.float64), INPUT_FLOOR)
    state = init_state(values) if init is None else init.copy()
    one_step = np.empty(len(values))
    for t, y in enumerate(values):
        one_step[t] = one_step_forecast(state)
        state = hw_update(state, float(y), p)
    return ForecastSeries(start_day, one_step), state


def _batch_fit_forecast(
    train: np.ndarray,
    alphas: np.ndarray,
    betas: np.ndarray,
    gammas: np.ndarray,
    horizon: int,
    init: HoltWintersState | None = None,
) -> np.ndarray:
    """Run the recursions for many parameter triples at once.

    Returns the ``(n_candidates, horizon)`` forecasts from the end of the
    training slice.  Mirrors :func:`hw_update` exactly; a consistency test
    pins the two paths together.
    """
    values = np.maximum(np.asarray(train, dtype=np.float64), INPUT_FLOOR)
    state0 = init_state(values) if init is None else init
    n = len(alphas)
    level = np.full(n, state0.level)
    trend = np.full(n, state0.trend)
    seasonal = np.tile(state0.seasonal, (n, 1))
    idx = state0.season_index
    for y in values:
        s_old = seasonal[:, idx]
        level_trend = level * trend
        new_level = np.maximum(alphas * (y - s_old) + (1.0 - alphas) * level_trend,
                               STATE_FLOOR)
        trend = np.maximum(betas * (new_level / level) + (1.0 - betas) * trend,
                           STATE_FLOOR)
        seasonal[:, idx] = gammas * (y - level_trend) + (1.0 - gammas) * s_old
        level = new_level
        idx = (idx + 1) % SEASON_LENGTH
    out = np.empty((n, horizon))
    for h in range(1, horizon + 1):
        season = seasonal[:, (idx + h - 1) % SEASON_LENGTH]
        out[:, h - 1] = np.maximum(level * trend ** h + season, FORECAST_FLOOR)
    return out


def grid_search(
    train: np.ndarray,
    validation: np.ndarray,
    init: HoltWintersState | None = None,
) -> SmoothingParams:
    """Pick smoothing parameters over the 9^3 grid by 3-day validation SMAPE.

    All 729 combinations are fitted on the training slice and scored by the
    mean SMAPE of their 3-step-ahead forecasts against the validation days;
    ties break to the lexicographically smallest (alpha, beta, gamma).
    """
    validation = np.asarray(validation, dtype=np.float64)
    if len(validation) != 3:
        raise ValueError(f"validation slice must have length 3, got {len(validation)}")
    combos = list(itertools.product(PARAM_GRID, repeat=3))
    alphas = np.array([c[0] for c in combos])
    betas = np.array([c[1] for c in combos])
    gammas = np.array([c[2] for c in combos])
    forecasts = _batch_fit_forecast(train, alphas, betas, gammas, horizon=3, init=init)
    diffs = np.abs(forecasts - validation[None, :])
    denom = forecasts + validation[None, :]
    smapes = np.where(denom > 0, 2.0 * diffs / np.where(denom > 0, denom, 1.0), 0.0)
    scores = smapes.mean(axis=1)
    best = int(np.argmin(scores))  # first minimum = lexicographically smallest combo
    return SmoothingParams(*combos[best])


class HoltWintersForecaster(BaseEstimator):
    """Estimator wrapper around the smoothing recursions.

    ``fit(y)`` consumes a 1-D array of daily counts; ``predict(horizon)``
    returns the static multi-horizon forecast from the end of the fitted
    window.  With ``alpha=None`` the parameters are grid-searched: the last
    three days are held out for validation and the model is then refit on
    the window before them, so those three days are the first three
    predicted.
    """

    def __init__(self, alpha: float | None = None, beta: float | None = None,
                 gamma: float | None = None):
        self.alpha = alpha
        self.beta = beta
        self.gamma = gamma

    def fit(self, X, y=None):
        values = np.asarray(X, dtype=np.float64).ravel()
        if self.alpha is None or self.beta is None or self.gamma is None:
            if len(values) < 2 * SEASON_LENGTH + 3:
                raise TooShort("grid search needs 14 training days plus 3 validation days")
            self.params_ = grid_search(values[:-3], values[-3:])
            values = values[:-3]
        else:
            self.params_ = SmoothingParams(self.alpha, self.beta, self.gamma)
        one_step, state = fit(values, self.params_)
        self.one_step_forecasts_ = one_step.values
        self.state_ = state
        self.n_observations_ = len(values)
        return self

    def predict(self, horizon: int) -> np.ndarray:
        if not hasattr(self, "state_"):
            raise RuntimeError("fit before predict")
        return hw_forecast(self.state_, int(horizon)).values
