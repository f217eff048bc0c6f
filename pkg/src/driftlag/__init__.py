"""driftlag: concept-drift detection and intervention-lag analysis for
daily epidemic case counts.

Pipeline: exponential-smoothing forecasts (multiplicative trend, additive
7-day season) are compared against actuals via SMAPE; a Page-Hinkley test
on the error stream dates the drift; lags against NPI enactment dates are
summarized and modeled with an L1-penalized regression under nested CV.
"""

from .data import (
    CumulativeSeries,
    DailySeries,
    InterventionEvent,
    Measure,
    NpiKind,
    RegionId,
    RegionKind,
    RegionMeta,
    death_threshold_day,
    load_interventions,
    load_region_meta,
    parse_jhu_global,
    parse_jhu_us,
    to_daily,
)
from .drift import (
    DriftResult,
    PageHinkleyDetector,
    PhtConfig,
    detect_drift,
    smape,
)
from .forecast import (
    ForecastSeries,
    HoltWintersForecaster,
    HoltWintersState,
    SmoothingParams,
    grid_search,
    hw_forecast,
    hw_update,
    init_state,
)
from .lag import (
    LagRecord,
    LagSummary,
    ReactionTime,
    compute_lags,
    reaction_time,
    regression_dataset,
    summarize_lags,
)
from .lasso import (
    ColumnStandardizer,
    FeatureMatrix,
    LassoCoordinateDescent,
    LassoModel,
    NestedCvReport,
    lambda_max,
    lambda_search,
    lasso_fit,
    metrics,
    nested_cv,
    standardize,
)
from .pipeline import PipelineConfig, run_region, training_window
from .synth import SyntheticSpec, generate, measure_detection_delay

__version__ = "0.1.0"
