"""Time lags between interventions, detected drifts, and the death threshold.

Sign conventions (whole days throughout):

* lag          = drift day - NPI day      (positive: NPI preceded the drift)
* reaction     = NPI day - threshold day  (negative: acted before the threshold)
* regression y = drift day - threshold day
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .data import (
    REGRESSION_NPIS,
    InterventionEvent,
    NpiKind,
    RegionId,
    RegionMeta,
)
from .drift import DriftResult
from .lasso import FeatureMatrix


class NoDriftDetected(ValueError):
    pass


class ThresholdNeverReached(ValueError):
    pass


class MissingMetadata(ValueError):
    pass


@dataclass(frozen=True)
class LagRecord:
    region: RegionId
    kind: NpiKind
    npi_day: int
    drift_day: int

    @property
    def lag_days(self) -> int:
        return self.drift_day - self.npi_day


@dataclass(frozen=True)
class LagSummary:
    kind: NpiKind
    mean_days: float
    sd_days: float  # sample (n-1) standard deviation; 0 for n = 1
    n: int


@dataclass(frozen=True)
class ReactionTime:
    region: RegionId
    kind: NpiKind
    days: int  # npi day - threshold day


@dataclass(frozen=True)
class RegressionTarget:
    region: RegionId
    days: int  # drift day - threshold day


def compute_lags(drift: DriftResult, events: Sequence[InterventionEvent]) -> list[LagRecord]:
    """One lag record per event against the region's single drift date."""
    if drift.drift_day is None:
        raise NoDriftDetected("no drift detected for this region")
    return [
        LagRecord(e.region, e.kind, e.day, drift.drift_day)
        for e in events
    ]


def summarize_lags(records: Sequence[LagRecord]) -> list[LagSummary]:
    """Group lags by NPI kind; mean and sample standard deviation per kind."""
    if not records:
        raise ValueError("no lag records to summarize")
    out = []
    for kind in NpiKind:
        lags = [r.lag_days for r in records if r.kind is kind]
        if not lags:
            continue
        mean = float(np.mean(lags))
        sd = float(np.std(lags, ddof=1)) if len(lags) > 1 else 0.0
        out.append(LagSummary(kind, mean, sd, len(lags)))
    return out


def reaction_time(event: InterventionEvent, threshold_day: int | None) -> ReactionTime:
    if threshold_day is None:
        raise ThresholdNeverReached(f"{event.region.name}: death threshold never reached")
    return ReactionTime(event.region, event.kind, event.day - threshold_day)


@dataclass
class RegressionDataset:
    X: FeatureMatrix
    y: np.ndarray
    regions: list[RegionId]

    @property
    def feature_names(self) -> list[str]:
        return self.X.col_names


def regression_dataset(
    regions: Iterable[RegionId],
    drift_days: Mapping[RegionId, int | None],
    events: Sequence[InterventionEvent],
    threshold_days: Mapping[RegionId, int | None],
    meta: Mapping[RegionId, RegionMeta],
) -> RegressionDataset:
    """Assemble the 13-feature design matrix for the drift-timing regression.

    A region contributes a row only when it has all four non-mask NPIs, a
    detected drift, and a threshold date; mask events never enter.  Regions
    failing those preconditions are silently dropped; a candidate that
    qualifies but lacks metadata is an error.
    """
    by_region: dict[RegionId, dict[NpiKind, int]] = {}
    for e in events:
        by_region.setdefault(e.region, {})[e.kind] = e.day

    names = [f"reaction_{kind.value}" for kind in REGRESSION_NPIS] + [
        "population",
        "density_per_km2",
        "urban_share",
        "gdp_per_capita_usd",
        "gini",
        "health_exp_per_capita_usd",
        "hospital_beds_per_100k",
        "avg_temp_march_2020_c",
        "household_size",
    ]

    rows: list[list[float]] = []
    targets: list[float] = []
    kept: list[RegionId] = []
    for region in regions:
        kinds = by_region.get(region, {})
        drift_day = drift_days.get(region)
        threshold = threshold_days.get(region)
        if drift_day is None or threshold is None:
            continue
        if any(kind not in kinds for kind in REGRESSION_NPIS):
            continue
        if region not in meta:
            raise MissingMetadata(f"{region.name}: qualifies for regression but has no metadata")
        reactions = [float(kinds[kind] - threshold) for kind in REGRESSION_NPIS]
        rows.append(reactions + meta[region].feature_values())
        targets.append(float(drift_day - threshold))
        kept.append(region)

    X = FeatureMatrix(np.asarray(rows, dtype=np.float64).reshape(len(rows), len(names)),
                      names)
    return RegressionDataset(X, np.asarray(targets), kept)
