"""Per-region reports and the CSV/JSON output layer.

Every output file embeds the effective configuration and seed (CSV files as
a leading ``#`` comment line, JSON inside the document), and all writers are
deterministic: identical inputs and seed give byte-identical files.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Mapping

from . import dates
from .data import InterventionEvent, NpiKind, RegionId
from .drift import DriftResult
from .forecast import ForecastSeries, SmoothingParams
from .lag import LagRecord, LagSummary


@dataclass
class RegionReport:
    region: RegionId
    training_start_day: int | None = None
    training_end_day: int | None = None
    params: SmoothingParams | None = None
    drift_day: int | None = None
    threshold_day: int | None = None
    events: list[InterventionEvent] = field(default_factory=list)
    lags: list[LagRecord] = field(default_factory=list)
    exclusion_reason: str | None = None
    drift: DriftResult | None = None
    one_step_forecasts: ForecastSeries | None = None
    monitor_forecast: ForecastSeries | None = None

    def to_dict(self) -> dict:
        return {
            "region": self.region.name,
            "region_kind": self.region.kind.value,
            "training_start": _iso_or_none(self.training_start_day),
            "training_end": _iso_or_none(self.training_end_day),
            "params": None if self.params is None else {
                "alpha": self.params.alpha,
                "beta": self.params.beta,
                "gamma": self.params.gamma,
            },
            "drift_date": _iso_or_none(self.drift_day),
            "threshold_date": _iso_or_none(self.threshold_day),
            "events": [
                {"kind": e.kind.value, "date": dates.iso(e.day)} for e in self.events
            ],
            "lags": [
                {"kind": r.kind.value, "npi_date": dates.iso(r.npi_day),
                 "lag_days": r.lag_days} for r in self.lags
            ],
            "exclusion_reason": self.exclusion_reason,
        }


def _iso_or_none(day: int | None) -> str | None:
    return None if day is None else dates.iso(day)


def config_comment(config: Mapping) -> str:
    return "# config: " + json.dumps(config, sort_keys=True) + "\n"


def write_lags_csv(reports: list[RegionReport], config: Mapping) -> str:
    lines = [config_comment(config), "region,kind,npi_date,drift_date,lag_days\n"]
    for rep in reports:
        for rec in rep.lags:
            lines.append(
                f"{rep.region.name},{rec.kind.value},{dates.iso(rec.npi_day)},"
                f"{dates.iso(rec.drift_day)},{rec.lag_days}\n"
            )
    return "".join(lines)


def write_lag_summary_csv(summaries: list[LagSummary], config: Mapping) -> str:
    lines = [config_comment(config), "kind,mean_days,sd_days,n\n"]
    for s in summaries:
        lines.append(f"{s.kind.value},{s.mean_days:.4f},{s.sd_days:.4f},{s.n}\n")
    return "".join(lines)


def write_mask_report_csv(reports: list[RegionReport], config: Mapping) -> str:
    """Per-region mask rows: drift date, mask date, days the mask NPI came
    after the drift (positive = after, the layout used for reporting)."""
    lines = [config_comment(config),
             "region,drift_date,mask_npi_date,days_mask_after_drift\n"]
    for rep in reports:
        if rep.drift_day is None:
            continue
        mask = [e for e in rep.events if e.kind is NpiKind.MASK_WEARING]
        if not mask:
            continue
        after = mask[0].day - rep.drift_day
        lines.append(
            f"{rep.region.name},{dates.iso(rep.drift_day)},"
            f"{dates.iso(mask[0].day)},{after}\n"
        )
    return "".join(lines)


def write_trace_csv(report: RegionReport, config: Mapping) -> str:
    lines = [config_comment(config), "date,smape,ph_stat,alarm\n"]
    drift = report.drift
    if drift is not None:
        for i in range(len(drift.smape_trace)):
            day = drift.monitor_start_day + i
            alarm = drift.alarm_index is not None and i + 1 == drift.alarm_index
            lines.append(
                f"{dates.iso(day)},{drift.smape_trace[i]:.6f},"
                f"{drift.ph_trace[i]:.6f},{int(alarm)}\n"
            )
    return "".join(lines)


def write_region_reports_json(reports: list[RegionReport], config: Mapping,
                              seed: int) -> str:
    doc = {
        "seed": seed,
        "config": dict(config),
        "regions": [rep.to_dict() for rep in reports],
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"
