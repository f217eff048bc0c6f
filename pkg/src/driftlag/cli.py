"""Command-line entry point orchestrating the end-to-end pipeline.

Subcommands: ``detect`` (drift detection + lag tables), ``regress``
(drift-timing regression over a detect run), ``synth`` (synthetic stream
generation), ``report`` (charts and a human-readable summary).
Configuration comes from an optional TOML file plus flag overrides; flags
win.  Per-region failures become exclusions and never abort the batch.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field, replace
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

import numpy as np

from . import dates
from .charts import render_chart
from .data import (
    CumulativeSeries,
    DailySeries,
    DataError,
    InterventionEvent,
    Measure,
    NpiKind,
    RegionId,
    RegionKind,
    RegionMeta,
    death_threshold_day,
    filter_us_states,
    load_aliases,
    load_interventions,
    load_region_meta,
    parse_jhu_global,
    parse_jhu_us,
    to_daily,
)
from .drift import PhtConfig
from .forecast import TooShort
from .lag import (
    compute_lags,
    regression_dataset,
    summarize_lags,
)
from .lasso import nested_cv
from .pipeline import InsufficientData, NoInterventions, PipelineConfig, run_region
from .reporting import (
    RegionReport,
    write_lag_summary_csv,
    write_lags_csv,
    write_mask_report_csv,
    write_region_reports_json,
    write_trace_csv,
)
from .synth import SyntheticSpec, generate

SYNTH_ANCHOR_DATE = "2020-01-22"


@dataclass(frozen=True)
class RunConfig:
    cases: tuple[str, ...] = ()
    deaths: tuple[str, ...] = ()
    npis: str | None = None
    meta: str | None = None
    aliases: str | None = None
    countries: tuple[str, ...] = ()  # empty: every parsed country
    pht: PhtConfig = field(default_factory=PhtConfig)
    training_offset_days: int = 7
    validation_days: int = 3
    death_threshold_per_capita: float = 1e-6
    us_state_min_cases: int = 10000
    us_state_cutoff_date: str = "2020-05-13"
    seed: int = 20200512
    out: str = "out"

    def pipeline_config(self) -> PipelineConfig:
        return PipelineConfig(
            pht=self.pht,
            training_offset_days=self.training_offset_days,
            validation_days=self.validation_days,
            death_threshold_per_capita=self.death_threshold_per_capita,
            us_state_min_cases=self.us_state_min_cases,
        )

    def echo(self) -> dict:
        return {
            "countries": list(self.countries),
            "pht": {
                "threshold": self.pht.threshold,
                "min_instances": self.pht.min_instances,
                "delta": self.pht.delta,
                "forgetting": self.pht.forgetting,
            },
            "training_offset_days": self.training_offset_days,
            "validation_days": self.validation_days,
            "death_threshold_per_capita": self.death_threshold_per_capita,
            "us_state_min_cases": self.us_state_min_cases,
            "us_state_cutoff_date": self.us_state_cutoff_date,
            "seed": self.seed,
        }


def load_config_file(path: str | Path) -> RunConfig:
    with open(path, "rb") as fh:
        doc = tomllib.load(fh)
    pht_doc = doc.get("pht", {})
    pht = PhtConfig(
        threshold=pht_doc.get("threshold", 0.3),
        min_instances=pht_doc.get("min_instances", 3),
        delta=pht_doc.get("delta", 0.005),
        forgetting=pht_doc.get("forgetting", 0.9999),
    )
    inputs = doc.get("inputs", {})
    pipe = doc.get("pipeline", {})
    return RunConfig(
        cases=tuple(inputs.get("cases", ())),
        deaths=tuple(inputs.get("deaths", ())),
        npis=inputs.get("npis"),
        meta=inputs.get("meta"),
        aliases=inputs.get("aliases"),
        countries=tuple(doc.get("regions", {}).get("countries", ())),
        pht=pht,
        training_offset_days=pipe.get("training_offset_days", 7),
        validation_days=pipe.get("validation_days", 3),
        death_threshold_per_capita=pipe.get("death_threshold_per_capita", 1e-6),
        us_state_min_cases=pipe.get("us_state_min_cases", 10000),
        us_state_cutoff_date=pipe.get("us_state_cutoff_date", "2020-05-13"),
        seed=doc.get("seed", 20200512),
        out=doc.get("out", "out"),
    )


def _sniff_and_parse(path: str, measure: Measure, aliases) -> dict[RegionId, CumulativeSeries]:
    text = Path(path).read_text(encoding="utf-8")
    first = text.split("\n", 1)[0]
    if "Province_State" in first:
        return parse_jhu_us(text, measure, aliases)
    return parse_jhu_global(text, measure, aliases)


@dataclass
class LoadedInputs:
    cases: dict[RegionId, CumulativeSeries]
    deaths: dict[RegionId, CumulativeSeries]
    events: list[InterventionEvent]
    meta: dict[RegionId, RegionMeta]


def load_inputs(config: RunConfig) -> LoadedInputs:
    aliases = None
    if config.aliases:
        aliases = load_aliases(Path(config.aliases).read_text(encoding="utf-8"))
    cases: dict[RegionId, CumulativeSeries] = {}
    deaths: dict[RegionId, CumulativeSeries] = {}
    for path in config.cases:
        cases.update(_sniff_and_parse(path, Measure.CASES, aliases))
    for path in config.deaths:
        deaths.update(_sniff_and_parse(path, Measure.DEATHS, aliases))
    events: list[InterventionEvent] = []
    if config.npis:
        events = load_interventions(Path(config.npis).read_text(encoding="utf-8"), aliases)
    meta: dict[RegionId, RegionMeta] = {}
    if config.meta:
        meta = load_region_meta(Path(config.meta).read_text(encoding="utf-8"), aliases)
    return LoadedInputs(cases, deaths, events, meta)


def select_regions(config: RunConfig, cases: dict[RegionId, CumulativeSeries]) -> list[RegionId]:
    """The analyzed regions: configured countries plus US states over the
    case cutoff, ordered by name for deterministic output."""
    countries = [r for r in cases if r.kind is RegionKind.COUNTRY]
    if config.countries:
        wanted = set(config.countries)
        countries = [r for r in countries if r.name in wanted]
    states = {r: s for r, s in cases.items() if r.kind is RegionKind.US_STATE}
    cutoff_day = dates.parse_iso(config.us_state_cutoff_date)
    kept = filter_us_states(states, config.us_state_min_cases, cutoff_day)
    return sorted(countries, key=lambda r: r.name) + sorted(kept, key=lambda r: r.name)


def run_detect(config: RunConfig) -> list[RegionReport]:
    """Detection pipeline for every selected region; failures become exclusions."""
    inputs = load_inputs(config)
    regions = select_regions(config, inputs.cases)
    events_by_region: dict[RegionId, list[InterventionEvent]] = {}
    for e in inputs.events:
        events_by_region.setdefault(e.region, []).append(e)

    pcfg = config.pipeline_config()
    reports: list[RegionReport] = []
    for region in regions:
        report = RegionReport(region=region,
                              events=sorted(events_by_region.get(region, []),
                                            key=lambda e: (e.day, e.kind.value)))
        reports.append(report)
        if region in inputs.deaths and region in inputs.meta:
            report.threshold_day = death_threshold_day(
                inputs.deaths[region], inputs.meta[region].population,
                config.death_threshold_per_capita,
            )
        try:
            daily = to_daily(inputs.cases[region])
            run = run_region(daily, report.events, pcfg)
        except NoInterventions:
            report.exclusion_reason = "NoInterventions"
            continue
        except (InsufficientData, TooShort) as exc:
            report.exclusion_reason = f"InsufficientData: {exc}"
            continue
        except DataError as exc:
            report.exclusion_reason = f"DataError: {exc}"
            continue
        report.training_start_day = run.window.start_day
        report.training_end_day = run.window.end_day
        report.params = run.params
        report.drift = run.drift
        report.one_step_forecasts = run.one_step_forecasts
        report.monitor_forecast = run.monitor_forecast
        if run.drift.drift_day is None:
            report.exclusion_reason = "NoDriftDetected"
            continue
        report.drift_day = run.drift.drift_day
        report.lags = compute_lags(run.drift, report.events)
    return reports


def write_detect_outputs(reports: list[RegionReport], config: RunConfig,
                         out_dir: str | Path) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    echo = config.echo()
    (out / "lags.csv").write_text(write_lags_csv(reports, echo), encoding="utf-8")
    all_lags = [rec for rep in reports for rec in rep.lags]
    summaries = summarize_lags(all_lags) if all_lags else []
    (out / "lag_summary.csv").write_text(
        write_lag_summary_csv(summaries, echo), encoding="utf-8")
    (out / "mask_report.csv").write_text(
        write_mask_report_csv(reports, echo), encoding="utf-8")
    traces = out / "traces"
    traces.mkdir(exist_ok=True)
    for rep in reports:
        if rep.drift is None:
            continue
        name = rep.region.name.replace(" ", "_")
        (traces / f"{name}.csv").write_text(write_trace_csv(rep, echo), encoding="utf-8")
    (out / "region_reports.json").write_text(
        write_region_reports_json(reports, echo, config.seed), encoding="utf-8")


def run_regress(config: RunConfig, detect_out: str | Path):
    """Regression over a finished detect run; returns (report, dataset, dropped)."""
    doc = json.loads((Path(detect_out) / "region_reports.json").read_text(encoding="utf-8"))
    meta = load_region_meta(Path(config.meta).read_text(encoding="utf-8")) if config.meta else {}

    regions: list[RegionId] = []
    drift_days: dict[RegionId, int | None] = {}
    threshold_days: dict[RegionId, int | None] = {}
    events: list[InterventionEvent] = []
    for entry in doc["regions"]:
        region = RegionId(entry["region"], RegionKind(entry["region_kind"]))
        regions.append(region)
        drift_days[region] = (
            None if entry["drift_date"] is None else dates.parse_iso(entry["drift_date"])
        )
        threshold_days[region] = (
            None if entry["threshold_date"] is None else dates.parse_iso(entry["threshold_date"])
        )
        for ev in entry["events"]:
            events.append(InterventionEvent(region, NpiKind(ev["kind"]),
                                            dates.parse_iso(ev["date"])))

    # qualifying regions lacking metadata are listed and dropped, not fatal
    dropped = sorted(
        r.name for r in regions
        if r not in meta and drift_days.get(r) is not None
        and threshold_days.get(r) is not None
    )
    candidates = [r for r in regions if r in meta]
    dataset = regression_dataset(candidates, drift_days, events, threshold_days, meta)
    report = nested_cv(dataset.X.values, dataset.y,
                       feature_names=dataset.feature_names, seed=config.seed)
    return report, dataset, dropped


def write_regress_outputs(report, dataset, dropped, config: RunConfig,
                          out_dir: str | Path) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    doc = report.to_dict()
    doc["rows"] = [r.name for r in dataset.regions]
    doc["n_rows"] = len(dataset.regions)
    doc["n_features"] = len(dataset.feature_names)
    doc["dropped_missing_metadata"] = dropped
    doc["run_config"] = config.echo()
    (out / "regression.json").write_text(
        json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def write_report_outputs(reports: list[RegionReport], inputs: LoadedInputs,
                         config: RunConfig, out_dir: str | Path) -> None:
    out = Path(out_dir)
    charts = out / "charts"
    charts.mkdir(parents=True, exist_ok=True)
    echo = config.echo()
    lines = ["# Drift detection summary\n",
             "| region | first NPI | threshold | drift | school lag | exclusion |\n",
             "|---|---|---|---|---|---|\n"]
    for rep in reports:
        if rep.drift_day is not None and rep.region in inputs.cases:
            daily = to_daily(inputs.cases[rep.region])
            forecast = _stitched_forecast(rep)
            svg = render_chart(rep, daily, forecast, echo)
            name = rep.region.name.replace(" ", "_")
            (charts / f"{name}.svg").write_text(svg, encoding="utf-8")
        first_npi = min((e.day for e in rep.events), default=None)
        school = next((r.lag_days for r in rep.lags if r.kind is NpiKind.SCHOOL_CLOSURE), None)
        lines.append(
            "| {} | {} | {} | {} | {} | {} |\n".format(
                rep.region.name,
                dates.iso(first_npi) if first_npi is not None else "-",
                dates.iso(rep.threshold_day) if rep.threshold_day is not None else "-",
                dates.iso(rep.drift_day) if rep.drift_day is not None else "-",
                school if school is not None else "-",
                rep.exclusion_reason or "-",
            )
        )
    (out / "summary.md").write_text("".join(lines), encoding="utf-8")


def _stitched_forecast(rep: RegionReport):
    """In-sample one-step forecasts followed by the static monitor forecast."""
    if rep.one_step_forecasts is None and rep.monitor_forecast is None:
        return None
    if rep.one_step_forecasts is None:
        return rep.monitor_forecast
    if rep.monitor_forecast is None:
        return rep.one_step_forecasts
    from .forecast import ForecastSeries

    return ForecastSeries(
        rep.one_step_forecasts.start_day,
        np.concatenate([rep.one_step_forecasts.values, rep.monitor_forecast.values]),
    )


def _apply_flags(config: RunConfig, args: argparse.Namespace) -> RunConfig:
    updates: dict = {}
    if getattr(args, "cases", None):
        updates["cases"] = tuple(args.cases)
    if getattr(args, "deaths", None):
        updates["deaths"] = tuple(args.deaths)
    for name in ("npis", "meta", "aliases", "out"):
        value = getattr(args, name, None)
        if value is not None:
            updates[name] = value
    if getattr(args, "countries", None):
        updates["countries"] = tuple(s.strip() for s in args.countries.split(","))
    if getattr(args, "seed", None) is not None:
        updates["seed"] = args.seed
    if getattr(args, "pht_threshold", None) is not None:
        updates["pht"] = replace(config.pht, threshold=args.pht_threshold)
    return replace(config, **updates)


def _add_common_input_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--cases", action="append", help="case CSV (repeatable; JHU global or US layout)")
    p.add_argument("--deaths", action="append", help="deaths CSV (repeatable)")
    p.add_argument("--npis", help="interventions CSV (region,kind,date)")
    p.add_argument("--meta", help="region metadata CSV")
    p.add_argument("--aliases", help="optional region alias CSV (raw,canonical)")
    p.add_argument("--countries", help="comma-separated country filter")
    p.add_argument("--config", help="TOML config file (flags win)")
    p.add_argument("--seed", type=int)
    p.add_argument("--pht-threshold", type=float, dest="pht_threshold")
    p.add_argument("--out", help="output directory")


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="driftlag",
                                     description="Concept-drift lag analysis for epidemic case counts")
    sub = parser.add_subparsers(dest="command", required=True)

    p_detect = sub.add_parser("detect", help="detect drifts and write lag tables")
    _add_common_input_flags(p_detect)

    p_regress = sub.add_parser("regress", help="drift-timing regression over a detect run")
    p_regress.add_argument("--detect-out", required=True, help="directory written by detect")
    p_regress.add_argument("--meta", required=True)
    p_regress.add_argument("--seed", type=int)
    p_regress.add_argument("--config", help="TOML config file (flags win)")
    p_regress.add_argument("--out", required=True)

    p_synth = sub.add_parser("synth", help="generate a synthetic daily series")
    p_synth.add_argument("--spec", required=True, help="TOML file with the stream parameters")
    p_synth.add_argument("--out", required=True, help="output CSV path")

    p_report = sub.add_parser("report", help="render charts and a summary for a detection run")
    _add_common_input_flags(p_report)

    args = parser.parse_args(argv)

    if args.command == "synth":
        with open(args.spec, "rb") as fh:
            doc = tomllib.load(fh)
        spec = SyntheticSpec(**doc)
        series = generate(spec)
        anchor = dates.parse_iso(SYNTH_ANCHOR_DATE)
        lines = ["# config: " + json.dumps(doc, sort_keys=True) + "\n", "date,value\n"]
        for i, v in enumerate(series.values):
            lines.append(f"{dates.iso(anchor + i)},{v:g}\n")
        Path(args.out).parent.mkdir(parents=True, exist_ok=True)
        Path(args.out).write_text("".join(lines), encoding="utf-8")
        print(f"wrote {args.out}")
        return 0

    config = load_config_file(args.config) if getattr(args, "config", None) else RunConfig()
    config = _apply_flags(config, args)

    if args.command == "detect":
        reports = run_detect(config)
        write_detect_outputs(reports, config, config.out)
        detected = sum(1 for r in reports if r.drift_day is not None)
        print(f"{len(reports)} regions analyzed, {detected} drifts detected -> {config.out}")
        return 0

    if args.command == "regress":
        report, dataset, dropped = run_regress(config, args.detect_out)
        write_regress_outputs(report, dataset, dropped, config, config.out)
        print(
            f"regression over {len(dataset.regions)} regions "
            f"(MAE {report.mae:.2f}, RMSE {report.rmse:.2f}) -> {config.out}"
        )
        return 0

    if args.command == "report":
        inputs = load_inputs(config)
        reports = run_detect(config)
        write_report_outputs(reports, inputs, config, config.out)
        print(f"charts and summary for {len(reports)} regions -> {config.out}")
        return 0

    parser.error(f"unknown command {args.command!r}")
    return 2


if __name__ == "__main__":
    sys.exit(main())
