"""Parsing and normalization of case/death tables, NPI tables, and region metadata.

Input formats follow the JHU CSSE wide time-series layout (one row per
province/county, one column per day) plus two narrow artifact-owned CSVs
(``interventions.csv``, ``region_meta.csv``).  All parsers are pure and
deterministic: same bytes in, same model out.
"""

from __future__ import annotations

import csv
import enum
import io
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import dates


class DataError(Exception):
    """Base class for malformed or inconsistent input data."""


class MalformedHeader(DataError):
    pass


class NonNumericCell(DataError):
    pass


class NonContiguousDates(DataError):
    pass


class UnknownKind(DataError):
    pass


class DuplicateEvent(DataError):
    pass


class MissingColumn(DataError):
    pass


class OutOfRange(DataError):
    pass


class SeriesTooShort(DataError):
    pass


class RegionKind(enum.Enum):
    COUNTRY = "country"
    US_STATE = "us_state"


class Measure(enum.Enum):
    CASES = "cases"
    DEATHS = "deaths"


class NpiKind(enum.Enum):
    GATHERING_RESTRICTION = "gathering_restriction"
    SOCIAL_DISTANCING = "social_distancing"
    SCHOOL_CLOSURE = "school_closure"
    LOCKDOWN = "lockdown"
    MASK_WEARING = "mask_wearing"


#: The four NPIs whose reaction times enter the regression (mask wearing excluded).
REGRESSION_NPIS = (
    NpiKind.GATHERING_RESTRICTION,
    NpiKind.SOCIAL_DISTANCING,
    NpiKind.SCHOOL_CLOSURE,
    NpiKind.LOCKDOWN,
)

#: US state names (plus DC) used to resolve a bare region name to a kind.
US_STATE_NAMES = frozenset(
    {
        "Alabama", "Alaska", "Arizona", "Arkansas", "California", "Colorado",
        "Connecticut", "Delaware", "District of Columbia", "Florida",
        "Georgia", "Hawaii", "Idaho", "Illinois", "Indiana", "Iowa",
        "Kansas", "Kentucky", "Louisiana", "Maine", "Maryland",
        "Massachusetts", "Michigan", "Minnesota", "Mississippi", "Missouri",
        "Montana", "Nebraska", "Nevada", "New Hampshire", "New Jersey",
        "New Mexico", "New York", "North Carolina", "North Dakota", "Ohio",
        "Oklahoma", "Oregon", "Pennsylvania", "Rhode Island",
        "South Carolina", "South Dakota", "Tennessee", "Texas", "Utah",
        "Vermont", "Virginia", "Washington", "West Virginia", "Wisconsin",
        "Wyoming",
    }
)


@dataclass(frozen=True, order=True)
class RegionId:
    name: str
    kind: RegionKind = field(compare=False)

    def __post_init__(self) -> None:
        if not self.name:
            raise ValueError("region name must be non-empty")


def region_for_name(name: str, aliases: Mapping[str, str] | None = None) -> RegionId:
    """Resolve a bare region name to a :class:`RegionId`.

    Names are matched exactly after trimming (plus the optional alias map);
    anything that is not a US state name is treated as a country.
    """
    name = name.strip()
    if aliases:
        name = aliases.get(name, name)
    kind = RegionKind.US_STATE if name in US_STATE_NAMES else RegionKind.COUNTRY
    return RegionId(name, kind)


@dataclass
class CumulativeSeries:
    region: RegionId
    start_day: int
    values: np.ndarray  # cumulative counts, one per day
    measure: Measure

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=np.int64)
        if self.values.ndim != 1 or len(self.values) < 1:
            raise ValueError("cumulative series needs at least one value")
        if (self.values < 0).any():
            raise ValueError("cumulative counts must be non-negative")

    @property
    def end_day(self) -> int:
        return self.start_day + len(self.values) - 1


@dataclass
class DailySeries:
    region: RegionId
    start_day: int
    values: np.ndarray  # daily new counts (integral for parsed data)
    clamped_days: list[int] = field(default_factory=list)

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=np.float64)
        if (self.values < 0).any():
            raise ValueError("daily counts must be non-negative")
        n = len(self.values)
        if any(i < 0 or i >= n for i in self.clamped_days):
            raise ValueError("clamped_days index out of range")

    @property
    def end_day(self) -> int:
        return self.start_day + len(self.values) - 1

    def slice(self, start_day: int, end_day: int) -> "DailySeries":
        """Return the sub-series covering ``start_day..end_day`` inclusive."""
        if start_day < self.start_day or end_day > self.end_day or start_day > end_day:
            raise ValueError("slice outside series range")
        lo = start_day - self.start_day
        hi = end_day - self.start_day + 1
        clamped = [i - lo for i in self.clamped_days if lo <= i < hi]
        return DailySeries(self.region, start_day, self.values[lo:hi].copy(), clamped)


@dataclass(frozen=True)
class InterventionEvent:
    region: RegionId
    kind: NpiKind
    day: int


@dataclass(frozen=True)
class RegionMeta:
    region: RegionId
    population: int
    density_per_km2: float
    urban_share: float
    gdp_per_capita_usd: float
    gini: float
    health_exp_per_capita_usd: float
    hospital_beds_per_100k: float
    avg_temp_march_2020_c: float
    household_size: float

    def __post_init__(self) -> None:
        if self.population <= 0:
            raise OutOfRange(f"{self.region.name}: population must be positive")
        for name in ("density_per_km2", "gdp_per_capita_usd",
                     "health_exp_per_capita_usd", "hospital_beds_per_100k",
                     "household_size"):
            if getattr(self, name) <= 0:
                raise OutOfRange(f"{self.region.name}: {name} must be positive")
        for name in ("urban_share", "gini"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise OutOfRange(f"{self.region.name}: {name} must be in [0,1]")

    def feature_values(self) -> list[float]:
        """The nine metadata columns, in schema order."""
        return [
            float(self.population),
            self.density_per_km2,
            self.urban_share,
            self.gdp_per_capita_usd,
            self.gini,
            self.health_exp_per_capita_usd,
            self.hospital_beds_per_100k,
            self.avg_temp_march_2020_c,
            self.household_size,
        ]


META_COLUMNS = (
    "population",
    "density_per_km2",
    "urban_share",
    "gdp_per_capita_usd",
    "gini",
    "health_exp_per_capita_usd",
    "hospital_beds_per_100k",
    "avg_temp_march_2020_c",
    "household_size",
)


def _read_rows(csv_text: str) -> list[list[str]]:
    rows = [row for row in csv.reader(io.StringIO(csv_text)) if row]
    return [row for row in rows if not (row[0].startswith("#"))]


def _parse_date_columns(header_cells: Sequence[str], csv_name: str) -> list[int]:
    days = []
    for cell in header_cells:
        try:
            days.append(dates.parse_mdy(cell))
        except ValueError as exc:
            raise MalformedHeader(f"{csv_name}: bad date column {cell!r}") from exc
    for prev, cur in zip(days, days[1:]):
        if cur != prev + 1:
            raise NonContiguousDates(
                f"{csv_name}: date columns jump from {dates.iso(prev)} to {dates.iso(cur)}"
            )
    return days


def _parse_counts(cells: Sequence[str], n: int, where: str) -> np.ndarray:
    if len(cells) != n:
        raise MalformedHeader(f"{where}: expected {n} value cells, got {len(cells)}")
    out = np.empty(n, dtype=np.int64)
    for i, cell in enumerate(cells):
        text = cell.strip()
        try:
            value = float(text) if text else 0.0
        except ValueError as exc:
            raise NonNumericCell(f"{where}: non-numeric cell {cell!r}") from exc
        out[i] = int(round(value))
    return out


def parse_jhu_global(
    csv_text: str,
    measure: Measure,
    aliases: Mapping[str, str] | None = None,
) -> dict[RegionId, CumulativeSeries]:
    """Parse the JHU global wide CSV into country-level cumulative series.

    Province rows sharing a ``Country/Region`` are summed per date.
    """
    rows = _read_rows(csv_text)
    if not rows:
        raise MalformedHeader("global CSV is empty")
    header = rows[0]
    fixed = ["Province/State", "Country/Region", "Lat", "Long"]
    if [c.strip() for c in header[: len(fixed)]] != fixed:
        raise MalformedHeader(
            f"global CSV header must begin {','.join(fixed)}, got {header[:4]}"
        )
    days = _parse_date_columns(header[len(fixed):], "global CSV")
    if not days:
        raise MalformedHeader("global CSV has no date columns")

    totals: dict[str, np.ndarray] = {}
    for row in rows[1:]:
        country = row[1].strip()
        if aliases:
            country = aliases.get(country, country)
        if not country:
            raise MalformedHeader("global CSV row with empty Country/Region")
        counts = _parse_counts(row[len(fixed):], len(days), f"global CSV row {country!r}")
        if country in totals:
            totals[country] = totals[country] + counts
        else:
            totals[country] = counts

    out: dict[RegionId, CumulativeSeries] = {}
    for country, counts in totals.items():
        region = RegionId(country, RegionKind.COUNTRY)
        out[region] = CumulativeSeries(region, days[0], counts, measure)
    return out


def parse_jhu_us(
    csv_text: str,
    measure: Measure,
    aliases: Mapping[str, str] | None = None,
) -> dict[RegionId, CumulativeSeries]:
    """Parse the JHU US wide CSV, aggregating county rows to state level.

    The US layout carries a variable block of bookkeeping columns
    (UID/FIPS/Admin2/...); date columns are recognized as the trailing
    M/D/YY block, so the confirmed and deaths layouts (the latter has an
    extra ``Population`` column) both parse.
    """
    rows = _read_rows(csv_text)
    if not rows:
        raise MalformedHeader("US CSV is empty")
    header = [c.strip() for c in rows[0]]
    if "Province_State" not in header:
        raise MalformedHeader("US CSV header lacks Province_State column")
    state_col = header.index("Province_State")

    first_date_col = None
    for i, cell in enumerate(header):
        try:
            dates.parse_mdy(cell)
        except ValueError:
            continue
        first_date_col = i
        break
    if first_date_col is None or first_date_col <= state_col:
        raise MalformedHeader("US CSV has no trailing date columns")
    days = _parse_date_columns(header[first_date_col:], "US CSV")

    totals: dict[str, np.ndarray] = {}
    for row in rows[1:]:
        state = row[state_col].strip()
        if aliases:
            state = aliases.get(state, state)
        if not state:
            raise MalformedHeader("US CSV row with empty Province_State")
        counts = _parse_counts(row[first_date_col:], len(days), f"US CSV row {state!r}")
        if state in totals:
            totals[state] = totals[state] + counts
        else:
            totals[state] = counts

    out: dict[RegionId, CumulativeSeries] = {}
    for state, counts in totals.items():
        region = RegionId(state, RegionKind.US_STATE)
        out[region] = CumulativeSeries(region, days[0], counts, measure)
    return out


def to_daily(cum: CumulativeSeries) -> DailySeries:
    """First-difference a cumulative series; negative corrections clamp to 0.

    ``daily[0]`` is the first cumulative value itself.  Days where a negative
    difference was clamped are recorded, not redistributed.
    """
    if len(cum.values) < 2:
        raise SeriesTooShort(f"{cum.region.name}: need at least 2 days, got {len(cum.values)}")
    diffs = np.diff(cum.values)
    clamped = [int(i) + 1 for i in np.nonzero(diffs < 0)[0]]
    daily = np.concatenate([[cum.values[0]], np.maximum(diffs, 0)])
    return DailySeries(cum.region, cum.start_day, daily.astype(np.float64), clamped)


def load_interventions(
    csv_text: str,
    aliases: Mapping[str, str] | None = None,
) -> list[InterventionEvent]:
    """Load the narrow ``region,kind,date`` NPI table.

    Kinds are matched case-insensitively against the five-kind vocabulary;
    duplicate ``(region, kind)`` pairs are rejected.
    """
    rows = _read_rows(csv_text)
    if not rows or [c.strip().lower() for c in rows[0]] != ["region", "kind", "date"]:
        raise MalformedHeader("interventions CSV must have header region,kind,date")
    events: list[InterventionEvent] = []
    seen: set[tuple[RegionId, NpiKind]] = set()
    for row in rows[1:]:
        if len(row) != 3:
            raise MalformedHeader(f"interventions row needs 3 cells: {row!r}")
        region = region_for_name(row[0], aliases)
        kind_text = row[1].strip().lower()
        try:
            kind = NpiKind(kind_text)
        except ValueError as exc:
            raise UnknownKind(f"unknown NPI kind {row[1]!r}") from exc
        try:
            day = dates.parse_iso(row[2])
        except ValueError as exc:
            raise DataError(f"bad ISO date {row[2]!r}") from exc
        key = (region, kind)
        if key in seen:
            raise DuplicateEvent(f"duplicate event {region.name}/{kind.value}")
        seen.add(key)
        events.append(InterventionEvent(region, kind, day))
    return events


def load_region_meta(
    csv_text: str,
    aliases: Mapping[str, str] | None = None,
) -> dict[RegionId, RegionMeta]:
    """Load per-region metadata (population plus eight numeric indicators)."""
    rows = _read_rows(csv_text)
    if not rows:
        raise MalformedHeader("region metadata CSV is empty")
    header = [c.strip() for c in rows[0]]
    if not header or header[0] != "region":
        raise MalformedHeader("region metadata CSV must start with a region column")
    for col in META_COLUMNS:
        if col not in header:
            raise MissingColumn(f"region metadata CSV lacks column {col!r}")
    idx = {col: header.index(col) for col in META_COLUMNS}

    out: dict[RegionId, RegionMeta] = {}
    for row in rows[1:]:
        if len(row) != len(header):
            raise MalformedHeader(f"region metadata row width mismatch: {row!r}")
        region = region_for_name(row[0], aliases)
        if region in out:
            raise DuplicateEvent(f"duplicate metadata row for {region.name}")
        values = {}
        for col in META_COLUMNS:
            cell = row[idx[col]].strip()
            try:
                values[col] = float(cell)
            except ValueError as exc:
                raise NonNumericCell(f"{region.name}: non-numeric {col}={cell!r}") from exc
        values["population"] = int(values["population"])
        out[region] = RegionMeta(region=region, **values)
    return out


def load_aliases(csv_text: str) -> dict[str, str]:
    """Load the optional ``raw,canonical`` alias map."""
    rows = _read_rows(csv_text)
    if not rows or [c.strip().lower() for c in rows[0]] != ["raw", "canonical"]:
        raise MalformedHeader("alias CSV must have header raw,canonical")
    return {row[0].strip(): row[1].strip() for row in rows[1:]}


def death_threshold_day(
    deaths: CumulativeSeries,
    population: int,
    per_capita: float = 1e-6,
) -> int | None:
    """First day cumulative deaths reach ``per_capita`` of the population.

    Returns None when the threshold is never reached.
    """
    if deaths.measure is not Measure.DEATHS:
        raise ValueError("threshold needs a deaths series")
    if population <= 0:
        raise ValueError("population must be positive")
    needed = per_capita * population
    hits = np.nonzero(deaths.values >= needed)[0]
    if len(hits) == 0:
        return None
    return deaths.start_day + int(hits[0])


def filter_us_states(
    series: Mapping[RegionId, CumulativeSeries],
    min_cumulative: int = 10000,
    cutoff_day: int | None = None,
) -> dict[RegionId, CumulativeSeries]:
    """Keep states whose cumulative count strictly exceeds ``min_cumulative``.

    The count is taken on ``cutoff_day`` (or the last day at or before it);
    with no cutoff the final value is used.
    """
    kept: dict[RegionId, CumulativeSeries] = {}
    for region, cum in series.items():
        if cutoff_day is None:
            value = cum.values[-1]
        else:
            if cutoff_day < cum.start_day:
                continue
            i = min(cutoff_day, cum.end_day) - cum.start_day
            value = cum.values[i]
        if value > min_cumulative:
            kept[region] = cum
    return kept
