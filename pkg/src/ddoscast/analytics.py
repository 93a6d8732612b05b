"""Descriptive statistics over enriched attack records.

Single-scan global totals, fixed-bin histograms of duration and peak
throughput (optionally sliced per year), year-on-year growth, and subclass
rankings. Year attribution always uses the attack's UTC start year.
"""

from __future__ import annotations

import csv
import datetime as dt
import enum
import io
import math
from dataclasses import dataclass

from .errors import EmptyDatasetError, YearAbsentError
from .ingest import Subclass
from .preprocess import EnrichedRecord, Metric

SECONDS_PER_YEAR = 31_536_000  # 365-day year

# Half-open [lo, hi) bins partitioning each value domain.
DURATION_BINS_MIN = ((0.0, 15.0), (15.0, 30.0), (30.0, 60.0), (60.0, 1440.0), (1440.0, math.inf))
THROUGHPUT_BINS_GBPS = ((0.0, 10.0), (10.0, 100.0), (100.0, 1000.0), (1000.0, math.inf))


@dataclass(frozen=True)
class GlobalStats:
    record_count: int
    total_duration_s: int
    total_duration_years: float
    max_throughput_gbps: float
    longest_attack_s: int
    date_min: dt.date
    date_max: dt.date


@dataclass
class Histogram:
    metric: str
    unit: str
    bins: tuple[tuple[float, float], ...]
    counts: list[int]
    by_year: dict[int, list[int]] | None = None

    def bin_label(self, index: int) -> str:
        lo, hi = self.bins[index]
        hi_txt = "inf" if math.isinf(hi) else f"{hi:g}"
        return f"[{lo:g},{hi_txt})"


@dataclass(frozen=True)
class GrowthCell:
    label: str
    value_a: float
    value_b: float
    growth_pct: float | None  # None when value_a == 0 (undefined, not inf)


@dataclass
class GrowthReport:
    dimension: str
    year_a: int
    year_b: int
    cells: list[GrowthCell]


class GrowthDimension(enum.Enum):
    DURATION_BINS = "duration_bins"
    THROUGHPUT_BINS = "throughput_bins"
    SUBCLASS_COUNTS = "subclass_counts"


def global_stats(records: list[EnrichedRecord]) -> GlobalStats:
    """Totals and extrema in one pass over the records."""
    if not records:
        raise EmptyDatasetError("global_stats needs at least one record")
    total_s = 0
    longest = 0
    max_gbps = 0.0
    date_min = date_max = records[0].start_time.date()
    for rec in records:
        seconds = rec.duration_s
        total_s += seconds
        longest = max(longest, seconds)
        max_gbps = max(max_gbps, rec.max_gbps)
        day = rec.start_time.date()
        date_min = min(date_min, day)
        date_max = max(date_max, day)
    return GlobalStats(
        record_count=len(records),
        total_duration_s=total_s,
        total_duration_years=total_s / SECONDS_PER_YEAR,
        max_throughput_gbps=max_gbps,
        longest_attack_s=longest,
        date_min=date_min,
        date_max=date_max,
    )


def _bin_index(bins, value: float) -> int:
    for idx, (lo, hi) in enumerate(bins):
        if lo <= value < hi:
            return idx
    raise ValueError(f"value {value} outside bin partition")  # negative input


def _histogram(records, bins, value_of, metric: str, unit: str, per_year: bool) -> Histogram:
    if not records:
        raise EmptyDatasetError(f"{metric} histogram needs at least one record")
    counts = [0] * len(bins)
    by_year: dict[int, list[int]] = {}
    for rec in records:
        idx = _bin_index(bins, value_of(rec))
        counts[idx] += 1
        if per_year:
            year = rec.start_time.year
            by_year.setdefault(year, [0] * len(bins))[idx] += 1
    return Histogram(
        metric=metric,
        unit=unit,
        bins=bins,
        counts=counts,
        by_year=dict(sorted(by_year.items())) if per_year else None,
    )


def histogram_duration(records, per_year: bool = False) -> Histogram:
    return _histogram(
        records, DURATION_BINS_MIN, lambda r: r.duration_min, "duration_min", "minutes", per_year
    )


def histogram_throughput(records, per_year: bool = False) -> Histogram:
    return _histogram(
        records, THROUGHPUT_BINS_GBPS, lambda r: r.max_gbps, "max_gbps", "gbps", per_year
    )


def growth_pct(value_a: float, value_b: float) -> float | None:
    """Percent change from a to b; undefined (None) over a zero baseline."""
    if value_a == 0:
        return None
    return 100.0 * (value_b - value_a) / value_a


def yoy_growth(
    records, year_a: int, year_b: int, dimension: GrowthDimension
) -> GrowthReport:
    """Compare per-cell values between two years present in the data."""
    years = {rec.start_time.year for rec in records}
    for year in (year_a, year_b):
        if year not in years:
            raise YearAbsentError(f"no records in year {year}")

    in_a = [r for r in records if r.start_time.year == year_a]
    in_b = [r for r in records if r.start_time.year == year_b]

    cells = []
    if dimension is GrowthDimension.SUBCLASS_COUNTS:
        for sub in sorted(Subclass, key=lambda s: s.value):
            a = sum(1 for r in in_a if r.subclass is sub)
            b = sum(1 for r in in_b if r.subclass is sub)
            cells.append(GrowthCell(sub.value, a, b, growth_pct(a, b)))
    else:
        if dimension is GrowthDimension.DURATION_BINS:
            bins, value_of = DURATION_BINS_MIN, lambda r: r.duration_min
        else:
            bins, value_of = THROUGHPUT_BINS_GBPS, lambda r: r.max_gbps
        for idx, (lo, hi) in enumerate(bins):
            a = sum(1 for r in in_a if _bin_index(bins, value_of(r)) == idx)
            b = sum(1 for r in in_b if _bin_index(bins, value_of(r)) == idx)
            hi_txt = "inf" if math.isinf(hi) else f"{hi:g}"
            cells.append(GrowthCell(f"[{lo:g},{hi_txt})", a, b, growth_pct(a, b)))
    return GrowthReport(dimension=dimension.value, year_a=year_a, year_b=year_b, cells=cells)


def rank_subclasses(records, metric: Metric) -> list[tuple[Subclass, float]]:
    """Subclasses ordered by descending value, ties alphabetical.

    Count ranks by total count; duration/throughput rank by the subclass
    mean. Every enum member appears; subclasses absent from the data rank
    with value 0 at the tail.
    """
    if not records:
        raise EmptyDatasetError("rank_subclasses needs at least one record")
    totals: dict[Subclass, list[float]] = {}
    for rec in records:
        acc = totals.setdefault(rec.subclass, [0.0, 0.0, 0.0, 0])
        acc[0] += rec.count
        acc[1] += rec.duration_min
        acc[2] += rec.max_gbps
        acc[3] += 1
    values = {}
    for sub in Subclass:
        acc = totals.get(sub)
        if acc is None:
            values[sub] = 0.0
        elif metric is Metric.COUNT:
            values[sub] = acc[0]
        elif metric is Metric.DURATION_MIN:
            values[sub] = acc[1] / acc[3]
        else:
            values[sub] = acc[2] / acc[3]
    return sorted(values.items(), key=lambda item: (-item[1], item[0].value))


# --- CSV exports ----------------------------------------------------------


def stats_to_csv(stats: GlobalStats) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(
        [
            "record_count",
            "total_duration_s",
            "total_duration_years",
            "max_throughput_gbps",
            "longest_attack_s",
            "date_min",
            "date_max",
        ]
    )
    writer.writerow(
        [
            stats.record_count,
            stats.total_duration_s,
            repr(stats.total_duration_years),
            repr(stats.max_throughput_gbps),
            stats.longest_attack_s,
            stats.date_min.isoformat(),
            stats.date_max.isoformat(),
        ]
    )
    return buf.getvalue()


def histogram_to_csv(hist: Histogram) -> str:
    """Rows: metric, bin_lo, bin_hi, year ('all' for the overall counts), count."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["metric", "bin_lo", "bin_hi", "year", "count"])

    def write_rows(year_label, counts):
        for idx, (lo, hi) in enumerate(hist.bins):
            hi_txt = "inf" if math.isinf(hi) else f"{hi:g}"
            writer.writerow([hist.metric, f"{lo:g}", hi_txt, year_label, counts[idx]])

    write_rows("all", hist.counts)
    if hist.by_year:
        for year, counts in hist.by_year.items():
            write_rows(year, counts)
    return buf.getvalue()


def growth_to_csv(report: GrowthReport) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["dimension", "cell", "value_a", "value_b", "growth_pct"])
    for cell in report.cells:
        pct = "n/a" if cell.growth_pct is None else repr(cell.growth_pct)
        writer.writerow([report.dimension, cell.label, cell.value_a, cell.value_b, pct])
    return buf.getvalue()


def ranking_to_csv(ranking: list[tuple[Subclass, float]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["rank", "subclass", "value"])
    for pos, (sub, value) in enumerate(ranking, start=1):
        text = str(int(value)) if float(value).is_integer() else repr(value)
        writer.writerow([pos, sub.value, text])
    return buf.getvalue()
