"""Feature derivation and per-subclass time bucketing.

Records are enriched with duration in minutes, peak Gbps and a unit count,
then grouped into (period, subclass) cells at daily, weekly (ISO-8601),
monthly or yearly granularity. Bucketing uses the attack's start time only,
in UTC. Means are always taken over the underlying records of a cell, never
over finer-grained means.
"""

from __future__ import annotations

import csv
import datetime as dt
import enum
import io
from dataclasses import dataclass

import numpy as np

from .errors import SubclassAbsentError
from .ingest import AttackRecord, Subclass

_UTC = dt.timezone.utc


class Granularity(enum.Enum):
    DAILY = "daily"
    WEEKLY = "weekly"
    MONTHLY = "monthly"
    YEARLY = "yearly"


class Metric(enum.Enum):
    COUNT = "count"
    DURATION_MIN = "duration_min"
    MAX_GBPS = "max_gbps"


@dataclass(frozen=True)
class EnrichedRecord:
    subclass: Subclass
    start_time: dt.datetime
    stop_time: dt.datetime
    duration_min: float
    max_gbps: float
    count: float = 1.0

    @property
    def duration_s(self) -> int:
        """Exact attack duration in whole seconds."""
        return int((self.stop_time - self.start_time).total_seconds())


def enrich(record: AttackRecord) -> EnrichedRecord:
    """Derive the engineered fields from one raw record.

    duration_min is (stop - start) / 60; max_gbps divides by the decimal
    10^9 (bits-per-second convention, not 2^30).
    """
    return EnrichedRecord(
        subclass=record.subclass,
        start_time=dt.datetime.fromtimestamp(record.start, tz=_UTC),
        stop_time=dt.datetime.fromtimestamp(record.stop, tz=_UTC),
        duration_min=(record.stop - record.start) / 60,
        max_gbps=record.max_bps / 1e9,
    )


def enrich_all(records) -> list[EnrichedRecord]:
    return [enrich(r) for r in records]


# --- period keys ----------------------------------------------------------
#
# Canonical key formats: 2020-01-03 / 2020-W05 / 2020-01 / 2020. Keys of one
# granularity sort chronologically as plain strings (weeks are zero-padded
# and belong to their ISO year).


def period_key(t: dt.datetime, granularity: Granularity) -> str:
    d = t.date()
    if granularity is Granularity.DAILY:
        return d.isoformat()
    if granularity is Granularity.WEEKLY:
        iso = d.isocalendar()
        return f"{iso[0]}-W{iso[1]:02d}"
    if granularity is Granularity.MONTHLY:
        return f"{d.year:04d}-{d.month:02d}"
    return f"{d.year:04d}"


def _key_to_anchor(key: str, granularity: Granularity) -> dt.date:
    """First calendar day of the period named by the key."""
    if granularity is Granularity.DAILY:
        return dt.date.fromisoformat(key)
    if granularity is Granularity.WEEKLY:
        year, week = key.split("-W")
        return dt.date.fromisocalendar(int(year), int(week), 1)
    if granularity is Granularity.MONTHLY:
        year, month = key.split("-")
        return dt.date(int(year), int(month), 1)
    return dt.date(int(key), 1, 1)


def _next_key(key: str, granularity: Granularity) -> str:
    anchor = _key_to_anchor(key, granularity)
    if granularity is Granularity.DAILY:
        nxt = anchor + dt.timedelta(days=1)
    elif granularity is Granularity.WEEKLY:
        nxt = anchor + dt.timedelta(days=7)
    elif granularity is Granularity.MONTHLY:
        if anchor.month == 12:
            nxt = dt.date(anchor.year + 1, 1, 1)
        else:
            nxt = dt.date(anchor.year, anchor.month + 1, 1)
    else:
        nxt = dt.date(anchor.year + 1, 1, 1)
    return period_key(dt.datetime.combine(nxt, dt.time(), _UTC), granularity)


def period_range(first: str, last: str, granularity: Granularity) -> list[str]:
    """All period keys from first to last inclusive, no gaps."""
    keys = [first]
    while keys[-1] != last:
        keys.append(_next_key(keys[-1], granularity))
    return keys


# --- aggregation ----------------------------------------------------------


@dataclass(frozen=True)
class CellStats:
    count_sum: float
    duration_mean: float
    gbps_mean: float
    n: int


@dataclass
class AggregateTable:
    granularity: Granularity
    rows: dict[tuple[str, Subclass], CellStats]

    def periods(self) -> list[str]:
        """Occupied period keys in chronological order."""
        return sorted({key for key, _ in self.rows})


def aggregate(records, granularity: Granularity) -> AggregateTable:
    """Group enriched records into (period, subclass) cells.

    count_sum is the sum of the per-record count column (1.0 each), so it
    always equals the cell's record count; duration and throughput are
    arithmetic means over the cell's records.
    """
    sums: dict[tuple[str, Subclass], list[float]] = {}
    for rec in records:
        cell = (period_key(rec.start_time, granularity), rec.subclass)
        acc = sums.setdefault(cell, [0.0, 0.0, 0.0, 0])
        acc[0] += rec.count
        acc[1] += rec.duration_min
        acc[2] += rec.max_gbps
        acc[3] += 1
    rows = {
        cell: CellStats(
            count_sum=acc[0],
            duration_mean=acc[1] / acc[3],
            gbps_mean=acc[2] / acc[3],
            n=acc[3],
        )
        for cell, acc in sums.items()
    }
    return AggregateTable(granularity=granularity, rows=rows)


@dataclass
class TimeSeries:
    subclass: Subclass
    metric: Metric
    granularity: Granularity
    periods: tuple[str, ...]
    values: np.ndarray


def series_for(
    table: AggregateTable,
    subclass: Subclass,
    metric: Metric,
    fill_gaps: bool = True,
) -> TimeSeries:
    """Extract one subclass/metric series from the table.

    The series spans the table's full period range (all subclasses), so
    series extracted for different subclasses align. Periods in which the
    subclass saw no attacks get 0.0 for every metric. ``fill_gaps=False``
    keeps only occupied periods (a deliberately non-contiguous series for
    comparison runs).
    """
    occupied = table.periods()
    if not occupied:
        raise SubclassAbsentError(f"empty table has no {subclass.value} series")
    mine = {key: stats for (key, sub), stats in table.rows.items() if sub is subclass}
    if not mine:
        raise SubclassAbsentError(f"subclass {subclass.value} never occurs in table")

    if fill_gaps:
        keys = period_range(occupied[0], occupied[-1], table.granularity)
    else:
        keys = sorted(mine)

    values = np.zeros(len(keys), dtype=np.float64)
    for idx, key in enumerate(keys):
        stats = mine.get(key)
        if stats is None:
            continue
        if metric is Metric.COUNT:
            values[idx] = stats.count_sum
        elif metric is Metric.DURATION_MIN:
            values[idx] = stats.duration_mean
        else:
            values[idx] = stats.gbps_mean
    return TimeSeries(
        subclass=subclass,
        metric=metric,
        granularity=table.granularity,
        periods=tuple(keys),
        values=values,
    )


def table_to_csv(table: AggregateTable) -> str:
    """CSV export: granularity, period, subclass, count_sum, duration_mean_min, gbps_mean."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(
        ["granularity", "period", "subclass", "count_sum", "duration_mean_min", "gbps_mean"]
    )
    for (key, sub), stats in sorted(
        table.rows.items(), key=lambda item: (item[0][0], item[0][1].value)
    ):
        writer.writerow(
            [
                table.granularity.value,
                key,
                sub.value,
                repr(stats.count_sum),
                repr(stats.duration_mean),
                repr(stats.gbps_mean),
            ]
        )
    return buf.getvalue()
