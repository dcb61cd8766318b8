"""Aggregate reports: distributions, hourly profiles, quarterly trends,
operator box-plot summaries, congestion-pool trends, and the
signal-vs-throughput correlation.

Every aggregation is permutation-invariant (means use exact summation)
and no record is dropped silently: exclusions are counted on the report.
Serialization helpers emit plot-ready JSON objects and flat CSV rows with
deterministic ordering.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from datetime import datetime, timezone
from typing import Dict, List, Optional, Tuple

from .congestion import Pool
from .model import AnalysisConfig, TechnologyGroup, group_of


def _mean(values) -> float:
    return math.fsum(values) / len(values)


def quantile(values, q: float) -> float:
    """Inclusive linear-interpolation quantile over all data points.

    With sorted values x_0..x_{n-1}, the q-quantile sits at rank
    h = (n-1)*q and interpolates linearly between floor(h) and ceil(h).
    """
    if not 0 <= q <= 1:
        raise ValueError("quantile must be in [0, 1]")
    if not values:
        raise ValueError("quantile of empty data")
    ordered = sorted(values)
    h = (len(ordered) - 1) * q
    lo = math.floor(h)
    hi = math.ceil(h)
    return ordered[lo] + (h - lo) * (ordered[hi] - ordered[lo])


def pearson_r(xs, ys) -> Optional[float]:
    """Pearson correlation; None when either variable has zero variance."""
    n = len(xs)
    if n < 2:
        return None
    mx = _mean(xs)
    my = _mean(ys)
    sxx = math.fsum((x - mx) ** 2 for x in xs)
    syy = math.fsum((y - my) ** 2 for y in ys)
    if sxx == 0 or syy == 0:
        return None
    sxy = math.fsum((x - mx) * (y - my) for x, y in zip(xs, ys))
    return sxy / math.sqrt(sxx * syy)


def _local_dt(timestamp_ms: int, cfg: AnalysisConfig) -> datetime:
    local_ms = timestamp_ms + cfg.utc_offset_minutes * 60_000
    return datetime.fromtimestamp(local_ms / 1000.0, tz=timezone.utc)


def quarter_label(timestamp_ms: int, cfg: AnalysisConfig) -> str:
    dt = _local_dt(timestamp_ms, cfg)
    return f"{dt.year}-Q{(dt.month - 1) // 3 + 1}"


def month_label(timestamp_ms: int, cfg: AnalysisConfig) -> str:
    dt = _local_dt(timestamp_ms, cfg)
    return f"{dt.year}-{dt.month:02d}"


# ---------------------------------------------------------------------------
# Throughput histogram


@dataclass(frozen=True)
class Histogram:
    bin_width_kbps: float
    bins: Tuple[Tuple[float, int], ...]  # (lower edge, count), consecutive from 0
    total: int
    fraction_below_1mbps: Optional[float]

    def to_json_obj(self) -> dict:
        return {
            "bin_width_kbps": self.bin_width_kbps,
            "bins": [{"lower_edge_kbps": e, "count": c} for e, c in self.bins],
            "total": self.total,
            "fraction_below_1mbps": self.fraction_below_1mbps,
        }

    def csv_header(self) -> List[str]:
        return ["lower_edge_kbps", "count"]

    def csv_rows(self) -> List[List]:
        return [[e, c] for e, c in self.bins]


def throughput_histogram(records, cfg: AnalysisConfig) -> Histogram:
    width = cfg.histogram_bin_kbps
    counts: Dict[int, int] = {}
    below = 0
    for r in records:
        counts[int(r.download_kbps // width)] = counts.get(int(r.download_kbps // width), 0) + 1
        if r.download_kbps < 1000.0:
            below += 1
    total = len(records)
    if not counts:
        return Histogram(width, (), 0, None)
    top = max(counts)
    bins = tuple((k * width, counts.get(k, 0)) for k in range(top + 1))
    return Histogram(width, bins, total, below / total)


def merge_histograms(a: Histogram, b: Histogram) -> Histogram:
    """Exact associative merge of two histograms over disjoint record sets."""
    if a.bin_width_kbps != b.bin_width_kbps:
        raise ValueError("bin widths differ")
    counts: Dict[float, int] = dict(a.bins)
    for edge, count in b.bins:
        counts[edge] = counts.get(edge, 0) + count
    total = a.total + b.total
    below_a = a.fraction_below_1mbps * a.total if a.fraction_below_1mbps is not None else 0.0
    below_b = b.fraction_below_1mbps * b.total if b.fraction_below_1mbps is not None else 0.0
    if not counts:
        return Histogram(a.bin_width_kbps, (), 0, None)
    top = max(counts)
    width = a.bin_width_kbps
    bins = tuple((k * width, int(counts.get(k * width, 0))) for k in range(int(top // width) + 1))
    below = int(round(below_a + below_b))
    return Histogram(width, bins, total, below / total if total else None)


# ---------------------------------------------------------------------------
# Hourly profile


@dataclass(frozen=True)
class HourlyProfile:
    key: str  # base-station id or operator name
    hour_means: Tuple[Optional[float], ...]  # 24 entries, local hours
    busy_mean: Optional[float]
    offpeak_mean: Optional[float]
    dip_fraction: Optional[float]  # 1 - busy/offpeak

    def to_json_obj(self) -> dict:
        return {
            "key": self.key,
            "hour_means_kbps": list(self.hour_means),
            "busy_mean_kbps": self.busy_mean,
            "offpeak_mean_kbps": self.offpeak_mean,
            "dip_fraction": self.dip_fraction,
        }


def _hourly_csv(profiles: List[HourlyProfile]) -> Tuple[List[str], List[List]]:
    header = ["key", "hour", "mean_kbps"]
    rows = []
    for p in profiles:
        for hour, mean in enumerate(p.hour_means):
            if mean is not None:
                rows.append([p.key, hour, mean])
    return header, rows


def hourly_profile(records, key: str, cfg: AnalysisConfig) -> List[HourlyProfile]:
    """Per-key mean throughput by local hour; key is 'cell' or 'operator'.

    Records lacking the key field are skipped. dip_fraction is defined
    only when both the busy and off-peak means exist and off-peak is
    positive.
    """
    if key not in ("cell", "operator"):
        raise ValueError("key must be 'cell' or 'operator'")
    grouped: Dict[str, Dict[int, List[float]]] = {}
    for r in records:
        k = r.cell_id if key == "cell" else r.network_operator
        if k is None:
            continue
        grouped.setdefault(k, {}).setdefault(cfg.local_hour(r.timestamp), []).append(r.download_kbps)
    profiles = []
    for k in sorted(grouped):
        by_hour = grouped[k]
        hour_means = tuple(_mean(by_hour[h]) if h in by_hour else None for h in range(24))
        busy = [v for h, vs in by_hour.items() if cfg.is_busy_hour(h) for v in vs]
        offpeak = [v for h, vs in by_hour.items() if not cfg.is_busy_hour(h) for v in vs]
        busy_mean = _mean(busy) if busy else None
        offpeak_mean = _mean(offpeak) if offpeak else None
        dip = None
        if busy_mean is not None and offpeak_mean is not None and offpeak_mean > 0:
            dip = 1.0 - busy_mean / offpeak_mean
        profiles.append(HourlyProfile(k, hour_means, busy_mean, offpeak_mean, dip))
    return profiles


# ---------------------------------------------------------------------------
# Quarterly trend


@dataclass(frozen=True)
class TrendPoint:
    quarter: str
    mean_kbps: float
    max_kbps: float
    count: int


@dataclass(frozen=True)
class TrendSeries:
    technology_group: str
    region_tag: str
    network_type: str  # "wlan" or "cellular"
    points: Tuple[TrendPoint, ...]


@dataclass(frozen=True)
class TrendReport:
    series: Tuple[TrendSeries, ...]
    excluded_unknown: int

    def to_json_obj(self) -> dict:
        return {
            "series": [
                {
                    "technology_group": s.technology_group,
                    "region_tag": s.region_tag,
                    "network_type": s.network_type,
                    "points": [
                        {
                            "quarter": p.quarter,
                            "mean_kbps": p.mean_kbps,
                            "max_kbps": p.max_kbps,
                            "count": p.count,
                        }
                        for p in s.points
                    ],
                }
                for s in self.series
            ],
            "excluded_unknown": self.excluded_unknown,
        }

    def csv_header(self) -> List[str]:
        return ["technology_group", "region_tag", "network_type", "quarter", "mean_kbps", "max_kbps", "count"]

    def csv_rows(self) -> List[List]:
        return [
            [s.technology_group, s.region_tag, s.network_type, p.quarter, p.mean_kbps, p.max_kbps, p.count]
            for s in self.series
            for p in s.points
        ]


def quarterly_trend(records, cfg: AnalysisConfig) -> TrendReport:
    """Per (technology group, region, network type) quarterly mean/max/count."""
    grouped: Dict[Tuple[str, str, str], Dict[str, List[float]]] = {}
    excluded = 0
    for r in records:
        grp = group_of(r.technology)
        if grp is None:
            excluded += 1
            continue
        network_type = "wlan" if grp is TechnologyGroup.WLAN else "cellular"
        key = (grp.value, r.region_tag or "", network_type)
        grouped.setdefault(key, {}).setdefault(quarter_label(r.timestamp, cfg), []).append(
            r.download_kbps
        )
    series = []
    for key in sorted(grouped):
        points = tuple(
            TrendPoint(q, _mean(vs), max(vs), len(vs)) for q, vs in sorted(grouped[key].items())
        )
        series.append(TrendSeries(key[0], key[1], key[2], points))
    return TrendReport(tuple(series), excluded)


# ---------------------------------------------------------------------------
# Operator summary


@dataclass(frozen=True)
class OperatorSummary:
    operator: str
    count: int
    min_kbps: float
    q1_kbps: float
    median_kbps: float
    q3_kbps: float
    max_kbps: float
    mean_kbps: float

    def to_json_obj(self) -> dict:
        return {
            "operator": self.operator,
            "count": self.count,
            "min_kbps": self.min_kbps,
            "q1_kbps": self.q1_kbps,
            "median_kbps": self.median_kbps,
            "q3_kbps": self.q3_kbps,
            "max_kbps": self.max_kbps,
            "mean_kbps": self.mean_kbps,
        }


def operator_summary(records) -> List[OperatorSummary]:
    """Five-number summary plus mean of download speed per network operator."""
    grouped: Dict[str, List[float]] = {}
    for r in records:
        grouped.setdefault(r.network_operator, []).append(r.download_kbps)
    summaries = []
    for op in sorted(grouped):
        vs = grouped[op]
        summaries.append(
            OperatorSummary(
                operator=op,
                count=len(vs),
                min_kbps=min(vs),
                q1_kbps=quantile(vs, 0.25),
                median_kbps=quantile(vs, 0.5),
                q3_kbps=quantile(vs, 0.75),
                max_kbps=max(vs),
                mean_kbps=_mean(vs),
            )
        )
    return summaries


# ---------------------------------------------------------------------------
# Congestion pool trend


@dataclass(frozen=True)
class PoolPoint:
    month: str
    fraction_low: float
    fraction_medium: float
    fraction_high: float
    count: int


@dataclass(frozen=True)
class PoolTrend:
    points: Tuple[PoolPoint, ...]
    urban_medium_high: Tuple[Tuple[str, float, int], ...]  # (month, fraction, count)

    def to_json_obj(self) -> dict:
        return {
            "points": [
                {
                    "month": p.month,
                    "fraction_low": p.fraction_low,
                    "fraction_medium": p.fraction_medium,
                    "fraction_high": p.fraction_high,
                    "count": p.count,
                }
                for p in self.points
            ],
            "urban_medium_high": [
                {"month": m, "fraction": f, "count": c} for m, f, c in self.urban_medium_high
            ],
        }

    def csv_header(self) -> List[str]:
        return ["month", "fraction_low", "fraction_medium", "fraction_high", "count"]

    def csv_rows(self) -> List[List]:
        return [
            [p.month, p.fraction_low, p.fraction_medium, p.fraction_high, p.count]
            for p in self.points
        ]


def pool_trend(assessed, cfg: AnalysisConfig, urban_tag: str = "urban") -> PoolTrend:
    """Monthly pool fractions over (record, Pool) pairs.

    Also reports the combined MEDIUM+HIGH fraction per month for records
    whose region_tag equals urban_tag.
    """
    by_month: Dict[str, Dict[Pool, int]] = {}
    urban: Dict[str, List[int]] = {}  # month -> [medium_high, total]
    for record, pool in assessed:
        month = month_label(record.timestamp, cfg)
        counts = by_month.setdefault(month, {p: 0 for p in Pool})
        counts[pool] += 1
        if record.region_tag == urban_tag:
            acc = urban.setdefault(month, [0, 0])
            acc[0] += pool in (Pool.MEDIUM, Pool.HIGH)
            acc[1] += 1
    points = []
    for month in sorted(by_month):
        counts = by_month[month]
        total = sum(counts.values())
        points.append(
            PoolPoint(
                month=month,
                fraction_low=counts[Pool.LOW] / total,
                fraction_medium=counts[Pool.MEDIUM] / total,
                fraction_high=counts[Pool.HIGH] / total,
                count=total,
            )
        )
    urban_rows = tuple((m, urban[m][0] / urban[m][1], urban[m][1]) for m in sorted(urban))
    return PoolTrend(tuple(points), urban_rows)


# ---------------------------------------------------------------------------
# Signal vs throughput


@dataclass(frozen=True)
class SignalCorrelation:
    bins: Tuple[Tuple[float, float, int], ...]  # (lower edge dBm, mean kbps, count)
    pearson_r: Optional[float]
    excluded_missing_signal: int

    def to_json_obj(self) -> dict:
        return {
            "bins": [
                {"signal_lower_edge_dbm": e, "mean_kbps": m, "count": c} for e, m, c in self.bins
            ],
            "pearson_r": self.pearson_r,
            "excluded_missing_signal": self.excluded_missing_signal,
        }

    def csv_header(self) -> List[str]:
        return ["signal_lower_edge_dbm", "mean_kbps", "count"]

    def csv_rows(self) -> List[List]:
        return [[e, m, c] for e, m, c in self.bins]


def signal_correlation(records, cfg: AnalysisConfig) -> SignalCorrelation:
    """Binned mean throughput by signal strength plus overall Pearson r."""
    width = cfg.signal_bin_dbm
    binned: Dict[float, List[float]] = {}
    xs = []
    ys = []
    excluded = 0
    for r in records:
        if r.signal_dbm is None:
            excluded += 1
            continue
        binned.setdefault(math.floor(r.signal_dbm / width) * width, []).append(r.download_kbps)
        xs.append(r.signal_dbm)
        ys.append(r.download_kbps)
    bins = tuple((edge, _mean(binned[edge]), len(binned[edge])) for edge in sorted(binned))
    return SignalCorrelation(bins, pearson_r(xs, ys), excluded)
