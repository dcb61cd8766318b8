"""Congestion classification of one throughput sample series.

Pipeline: spike filtering by moving-average comparison, non-overlapping
windowed mean/RAD statistics, slow-start exclusion, upper-bound window
selection, per-window MAPE against the upper bound, and LOW/MEDIUM/HIGH
pool assignment.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import List, Optional, Tuple

from .model import AnalysisConfig, SampleSeries

# Safety bound for the spike-filter fixed point; real series settle in a
# couple of passes.
_MAX_FILTER_PASSES = 1000


class Pool(Enum):
    LOW = "LOW"
    MEDIUM = "MEDIUM"
    HIGH = "HIGH"


@dataclass(frozen=True)
class WindowStats:
    window_index: int
    mean_kbps: float
    rad: float
    mape_pct: Optional[float] = None
    excluded_slow_start: bool = False


@dataclass(frozen=True)
class CongestionAssessment:
    windows: Tuple[WindowStats, ...]
    upper_bound_kbps: float
    upper_bound_window: int
    overall_mape_pct: float
    pool: Pool
    spikes_replaced: int


def _neighborhood_mean(values, i: int, half_width: int) -> Optional[float]:
    """Mean of the up-to-2*half_width neighbors of i (truncated at edges),
    excluding i itself."""
    lo = max(0, i - half_width)
    hi = min(len(values), i + half_width + 1)
    neighbors = [values[j] for j in range(lo, hi) if j != i]
    if not neighbors:
        return None
    return math.fsum(neighbors) / len(neighbors)


def _worst_outlier(values: List[float], cfg: AnalysisConfig) -> Optional[Tuple[int, float]]:
    """Index and replacement value of the sample deviating most from its
    neighborhood mean, or None when every sample is within bounds."""
    worst = None
    worst_ratio = cfg.spike_factor
    for i, v in enumerate(values):
        m = _neighborhood_mean(values, i, cfg.smoothing_half_width)
        if m is None or m <= 0:
            continue
        ratio = v / m if v > m else (math.inf if v == 0 else m / v)
        if ratio > worst_ratio:
            worst_ratio = ratio
            worst = (i, m)
    return worst


def filter_spikes(series: SampleSeries, cfg: AnalysisConfig) -> Tuple[SampleSeries, int]:
    """Replace reordering spikes with their neighborhood mean.

    A sample is a spike when it lies outside [m/factor, factor*m] of the
    self-excluded neighborhood mean m. Spikes are corrected one at a time,
    most extreme first, recomputing neighborhoods after each replacement,
    so a single spike never drags its clean neighbors over the threshold.
    The output has no remaining spikes, which makes the filter idempotent.
    Returns the filtered series and the count of samples replaced.
    """
    values = list(series.values)
    for _ in range(_MAX_FILTER_PASSES):
        hit = _worst_outlier(values, cfg)
        if hit is None:
            break
        values[hit[0]] = hit[1]
    replaced = sum(1 for a, b in zip(series.values, values) if a != b)
    return SampleSeries(interval_ms=series.interval_ms, values=tuple(values)), replaced


def window_stats(series: SampleSeries, cfg: AnalysisConfig) -> List[WindowStats]:
    """Mean and RAD per non-overlapping window; trailing remainder dropped."""
    w = cfg.window_size
    if len(series.values) < w:
        raise ValueError("insufficient samples")
    stats = []
    for k in range(len(series.values) // w):
        chunk = series.values[k * w : (k + 1) * w]
        mean = math.fsum(chunk) / w
        if mean == 0:
            rad = 0.0
        else:
            rad = (math.fsum(abs(x - mean) for x in chunk) / w) / mean
        stats.append(WindowStats(window_index=k, mean_kbps=mean, rad=rad))
    return stats


def select_upper_bound(windows: List[WindowStats], cfg: AnalysisConfig) -> Tuple[float, int]:
    """Pick the stable high-mean window used as the congestion-free rate.

    Among eligible (non-slow-start) windows with rad <= rad_stability_max,
    take the highest mean (ties: lowest rad, then lowest index). If none
    is stable enough, fall back to maximizing mean/(1+rad).
    """
    eligible = [w for w in windows if not w.excluded_slow_start]
    if not eligible:
        raise ValueError("no eligible window")
    stable = [w for w in eligible if w.rad <= cfg.rad_stability_max]
    if stable:
        best = min(stable, key=lambda w: (-w.mean_kbps, w.rad, w.window_index))
    else:
        best = min(eligible, key=lambda w: (-w.mean_kbps / (1.0 + w.rad), w.window_index))
    return best.mean_kbps, best.window_index


def window_mape(upper_bound_kbps: float, samples) -> float:
    """Mean absolute percentage deviation from the upper bound, in percent.

    The upper bound is the denominator (the expected value); a zero bound
    only occurs for all-zero series and yields 0.
    """
    if upper_bound_kbps == 0:
        return 0.0
    n = len(samples)
    return (100.0 / n) * math.fsum(abs(upper_bound_kbps - x) / upper_bound_kbps for x in samples)


def pool_of(overall_mape_pct: float, cfg: AnalysisConfig) -> Pool:
    if overall_mape_pct <= cfg.mape_low_max:
        return Pool.LOW
    if overall_mape_pct <= cfg.mape_medium_max:
        return Pool.MEDIUM
    return Pool.HIGH


def _mark_slow_start(windows: List[WindowStats], cfg: AnalysisConfig) -> List[WindowStats]:
    """Exclude the leading TCP slow-start ramp.

    The first slow_start_min_excluded windows are always excluded;
    exclusion then continues through consecutive leading windows whose
    mean is below activation_fraction of the maximum window mean.
    """
    max_mean = max(w.mean_kbps for w in windows)
    threshold = cfg.slow_start_activation_fraction * max_mean
    marked = []
    excluding = True
    for w in windows:
        if excluding:
            if w.window_index < cfg.slow_start_min_excluded or w.mean_kbps < threshold:
                marked.append(
                    WindowStats(w.window_index, w.mean_kbps, w.rad, excluded_slow_start=True)
                )
                continue
            excluding = False
        marked.append(w)
    return marked


def classify(series: SampleSeries, cfg: AnalysisConfig) -> CongestionAssessment:
    """Run the full congestion pipeline on one sample series."""
    if len(series.values) < 2 * cfg.window_size:
        raise ValueError("insufficient samples")
    filtered, spikes_replaced = filter_spikes(series, cfg)
    windows = _mark_slow_start(window_stats(filtered, cfg), cfg)
    upper_bound, ub_index = select_upper_bound(windows, cfg)

    w = cfg.window_size
    finished = []
    mapes = []
    for stats in windows:
        if stats.excluded_slow_start:
            finished.append(stats)
            continue
        chunk = filtered.values[stats.window_index * w : (stats.window_index + 1) * w]
        mape = window_mape(upper_bound, chunk)
        mapes.append(mape)
        finished.append(WindowStats(stats.window_index, stats.mean_kbps, stats.rad, mape_pct=mape))
    overall = math.fsum(mapes) / len(mapes)
    return CongestionAssessment(
        windows=tuple(finished),
        upper_bound_kbps=upper_bound,
        upper_bound_window=ub_index,
        overall_mape_pct=overall,
        pool=pool_of(overall, cfg),
        spikes_replaced=spikes_replaced,
    )
