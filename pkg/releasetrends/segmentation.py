# -*- coding: utf-8 -*-
"""
Top-down piecewise linear segmentation of rating series, turning points
and their linkage to releases.
"""
import logging
from dataclasses import dataclass
from datetime import date
from enum import Enum
from statistics import median
from typing import Dict, List, Optional, Sequence, Set, Tuple

import numpy as np
import numpy.typing as npt

from releasetrends.exceptions import DomainError, SeriesTooShort
from releasetrends.intervals import rating_series
from releasetrends.snapshots import AppHistory, IntervalCategory, ReleaseEvent
from releasetrends.stats import FloatArray, Series, linear_fit

logger = logging.getLogger(__name__)

MIN_SEGMENT_POINTS = 3
FLAT_EPS = 1e-4
MIN_SLOPE_DELTA_FLOOR = 1e-4
MIN_SLOPE_DELTA_FRACTION = 0.1
DEFAULT_LAG_WINDOW = 4


class TrendTransition(Enum):
    REVERSED_INCREASING = "ReversedIncreasing"
    RESTRAINED_DESCENDING = "RestrainedDescending"
    AGGRAVATED_DESCENDING = "AggravatedDescending"
    REVERSED_DESCENDING = "ReversedDescending"
    RESTRAINED_INCREASING = "RestrainedIncreasing"
    ACCELERATED_INCREASING = "AcceleratedIncreasing"
    FLAT = "Flat"


DESCENDING_TRANSITIONS = (
    TrendTransition.REVERSED_INCREASING,
    TrendTransition.RESTRAINED_DESCENDING,
    TrendTransition.AGGRAVATED_DESCENDING,
)
INCREASING_TRANSITIONS = (
    TrendTransition.REVERSED_DESCENDING,
    TrendTransition.RESTRAINED_INCREASING,
    TrendTransition.ACCELERATED_INCREASING,
)


@dataclass(frozen=True)
class Segment:
    """
    Least squares line over the points start_index..end_index (inclusive)
    of a series. Slope is in rating units per day and the intercept is the
    fitted value at the series origin.
    """

    start_day: date
    end_day: date
    slope: float
    intercept: float
    sse: float
    start_index: int
    end_index: int

    def __post_init__(self) -> None:
        if not self.start_day < self.end_day:
            raise DomainError(f"Segment must span two days or more: {self}")
        if self.sse < 0:
            raise DomainError(f"Segment SSE is negative: {self.sse}")

    @property
    def n_points(self) -> int:
        return self.end_index - self.start_index + 1

    @property
    def rms(self) -> float:
        return float(np.sqrt(self.sse / self.n_points))


@dataclass(frozen=True)
class SegmentationResult:
    segments: Tuple[Segment, ...]
    threshold: float

    @property
    def total_sse(self) -> float:
        return sum(s.sse for s in self.segments)

    @property
    def breakpoints(self) -> List[date]:
        """
        First day of every segment except the first.
        """
        return [s.start_day for s in self.segments[1:]]

    def reconstruct(self) -> FloatArray:
        parts: List[FloatArray] = []
        for s in self.segments:
            x = np.arange(s.start_index, s.end_index + 1, dtype=np.float64)
            parts.append(s.slope * x + s.intercept)
        return np.concatenate(parts)

    def segment_at(self, day: date) -> Optional[Segment]:
        for s in self.segments:
            if s.start_day <= day <= s.end_day:
                return s
        return None


@dataclass(frozen=True)
class TurningPoint:
    day: date
    slope_before: float
    slope_after: float
    transition: TrendTransition


@dataclass(frozen=True)
class SignificantUpdate:
    """
    A release found within the lag window before a turning point.
    """

    release: ReleaseEvent
    turning_point: TurningPoint
    gap_days: int

    def __post_init__(self) -> None:
        if self.gap_days != (self.turning_point.day - self.release.day).days:
            raise DomainError("Gap doesn't match release and turning point days")
        if self.gap_days < 0:
            raise DomainError("Release is after the turning point")

    @property
    def slope_delta(self) -> float:
        return self.turning_point.slope_after - self.turning_point.slope_before


class _PrefixSums:
    """
    Running sums giving the least squares SSE of any range in constant time.
    """

    def __init__(self, y: FloatArray):
        x = np.arange(len(y), dtype=np.float64)
        # Centering y reduces cancellation in the variance terms.
        yc = y - y.mean()
        self.sx = np.concatenate([[0.0], np.cumsum(x)])
        self.sy = np.concatenate([[0.0], np.cumsum(yc)])
        self.sxx = np.concatenate([[0.0], np.cumsum(x * x)])
        self.sxy = np.concatenate([[0.0], np.cumsum(x * yc)])
        self.syy = np.concatenate([[0.0], np.cumsum(yc * yc)])

    def sse(self, lo: npt.ArrayLike, hi: npt.ArrayLike) -> FloatArray:
        """
        SSE of half-open ranges [lo, hi), elementwise.
        """
        lo_ = np.asarray(lo, dtype=np.intp)
        hi_ = np.asarray(hi, dtype=np.intp)
        n = (hi_ - lo_).astype(np.float64)
        sx = self.sx[hi_] - self.sx[lo_]
        sy = self.sy[hi_] - self.sy[lo_]
        vxx = self.sxx[hi_] - self.sxx[lo_] - sx * sx / n
        vxy = self.sxy[hi_] - self.sxy[lo_] - sx * sy / n
        vyy = self.syy[hi_] - self.syy[lo_] - sy * sy / n
        return np.maximum(vyy - vxy * vxy / vxx, 0.0)


def median_abs_change(values: FloatArray) -> float:
    return float(np.median(np.abs(np.diff(values))))


def fit_segments(
    ratings: Series, threshold: Optional[float] = None
) -> SegmentationResult:
    """
    Splits the series top-down. Each step splits a segment at the index that
    minimises the summed SSE of the two least squares sub-fits. A segment
    is not split further once its RMS residual is within the threshold, or
    when it is too short to give two segments of MIN_SEGMENT_POINTS points.

    The default threshold is the median absolute day-to-day change.
    """
    y = ratings.values
    n = len(y)
    if n < MIN_SEGMENT_POINTS:
        raise SeriesTooShort(
            f"Segmentation needs at least {MIN_SEGMENT_POINTS} points, got {n}"
        )
    if threshold is None:
        threshold = median_abs_change(y)
    elif threshold < 0:
        raise DomainError(f"Segmentation threshold must be >= 0: {threshold}")

    sums = _PrefixSums(y)
    ranges: List[Tuple[int, int]] = []
    pending = [(0, n)]
    while pending:
        lo, hi = pending.pop()
        length = hi - lo
        rms = float(np.sqrt(sums.sse(np.array([lo]), np.array([hi]))[0] / length))
        if rms <= threshold + 1e-12 or length < 2 * MIN_SEGMENT_POINTS:
            ranges.append((lo, hi))
            continue
        splits = np.arange(lo + MIN_SEGMENT_POINTS, hi - MIN_SEGMENT_POINTS + 1)
        costs = sums.sse(np.full_like(splits, lo), splits) + sums.sse(
            splits, np.full_like(splits, hi)
        )
        k = int(splits[int(np.argmin(costs))])
        pending.append((k, hi))
        pending.append((lo, k))

    segments = tuple(_fit_range(ratings, lo, hi) for lo, hi in sorted(ranges))
    return SegmentationResult(segments=segments, threshold=float(threshold))


def _fit_range(ratings: Series, lo: int, hi: int) -> Segment:
    x = np.arange(lo, hi, dtype=np.float64)
    y = ratings.values[lo:hi]
    line = linear_fit(zip(x, y))
    residuals = y - (line.slope * x + line.intercept)
    return Segment(
        start_day=ratings.day_at(lo),
        end_day=ratings.day_at(hi - 1),
        slope=line.slope,
        intercept=line.intercept,
        sse=float(np.dot(residuals, residuals)),
        start_index=lo,
        end_index=hi - 1,
    )


def default_min_slope_delta(seg: SegmentationResult) -> float:
    """
    A tenth of the median absolute segment slope, but at least
    MIN_SLOPE_DELTA_FLOOR.
    """
    typical = median(abs(s.slope) for s in seg.segments)
    return max(MIN_SLOPE_DELTA_FRACTION * typical, MIN_SLOPE_DELTA_FLOOR)


def classify_transition(
    slope_before: float, slope_after: float, eps: float = FLAT_EPS
) -> TrendTransition:
    """
    Names the change of trend at a turning point.

    A trend within eps of zero is flat. A flat trend before the point gives
    Flat. A flat trend after a descending or increasing one counts as
    restrained.
    """
    if eps < 0:
        raise DomainError(f"Flat dead-band must be >= 0: {eps}")
    if abs(slope_before) <= eps:
        return TrendTransition.FLAT
    if slope_before < 0:
        if slope_after > eps:
            return TrendTransition.REVERSED_INCREASING
        if slope_after >= -eps or slope_after > slope_before:
            return TrendTransition.RESTRAINED_DESCENDING
        return TrendTransition.AGGRAVATED_DESCENDING
    if slope_after < -eps:
        return TrendTransition.REVERSED_DESCENDING
    if slope_after <= eps or slope_after < slope_before:
        return TrendTransition.RESTRAINED_INCREASING
    return TrendTransition.ACCELERATED_INCREASING


def turning_points(
    seg: SegmentationResult,
    min_slope_delta: Optional[float] = None,
    eps: float = FLAT_EPS,
) -> List[TurningPoint]:
    """
    Returns the segment boundaries where the slope changes by at least
    min_slope_delta. A turning point is dated on the first day of the
    following segment.
    """
    if min_slope_delta is None:
        min_slope_delta = default_min_slope_delta(seg)
    points: List[TurningPoint] = []
    for before, after in zip(seg.segments, seg.segments[1:]):
        if abs(after.slope - before.slope) >= min_slope_delta:
            points.append(
                TurningPoint(
                    day=after.start_day,
                    slope_before=before.slope,
                    slope_after=after.slope,
                    transition=classify_transition(before.slope, after.slope, eps),
                )
            )
    return points


def link_significant_updates(
    releases: Sequence[ReleaseEvent],
    points: Sequence[TurningPoint],
    lag_window: int = DEFAULT_LAG_WINDOW,
) -> List[SignificantUpdate]:
    """
    Links turning points of one app to the nearest release at most
    lag_window days before them.

    Pairs are taken greedily by smallest gap, ties going to the earlier
    turning point, and each release and each turning point is used once.
    """
    if lag_window < 0:
        raise DomainError(f"Lag window must be >= 0: {lag_window}")
    candidates: List[Tuple[int, date, date, int, int]] = []
    for i, point in enumerate(points):
        for j, release in enumerate(releases):
            gap = (point.day - release.day).days
            if 0 <= gap <= lag_window:
                candidates.append((gap, point.day, release.day, i, j))
    candidates.sort()
    used_points: Set[int] = set()
    used_releases: Set[int] = set()
    links: List[SignificantUpdate] = []
    for gap, _, _, i, j in candidates:
        if i in used_points or j in used_releases:
            continue
        used_points.add(i)
        used_releases.add(j)
        links.append(
            SignificantUpdate(
                release=releases[j], turning_point=points[i], gap_days=gap
            )
        )
    links.sort(key=lambda link: link.turning_point.day)
    return links


@dataclass(frozen=True)
class AppTrend:
    app_id: str
    segmentation: SegmentationResult
    turning_points: Tuple[TurningPoint, ...]


def segment_history(
    history: AppHistory,
    threshold: Optional[float] = None,
    min_slope_delta: Optional[float] = None,
    eps: float = FLAT_EPS,
) -> AppTrend:
    seg = fit_segments(rating_series(history), threshold)
    points = turning_points(seg, min_slope_delta, eps)
    logger.debug(
        "App %s: %d segments, %d turning points",
        history.app_id,
        len(seg.segments),
        len(points),
    )
    return AppTrend(
        app_id=history.app_id, segmentation=seg, turning_points=tuple(points)
    )


@dataclass(frozen=True)
class TransitionSummary:
    """
    How often a kind of transition follows a significant update, and the
    median interval of those updates.
    """

    transition: TrendTransition
    count: int
    share: float
    median_interval: Optional[float]


def transition_summary(links: Sequence[SignificantUpdate]) -> List[TransitionSummary]:
    """
    Summarises significant updates by transition. The share of a transition
    is relative to the links with the same trend direction before the turning
    point, so the three descending shares sum to one.
    """
    by_kind: Dict[TrendTransition, List[SignificantUpdate]] = {
        t: [] for t in TrendTransition
    }
    for link in links:
        by_kind[link.turning_point.transition].append(link)
    n_descending = sum(len(by_kind[t]) for t in DESCENDING_TRANSITIONS)
    n_increasing = sum(len(by_kind[t]) for t in INCREASING_TRANSITIONS)
    summaries: List[TransitionSummary] = []
    for transition, group in by_kind.items():
        if transition in DESCENDING_TRANSITIONS:
            base = n_descending
        elif transition in INCREASING_TRANSITIONS:
            base = n_increasing
        else:
            base = len(group)
        intervals = [
            link.release.interval_days
            for link in group
            if link.release.interval_days is not None
        ]
        summaries.append(
            TransitionSummary(
                transition=transition,
                count=len(group),
                share=len(group) / base if base else 0.0,
                median_interval=float(median(intervals)) if intervals else None,
            )
        )
    return summaries


def positive_share(links: Sequence[SignificantUpdate]) -> float:
    """
    Fraction of significant updates after a descending trend that reversed
    or restrained the descent.
    """
    descending = [
        link
        for link in links
        if link.turning_point.transition in DESCENDING_TRANSITIONS
    ]
    if not descending:
        return 0.0
    positive = [
        link
        for link in descending
        if link.turning_point.transition is not TrendTransition.AGGRAVATED_DESCENDING
    ]
    return len(positive) / len(descending)


def links_by_category(
    links: Sequence[SignificantUpdate],
) -> Dict[IntervalCategory, List[SignificantUpdate]]:
    grouped: Dict[IntervalCategory, List[SignificantUpdate]] = {
        c: [] for c in IntervalCategory
    }
    for link in links:
        if link.release.category is not None:
            grouped[link.release.category].append(link)
    return grouped
