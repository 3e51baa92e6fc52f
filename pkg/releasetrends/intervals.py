# -*- coding: utf-8 -*-
"""
Release events, update intervals and their distributions.
"""
from bisect import bisect_right
from collections import Counter, defaultdict
from dataclasses import dataclass
from datetime import date
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from releasetrends.exceptions import DomainError, EmptyInput, SeriesTooShort
from releasetrends.snapshots import (
    AppHistory,
    IntervalCategory,
    IntervalProfile,
    ReleaseEvent,
)
from releasetrends.stats import Series

SUCCESSIVE_MAX_DAYS = 5
NORMAL_MAX_DAYS = 20
WEEKDAY_NAMES = ("Mon", "Tue", "Wed", "Thu", "Fri", "Sat", "Sun")


def categorize_interval(interval_days: int) -> IntervalCategory:
    """
    Successive is 1 to 5 days, Normal is 6 to 20 days and Sparse is 21 days
    or more.
    """
    if interval_days < 1:
        raise DomainError(f"Interval must be at least 1 day: {interval_days}")
    if interval_days <= SUCCESSIVE_MAX_DAYS:
        return IntervalCategory.SUCCESSIVE
    if interval_days <= NORMAL_MAX_DAYS:
        return IntervalCategory.NORMAL
    return IntervalCategory.SPARSE


def derive_releases(history: AppHistory) -> List[ReleaseEvent]:
    """
    Returns one event for each snapshot whose version differs from the
    version of the previous snapshot.

    The first observed version isn't a release. A change across a crawl gap
    is dated on the first day the new version is seen. The rank of an event
    is the rank observed just before the release, or on the release day
    when no earlier rank exists.
    """
    events: List[ReleaseEvent] = []
    previous_event_day: Optional[date] = None
    for previous, snapshot in zip(history.snapshots, history.snapshots[1:]):
        if snapshot.version == previous.version:
            continue
        interval: Optional[int] = None
        category: Optional[IntervalCategory] = None
        if previous_event_day is not None:
            interval = (snapshot.day - previous_event_day).days
            category = categorize_interval(interval)
        events.append(
            ReleaseEvent(
                app_id=history.app_id,
                day=snapshot.day,
                version_from=previous.version,
                version_to=snapshot.version,
                interval_days=interval,
                category=category,
                whats_new=snapshot.whats_new,
                rank=previous.rank if previous.rank is not None else snapshot.rank,
                app_category=history.category,
            )
        )
        previous_event_day = snapshot.day
    return events


def derive_all_releases(histories: Iterable[AppHistory]) -> List[ReleaseEvent]:
    events: List[ReleaseEvent] = []
    for history in histories:
        events.extend(derive_releases(history))
    return events


def interval_profile(events: Sequence[ReleaseEvent]) -> Optional[IntervalProfile]:
    """
    Mean and sample standard deviation of the intervals of one app's
    releases, or None when there are fewer than two intervals.
    """
    intervals = [e.interval_days for e in events if e.interval_days is not None]
    if len(intervals) < 2:
        return None
    values = np.asarray(intervals, dtype=np.float64)
    return IntervalProfile(
        app_id=events[0].app_id,
        mean_interval=float(values.mean()),
        std_interval=float(values.std(ddof=1)),
        n_releases=len(events),
    )


@dataclass(frozen=True)
class WeekdayDistribution:
    """
    Release counts per ISO week, each a 7-tuple of Monday to Sunday counts.
    """

    weeks: Dict[Tuple[int, int], Tuple[int, ...]]

    @property
    def total(self) -> int:
        return sum(sum(counts) for counts in self.weeks.values())

    @property
    def by_weekday(self) -> Tuple[int, ...]:
        totals = [0] * 7
        for counts in self.weeks.values():
            for i, count in enumerate(counts):
                totals[i] += count
        return tuple(totals)

    @property
    def weekday_share(self) -> float:
        """
        Fraction of releases made Monday to Friday.
        """
        total = self.total
        if total == 0:
            return 0.0
        return sum(self.by_weekday[:5]) / total


def weekday_distribution(histories: Iterable[AppHistory]) -> WeekdayDistribution:
    weeks: Dict[Tuple[int, int], List[int]] = defaultdict(lambda: [0] * 7)
    for event in derive_all_releases(histories):
        iso_year, iso_week, iso_weekday = event.day.isocalendar()[:3]
        weeks[(iso_year, iso_week)][iso_weekday - 1] += 1
    return WeekdayDistribution(
        weeks={week: tuple(weeks[week]) for week in sorted(weeks)}
    )


def interval_cdf(events: Iterable[ReleaseEvent]) -> List[Tuple[int, float]]:
    """
    Empirical CDF of update intervals, as (interval_days, fraction of
    intervals no longer than interval_days) for each distinct interval.
    """
    intervals = [e.interval_days for e in events if e.interval_days is not None]
    if not intervals:
        raise EmptyInput("Interval CDF needs at least one release with an interval")
    values, counts = np.unique(np.asarray(intervals), return_counts=True)
    cumulative = np.cumsum(counts)
    total = int(cumulative[-1])
    return [(int(v), int(c) / total) for v, c in zip(values, cumulative)]


def cdf_at(cdf: Sequence[Tuple[int, float]], interval_days: int) -> float:
    """
    Evaluates a CDF returned by interval_cdf() at any number of days.
    """
    index = bisect_right([v for v, _ in cdf], interval_days)
    return cdf[index - 1][1] if index > 0 else 0.0


@dataclass(frozen=True)
class UpdateCountDistribution:
    """
    Number of apps by how many releases they made.
    """

    apps_by_count: Dict[int, int]

    @property
    def n_apps(self) -> int:
        return sum(self.apps_by_count.values())

    @property
    def never_updated_share(self) -> float:
        if self.n_apps == 0:
            return 0.0
        return self.apps_by_count.get(0, 0) / self.n_apps


def update_count_distribution(
    histories: Iterable[AppHistory],
) -> UpdateCountDistribution:
    counts = Counter(len(derive_releases(h)) for h in histories)
    return UpdateCountDistribution(apps_by_count=dict(sorted(counts.items())))


def successive_app_share(histories: Iterable[AppHistory]) -> float:
    """
    Fraction of apps with at least one interval that have at least one
    Successive interval.
    """
    n_with_intervals = 0
    n_with_successive = 0
    for history in histories:
        categories = [e.category for e in derive_releases(history) if e.category]
        if categories:
            n_with_intervals += 1
            if IntervalCategory.SUCCESSIVE in categories:
                n_with_successive += 1
    if n_with_intervals == 0:
        raise EmptyInput("No app has a release interval")
    return n_with_successive / n_with_intervals


def category_successive_share(histories: Iterable[AppHistory]) -> Dict[str, float]:
    """
    Fraction of intervals that are Successive, per store category.
    """
    totals: Counter[str] = Counter()
    successive: Counter[str] = Counter()
    for history in histories:
        for event in derive_releases(history):
            if event.category is None:
                continue
            totals[history.category] += 1
            if event.category is IntervalCategory.SUCCESSIVE:
                successive[history.category] += 1
    return {c: successive[c] / totals[c] for c in sorted(totals)}


def category_shares(events: Iterable[ReleaseEvent]) -> Dict[IntervalCategory, float]:
    """
    Fraction of intervals in each interval category.
    """
    counts = Counter(e.category for e in events if e.category is not None)
    total = sum(counts.values())
    if total == 0:
        raise EmptyInput("No release has an interval")
    return {c: counts[c] / total for c in IntervalCategory}


def rating_series(history: AppHistory) -> Series:
    """
    Daily ratings from the first to the last snapshot. Days without a
    snapshot repeat the last observed rating.
    """
    if not history.snapshots:
        raise SeriesTooShort(f"History of app {history.app_id!r} is empty")
    origin = history.snapshots[0].day
    values = np.empty(history.span_days, dtype=np.float64)
    observed = np.zeros(history.span_days, dtype=bool)
    for snapshot in history.snapshots:
        index = (snapshot.day - origin).days
        values[index] = snapshot.rating
        observed[index] = True
    last_seen = np.maximum.accumulate(np.where(observed, np.arange(len(values)), 0))
    return Series(values=values[last_seen], origin_day=origin)
