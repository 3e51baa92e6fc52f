# -*- coding: utf-8 -*-
"""
Lagged correlation between release days and ratings.
"""
import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from releasetrends.exceptions import (
    DomainError,
    EmptyInput,
    SeriesTooShort,
    UndefinedCorrelation,
)
from releasetrends.intervals import derive_releases, rating_series
from releasetrends.snapshots import AppHistory
from releasetrends.stats import Series, moving_average, pearson_p, pearson_r

logger = logging.getLogger(__name__)

DEFAULT_MAX_LAG = 10
DEFAULT_SMOOTH_WINDOW = 3
DEFAULT_ALPHA = 0.01


@dataclass(frozen=True)
class LagCorrelation:
    """
    Correlation of releases with ratings lag_days later. The coefficient and
    p-value are None when either overlapped series is constant.
    """

    lag_days: int
    r: Optional[float]
    p: Optional[float]

    @property
    def defined(self) -> bool:
        return self.r is not None

    def is_significant(self, alpha: float) -> bool:
        return self.p is not None and self.p <= alpha


@dataclass(frozen=True)
class LagResult:
    app_id: str
    per_lag: Tuple[LagCorrelation, ...]
    best_lag: Optional[int]

    @property
    def max_lag(self) -> int:
        return self.per_lag[-1].lag_days


@dataclass(frozen=True)
class LagHistogram:
    """
    Fraction of apps significantly correlated at each lag, with the mean
    absolute coefficient of those apps.
    """

    per_lag: Tuple[Tuple[int, float], ...]
    mean_abs_r: Tuple[float, ...]
    n_apps: int

    @property
    def peak_lag(self) -> Optional[int]:
        """
        Lag with the largest fraction. Ties go to the larger mean absolute
        coefficient, then to the smaller lag. None when no app is significant
        at any lag.
        """
        best: Optional[Tuple[float, float, int]] = None
        for (lag, fraction), mean_r in zip(self.per_lag, self.mean_abs_r):
            if fraction <= 0:
                continue
            key = (fraction, mean_r, -lag)
            if best is None or key > best:
                best = key
        return None if best is None else -best[2]


def release_impulse(history: AppHistory) -> Series:
    """
    Daily series over the history's span with 1.0 on release days.
    """
    if not history.snapshots:
        raise SeriesTooShort(f"History of app {history.app_id!r} is empty")
    origin = history.snapshots[0].day
    values = np.zeros(history.span_days, dtype=np.float64)
    for event in derive_releases(history):
        values[(event.day - origin).days] = 1.0
    return Series(values=values, origin_day=origin)


def lag_correlations(
    updates: Series,
    ratings: Series,
    max_lag: int = DEFAULT_MAX_LAG,
    smooth_window: int = DEFAULT_SMOOTH_WINDOW,
    alpha: float = DEFAULT_ALPHA,
    app_id: str = "",
) -> LagResult:
    """
    Smooths both series, then correlates updates[0:n-lag] with
    ratings[lag:n] for every lag from 0 to max_lag. The p-value at each lag
    uses the overlapped length. The best lag is the one with the largest
    absolute coefficient among those with p <= alpha, ties going to the
    smaller lag.
    """
    n = len(updates)
    if len(ratings) != n:
        raise DomainError(f"Series lengths differ: {n} != {len(ratings)}")
    if max_lag < 0:
        raise DomainError(f"Maximum lag must be >= 0: {max_lag}")
    if n <= max_lag + 3:
        raise SeriesTooShort(
            f"Lag scan to {max_lag} days needs more than {max_lag + 3} days, got {n}"
        )
    u = moving_average(updates, smooth_window).values
    r = moving_average(ratings, smooth_window).values

    per_lag: List[LagCorrelation] = []
    best_lag: Optional[int] = None
    best_abs_r = -1.0
    for lag in range(max_lag + 1):
        overlap = n - lag
        try:
            coefficient = pearson_r(u[:overlap], r[lag:])
        except UndefinedCorrelation:
            per_lag.append(LagCorrelation(lag_days=lag, r=None, p=None))
            continue
        p = pearson_p(coefficient, overlap)
        per_lag.append(LagCorrelation(lag_days=lag, r=coefficient, p=p))
        if p <= alpha and abs(coefficient) > best_abs_r:
            best_lag = lag
            best_abs_r = abs(coefficient)
    return LagResult(app_id=app_id, per_lag=tuple(per_lag), best_lag=best_lag)


def scan_history(
    history: AppHistory,
    max_lag: int = DEFAULT_MAX_LAG,
    smooth_window: int = DEFAULT_SMOOTH_WINDOW,
    alpha: float = DEFAULT_ALPHA,
) -> LagResult:
    return lag_correlations(
        release_impulse(history),
        rating_series(history),
        max_lag=max_lag,
        smooth_window=smooth_window,
        alpha=alpha,
        app_id=history.app_id,
    )


def aggregate_lags(
    results: Sequence[LagResult], alpha: float = DEFAULT_ALPHA
) -> LagHistogram:
    if not results:
        raise EmptyInput("No lag results to aggregate")
    max_lag = results[0].max_lag
    for result in results:
        if result.max_lag != max_lag:
            raise DomainError(
                f"Lag results don't share a maximum lag: {result.max_lag} != {max_lag}"
            )
    per_lag: List[Tuple[int, float]] = []
    mean_abs_r: List[float] = []
    for lag in range(max_lag + 1):
        significant = [
            abs(result.per_lag[lag].r or 0.0)
            for result in results
            if result.per_lag[lag].is_significant(alpha)
        ]
        per_lag.append((lag, len(significant) / len(results)))
        mean_abs_r.append(float(np.mean(significant)) if significant else 0.0)
    histogram = LagHistogram(
        per_lag=tuple(per_lag), mean_abs_r=tuple(mean_abs_r), n_apps=len(results)
    )
    logger.info(
        "Aggregated lags of %d apps, peak lag %s", len(results), histogram.peak_lag
    )
    return histogram
