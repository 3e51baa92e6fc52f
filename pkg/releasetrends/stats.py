# -*- coding: utf-8 -*-
"""
Statistical primitives shared by the analyses: smoothing, Pearson
correlation and its significance, the Mann-Whitney U test and simple
linear regression.
"""
from dataclasses import dataclass
from datetime import date, timedelta
from itertools import combinations
from typing import Iterable, NamedTuple, Sequence, Tuple, Union

import numpy as np
import numpy.typing as npt
from scipy import special
from scipy.stats import rankdata

from releasetrends.exceptions import (
    DegenerateDesign,
    DomainError,
    EmptyInput,
    SeriesTooShort,
    UndefinedCorrelation,
)

FloatArray = npt.NDArray[np.float64]

# Both samples at most this size are tested by exact enumeration.
EXACT_MANN_WHITNEY_MAX_SIZE = 8


@dataclass(frozen=True, eq=False)
class Series:
    """
    Daily real-valued series starting on origin_day, one value per day.

    The values are held as a read-only numpy array.
    """

    values: FloatArray
    origin_day: date

    def __post_init__(self) -> None:
        values = np.array(self.values, dtype=np.float64)
        if values.ndim != 1:
            raise DomainError("Series values must be one-dimensional")
        if len(values) < 1:
            raise SeriesTooShort("Series must have at least one value")
        if not np.all(np.isfinite(values)):
            raise DomainError("Series values must be finite")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return len(self.values)

    @property
    def last_day(self) -> date:
        return self.origin_day + timedelta(days=len(self.values) - 1)

    def day_at(self, index: int) -> date:
        return self.origin_day + timedelta(days=index)

    def index_of(self, day: date) -> int:
        return (day - self.origin_day).days

    def with_values(self, values: Union[FloatArray, Sequence[float]]) -> "Series":
        return Series(
            values=np.asarray(values, dtype=np.float64), origin_day=self.origin_day
        )


ArrayLike = Union[Series, FloatArray, Sequence[float]]


def as_array(x: ArrayLike) -> FloatArray:
    if isinstance(x, Series):
        return x.values
    return np.asarray(x, dtype=np.float64)


@dataclass(frozen=True)
class FitLine:
    """
    Ordinary least squares line fitted to n points.
    """

    slope: float
    intercept: float
    r_squared: float
    n: int

    def predict(self, x: Union[float, FloatArray]) -> Union[float, FloatArray]:
        return self.slope * x + self.intercept


class MannWhitneyResult(NamedTuple):
    u: float
    p: float


def moving_average(s: Series, window: int) -> Series:
    """
    Centered moving average. Near the edges each value is the mean of the
    part of the window that lies inside the series.
    """
    n = len(s)
    if window < 1 or window % 2 == 0:
        raise DomainError(f"Smoothing window must be an odd integer >= 1: {window}")
    if window > n:
        raise DomainError(f"Smoothing window {window} longer than series ({n})")
    if window == 1:
        return s
    kernel = np.ones(window)
    sums = np.convolve(s.values, kernel, mode="same")
    counts = np.convolve(np.ones(n), kernel, mode="same")
    return s.with_values(sums / counts)


def pearson_r(x: ArrayLike, y: ArrayLike) -> float:
    """
    Pearson product-moment correlation coefficient of two equal-length series.
    """
    xs = as_array(x)
    ys = as_array(y)
    if len(xs) != len(ys):
        raise DomainError(f"Series lengths differ: {len(xs)} != {len(ys)}")
    if len(xs) < 3:
        raise SeriesTooShort(f"Correlation needs at least 3 points, got {len(xs)}")
    if np.ptp(xs) == 0 or np.ptp(ys) == 0:
        raise UndefinedCorrelation("Correlation undefined for a constant series")
    xm = xs - xs.mean()
    ym = ys - ys.mean()
    r = float(np.dot(xm, ym) / np.sqrt(np.dot(xm, xm) * np.dot(ym, ym)))
    return min(1.0, max(-1.0, r))


def pearson_p(r: float, n: int) -> float:
    """
    Two-sided p-value of a Pearson coefficient r over n points.

    Uses the Student-t statistic with n - 2 degrees of freedom. Its two-sided
    tail equals the regularized incomplete beta function I(df/2, 1/2; 1 - r²).
    """
    if n < 4:
        raise DomainError(f"Correlation significance needs n >= 4, got {n}")
    if not abs(r) <= 1.0 + 1e-12:
        raise DomainError(f"Correlation coefficient out of range: {r}")
    r2 = min(1.0, r * r)
    if r2 >= 1.0:
        return 0.0
    df = n - 2
    p = float(special.betainc(df / 2.0, 0.5, 1.0 - r2))
    return min(1.0, max(0.0, p))


def mann_whitney_u(a: Sequence[float], b: Sequence[float]) -> MannWhitneyResult:
    """
    Two-sided Mann-Whitney U test. Returns the U statistic of sample a.

    Ties get midranks. When neither sample is larger than
    EXACT_MANN_WHITNEY_MAX_SIZE the p-value is computed by enumerating every
    assignment of the pooled midranks to sample a. Otherwise the normal
    approximation with tie and continuity corrections is used.
    """
    xa = np.asarray(a, dtype=np.float64)
    xb = np.asarray(b, dtype=np.float64)
    if len(xa) == 0 or len(xb) == 0:
        raise EmptyInput("Mann-Whitney U needs two nonempty samples")
    na, nb = len(xa), len(xb)
    ranks = rankdata(np.concatenate([xa, xb]), method="average")
    offset = na * (na + 1) / 2.0
    u = float(ranks[:na].sum() - offset)
    mean_u = na * nb / 2.0

    if na <= EXACT_MANN_WHITNEY_MAX_SIZE and nb <= EXACT_MANN_WHITNEY_MAX_SIZE:
        choices = np.array(list(combinations(range(na + nb), na)), dtype=np.intp)
        null_u = ranks[choices].sum(axis=1) - offset
        observed = abs(u - mean_u)
        extreme = np.count_nonzero(np.abs(null_u - mean_u) >= observed - 1e-9)
        p = extreme / len(null_u)
    else:
        n = na + nb
        _, tie_counts = np.unique(ranks, return_counts=True)
        tie_term = float(np.sum(tie_counts**3 - tie_counts)) / (n * (n - 1))
        variance = na * nb / 12.0 * ((n + 1) - tie_term)
        if variance <= 0:
            p = 1.0
        else:
            z = max(0.0, abs(u - mean_u) - 0.5) / np.sqrt(variance)
            p = float(2.0 * special.ndtr(-z))
    return MannWhitneyResult(u=u, p=min(1.0, float(p)))


def linear_fit(points: Iterable[Tuple[float, float]]) -> FitLine:
    """
    Least squares line through (x, y) points.

    When every y is equal the fit is exact and R² is 1.
    """
    pairs = np.asarray(list(points), dtype=np.float64)
    if pairs.ndim != 2 or len(pairs) < 2:
        raise SeriesTooShort("Linear fit needs at least 2 points")
    x, y = pairs[:, 0], pairs[:, 1]
    n = len(x)
    if np.ptp(x) == 0:
        raise DegenerateDesign("Linear fit needs at least 2 distinct x values")
    if np.ptp(y) == 0:
        return FitLine(slope=0.0, intercept=float(y[0]), r_squared=1.0, n=n)
    xm = x - x.mean()
    ym = y - y.mean()
    slope = float(np.dot(xm, ym) / np.dot(xm, xm))
    intercept = float(y.mean() - slope * x.mean())
    residuals = y - (slope * x + intercept)
    ss_res = float(np.dot(residuals, residuals))
    ss_tot = float(np.dot(ym, ym))
    r_squared = min(1.0, max(0.0, 1.0 - ss_res / ss_tot))
    return FitLine(slope=slope, intercept=intercept, r_squared=r_squared, n=n)
