# -*- coding: utf-8 -*-
from dataclasses import dataclass, field
from datetime import date
from enum import Enum
from typing import Optional, Tuple

from releasetrends.exceptions import DuplicateDay, ValidationError

MIN_RATING = 1.0
MAX_RATING = 5.0
RANK_LIST_SIZE = 540


class IntervalCategory(Enum):
    SUCCESSIVE = "Successive"
    NORMAL = "Normal"
    SPARSE = "Sparse"


@dataclass(frozen=True)
class AppSnapshot:
    """
    One day's observation of an app in the store's top list.
    """

    app_id: str
    category: str
    day: date
    rating: float
    version: str
    rank: Optional[int] = None
    whats_new: Optional[str] = None

    def __post_init__(self) -> None:
        if not MIN_RATING <= self.rating <= MAX_RATING:
            raise ValidationError(
                f"Rating {self.rating!r} of app {self.app_id!r} on {self.day}"
                f" not in [{MIN_RATING}, {MAX_RATING}]"
            )
        if self.rank is not None and self.rank < 1:
            raise ValidationError(
                f"Rank {self.rank!r} of app {self.app_id!r} on {self.day} is < 1"
            )


@dataclass(frozen=True)
class AppHistory:
    """
    The day-ordered snapshots of one app.
    """

    app_id: str
    category: str
    snapshots: Tuple[AppSnapshot, ...]

    def __post_init__(self) -> None:
        previous: Optional[AppSnapshot] = None
        for snapshot in self.snapshots:
            if snapshot.app_id != self.app_id:
                raise ValidationError(
                    f"Snapshot of app {snapshot.app_id!r} in history of"
                    f" {self.app_id!r}"
                )
            if previous is not None:
                if snapshot.day == previous.day:
                    raise DuplicateDay(
                        f"Duplicate day {snapshot.day} for app {self.app_id!r}"
                    )
                if snapshot.day < previous.day:
                    raise ValidationError(
                        f"Snapshots of app {self.app_id!r} not ordered by day"
                    )
            previous = snapshot

    @property
    def first_day(self) -> Optional[date]:
        return self.snapshots[0].day if self.snapshots else None

    @property
    def last_day(self) -> Optional[date]:
        return self.snapshots[-1].day if self.snapshots else None

    @property
    def span_days(self) -> int:
        """
        Number of calendar days from the first to the last snapshot, inclusive.
        """
        if not self.snapshots:
            return 0
        return (self.snapshots[-1].day - self.snapshots[0].day).days + 1

    def snapshot_on(self, day: date) -> Optional[AppSnapshot]:
        for snapshot in self.snapshots:
            if snapshot.day == day:
                return snapshot
        return None

    def last_snapshot_before(self, day: date) -> Optional[AppSnapshot]:
        """
        Returns the latest snapshot strictly before the given day.
        """
        found: Optional[AppSnapshot] = None
        for snapshot in self.snapshots:
            if snapshot.day >= day:
                break
            found = snapshot
        return found


@dataclass(frozen=True)
class ReleaseEvent:
    """
    A version change observed in an app's history.
    """

    app_id: str
    day: date
    version_from: str
    version_to: str
    interval_days: Optional[int] = None
    category: Optional[IntervalCategory] = None
    whats_new: Optional[str] = None
    rank: Optional[int] = None
    app_category: str = field(default="", compare=False)

    def __post_init__(self) -> None:
        if self.interval_days is not None and self.interval_days < 1:
            raise ValidationError(
                f"Interval {self.interval_days} of release of {self.app_id!r}"
                f" on {self.day} is < 1"
            )
        if (self.interval_days is None) != (self.category is None):
            raise ValidationError(
                "Interval category must be given exactly when interval is given"
            )

    @property
    def is_first(self) -> bool:
        return self.interval_days is None


@dataclass(frozen=True)
class IntervalProfile:
    """
    Mean and sample standard deviation of one app's release intervals.
    """

    app_id: str
    mean_interval: float
    std_interval: float
    n_releases: int
