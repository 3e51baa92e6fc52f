# -*- coding: utf-8 -*-
from datetime import date, timedelta
from typing import Optional, Sequence
from unittest import TestCase

import numpy as np

from releasetrends.datagen import GeneratorConfig, generate
from releasetrends.exceptions import DomainError, EmptyInput, SeriesTooShort
from releasetrends.intervals import (
    categorize_interval,
    category_shares,
    category_successive_share,
    cdf_at,
    derive_all_releases,
    derive_releases,
    interval_cdf,
    interval_profile,
    rating_series,
    successive_app_share,
    update_count_distribution,
    weekday_distribution,
)
from releasetrends.records import parse_snapshots
from releasetrends.snapshots import (
    AppHistory,
    AppSnapshot,
    IntervalCategory,
    ReleaseEvent,
)

# A Monday.
DAY_0 = date(2017, 1, 2)


def make_history(
    versions: Sequence[str],
    ratings: Optional[Sequence[float]] = None,
    days: Optional[Sequence[int]] = None,
    app_id: str = "app",
    category: str = "TOOLS",
    ranks: Optional[Sequence[Optional[int]]] = None,
    texts: Optional[Sequence[Optional[str]]] = None,
) -> AppHistory:
    """
    A history with one snapshot per given day offset from DAY_0.
    """
    n = len(versions)
    days = list(range(n)) if days is None else list(days)
    ratings = [4.0] * n if ratings is None else list(ratings)
    ranks = [10] * n if ranks is None else list(ranks)
    texts = [None] * n if texts is None else list(texts)
    return AppHistory(
        app_id=app_id,
        category=category,
        snapshots=tuple(
            AppSnapshot(
                app_id=app_id,
                category=category,
                day=DAY_0 + timedelta(days=d),
                rating=r,
                version=v,
                rank=k,
                whats_new=t,
            )
            for d, v, r, k, t in zip(days, versions, ratings, ranks, texts)
        ),
    )


def history_with_releases(
    release_days: Sequence[int],
    span: int,
    app_id: str = "app",
    category: str = "TOOLS",
) -> AppHistory:
    """
    A daily history over span days with a new version on each release day.
    """
    versions = []
    version = 0
    for day in range(span):
        if day in release_days:
            version += 1
        versions.append(f"1.{version}")
    return make_history(versions, app_id=app_id, category=category)


def make_event(interval: Optional[int], day: int = 0) -> ReleaseEvent:
    return ReleaseEvent(
        app_id="app",
        day=DAY_0 + timedelta(days=day),
        version_from="a",
        version_to="b",
        interval_days=interval,
        category=None if interval is None else categorize_interval(interval),
    )


class TestCategorizeInterval(TestCase):
    def test_examples(self) -> None:
        self.assertEqual(categorize_interval(3), IntervalCategory.SUCCESSIVE)
        self.assertEqual(categorize_interval(10), IntervalCategory.NORMAL)
        self.assertEqual(categorize_interval(30), IntervalCategory.SPARSE)

    def test_boundaries(self) -> None:
        self.assertEqual(categorize_interval(1), IntervalCategory.SUCCESSIVE)
        self.assertEqual(categorize_interval(5), IntervalCategory.SUCCESSIVE)
        self.assertEqual(categorize_interval(6), IntervalCategory.NORMAL)
        self.assertEqual(categorize_interval(20), IntervalCategory.NORMAL)
        self.assertEqual(categorize_interval(21), IntervalCategory.SPARSE)

    def test_categories_partition_positive_integers(self) -> None:
        seen = [categorize_interval(i) for i in range(1, 400)]
        for i in range(1, len(seen)):
            # Categories only ever move up.
            order = list(IntervalCategory)
            self.assertGreaterEqual(order.index(seen[i]), order.index(seen[i - 1]))

    def test_interval_below_one(self) -> None:
        with self.assertRaises(DomainError):
            categorize_interval(0)
        with self.assertRaises(DomainError):
            categorize_interval(-3)


class TestDeriveReleases(TestCase):
    def test_version_changes(self) -> None:
        events = derive_releases(make_history(["A", "A", "B", "B", "C"]))
        self.assertEqual(len(events), 2)
        first, second = events
        self.assertEqual(first.day, DAY_0 + timedelta(days=2))
        self.assertEqual((first.version_from, first.version_to), ("A", "B"))
        self.assertIsNone(first.interval_days)
        self.assertIsNone(first.category)
        self.assertTrue(first.is_first)
        self.assertEqual(second.day, DAY_0 + timedelta(days=4))
        self.assertEqual(second.interval_days, 2)
        self.assertEqual(second.category, IntervalCategory.SUCCESSIVE)

    def test_constant_version(self) -> None:
        self.assertEqual(derive_releases(make_history(["A"] * 10)), [])
        self.assertEqual(derive_releases(make_history([])), [])

    def test_planted_releases(self) -> None:
        history = history_with_releases([10, 14, 35], span=50)
        events = derive_releases(history)
        self.assertEqual([e.interval_days for e in events], [None, 4, 21])
        self.assertEqual(
            [e.category for e in events],
            [None, IntervalCategory.SUCCESSIVE, IntervalCategory.SPARSE],
        )

    def test_change_across_crawl_gap(self) -> None:
        history = make_history(["A", "A", "B"], days=[0, 1, 6])
        (event,) = derive_releases(history)
        self.assertEqual(event.day, DAY_0 + timedelta(days=6))

    def test_rank_and_text_of_release(self) -> None:
        history = make_history(
            ["A", "B", "C"],
            ranks=[7, 9, None],
            texts=[None, "Bug fixes", "New look"],
        )
        first, second = derive_releases(history)
        self.assertEqual(first.rank, 7)
        self.assertEqual(first.whats_new, "Bug fixes")
        self.assertEqual(second.rank, 9)
        self.assertEqual(second.app_category, "TOOLS")

        history = make_history(["A", "B"], ranks=[None, 12])
        (event,) = derive_releases(history)
        self.assertEqual(event.rank, 12)

    def test_intervals_sum_to_span_of_events(self) -> None:
        lines, _ = generate(GeneratorConfig(n_apps=20, seed=5))
        for history in parse_snapshots(lines):
            events = derive_releases(history)
            if len(events) < 2:
                continue
            total = sum(e.interval_days or 0 for e in events)
            self.assertEqual(total, (events[-1].day - events[0].day).days)


class TestIntervalProfile(TestCase):
    def test_equal_intervals(self) -> None:
        events = [make_event(None)] + [make_event(4) for _ in range(3)]
        profile = interval_profile(events)
        assert profile is not None
        self.assertEqual(profile.mean_interval, 4.0)
        self.assertEqual(profile.std_interval, 0.0)
        self.assertEqual(profile.n_releases, 4)

    def test_sample_standard_deviation(self) -> None:
        profile = interval_profile([make_event(None), make_event(2), make_event(6)])
        assert profile is not None
        self.assertEqual(profile.mean_interval, 4.0)
        self.assertAlmostEqual(profile.std_interval, 2.8284271247, places=9)

    def test_too_few_intervals(self) -> None:
        self.assertIsNone(interval_profile([make_event(None)]))
        self.assertIsNone(interval_profile([make_event(None), make_event(3)]))
        self.assertIsNone(interval_profile([]))


class TestWeekdayDistribution(TestCase):
    def test_single_monday_release(self) -> None:
        # Release on the second Monday.
        history = history_with_releases([7], span=10)
        distribution = weekday_distribution([history])
        self.assertEqual(distribution.total, 1)
        ((week, counts),) = distribution.weeks.items()
        self.assertEqual(week, (2017, 2))
        self.assertEqual(counts, (1, 0, 0, 0, 0, 0, 0))
        self.assertEqual(distribution.weekday_share, 1.0)

    def test_empty_input(self) -> None:
        distribution = weekday_distribution([])
        self.assertEqual(distribution.weeks, {})
        self.assertEqual(distribution.total, 0)
        self.assertEqual(distribution.weekday_share, 0.0)

    def test_total_equals_number_of_releases(self) -> None:
        histories = parse_snapshots(generate(GeneratorConfig(n_apps=30, seed=3))[0])
        distribution = weekday_distribution(histories)
        self.assertEqual(distribution.total, len(derive_all_releases(histories)))
        self.assertEqual(sum(distribution.by_weekday), distribution.total)

    def test_planted_weekday_share(self) -> None:
        # Unbiased releases fall on weekdays about 5/7 of the time, so a
        # bias of 0.3 towards Thursday makes the share 0.3 + 0.7 * 5/7 = 0.8.
        config = GeneratorConfig(
            n_apps=200,
            span_days=730,
            seed=8,
            archetype_mix={"interval_mix": 1.0},
            interval_mix=(0.0, 0.5, 0.5),
            weekday_bias=0.3,
        )
        histories = parse_snapshots(generate(config)[0])
        distribution = weekday_distribution(histories)
        self.assertGreater(distribution.total, 5000)
        self.assertAlmostEqual(distribution.weekday_share, 0.8, delta=0.03)


class TestIntervalCdf(TestCase):
    def test_examples(self) -> None:
        cdf = interval_cdf([make_event(i) for i in [1, 2, 3, 4]])
        self.assertEqual(cdf_at(cdf, 2), 0.5)
        self.assertEqual(cdf, [(1, 0.25), (2, 0.5), (3, 0.75), (4, 1.0)])

        cdf = interval_cdf([make_event(7) for _ in range(5)])
        self.assertEqual(cdf_at(cdf, 6), 0.0)
        self.assertEqual(cdf_at(cdf, 7), 1.0)
        self.assertEqual(cdf_at(cdf, 100), 1.0)

    def test_first_releases_are_ignored(self) -> None:
        cdf = interval_cdf([make_event(None), make_event(3)])
        self.assertEqual(cdf, [(3, 1.0)])

    def test_empty(self) -> None:
        with self.assertRaises(EmptyInput):
            interval_cdf([])
        with self.assertRaises(EmptyInput):
            interval_cdf([make_event(None)])

    def test_monotone_and_ends_at_one(self) -> None:
        rng = np.random.default_rng(0)
        events = [make_event(int(i)) for i in rng.integers(1, 60, size=500)]
        fractions = [f for _, f in interval_cdf(events)]
        self.assertEqual(fractions, sorted(fractions))
        self.assertEqual(fractions[-1], 1.0)

    def test_planted_category_mix(self) -> None:
        config = GeneratorConfig(
            n_apps=250,
            span_days=730,
            seed=4,
            archetype_mix={"interval_mix": 1.0},
            interval_mix=(0.4, 0.35, 0.25),
        )
        events = derive_all_releases(parse_snapshots(generate(config)[0]))
        self.assertGreater(sum(1 for e in events if e.interval_days), 10000)
        cdf = interval_cdf(events)
        self.assertAlmostEqual(cdf_at(cdf, 5), 0.40, delta=0.02)
        self.assertAlmostEqual(cdf_at(cdf, 20), 0.75, delta=0.02)
        shares = category_shares(events)
        self.assertAlmostEqual(shares[IntervalCategory.NORMAL], 0.35, delta=0.02)
        self.assertAlmostEqual(shares[IntervalCategory.SPARSE], 0.25, delta=0.02)


class TestDistributions(TestCase):
    def test_update_count_distribution(self) -> None:
        histories = [
            history_with_releases([], span=10, app_id="a"),
            history_with_releases([3], span=10, app_id="b"),
            history_with_releases([3, 6], span=10, app_id="c"),
            history_with_releases([2, 8], span=10, app_id="d"),
        ]
        distribution = update_count_distribution(histories)
        self.assertEqual(distribution.apps_by_count, {0: 1, 1: 1, 2: 2})
        self.assertEqual(distribution.n_apps, 4)
        self.assertEqual(distribution.never_updated_share, 0.25)
        self.assertEqual(update_count_distribution([]).never_updated_share, 0.0)

    def test_successive_app_share(self) -> None:
        histories = [
            # Intervals 3: has a Successive interval.
            history_with_releases([2, 5], span=20, app_id="a"),
            # Interval 10: doesn't.
            history_with_releases([2, 12], span=20, app_id="b"),
            # No interval: not counted.
            history_with_releases([2], span=20, app_id="c"),
        ]
        self.assertEqual(successive_app_share(histories), 0.5)
        with self.assertRaises(EmptyInput):
            successive_app_share(histories[2:])

    def test_category_successive_share(self) -> None:
        histories = [
            history_with_releases([2, 5, 15], span=20, app_id="a", category="GAMES"),
            history_with_releases([2, 4], span=20, app_id="b", category="TOOLS"),
        ]
        self.assertEqual(
            category_successive_share(histories), {"GAMES": 0.5, "TOOLS": 1.0}
        )

    def test_category_shares(self) -> None:
        events = [make_event(i) for i in [1, 2, 10, 30]] + [make_event(None)]
        shares = category_shares(events)
        self.assertEqual(shares[IntervalCategory.SUCCESSIVE], 0.5)
        self.assertEqual(shares[IntervalCategory.NORMAL], 0.25)
        self.assertEqual(shares[IntervalCategory.SPARSE], 0.25)
        with self.assertRaises(EmptyInput):
            category_shares([make_event(None)])


class TestRatingSeries(TestCase):
    def test_fills_crawl_gaps(self) -> None:
        history = make_history(
            ["A"] * 4, ratings=[4.0, 4.5, 3.0, 3.5], days=[0, 1, 4, 5]
        )
        series = rating_series(history)
        self.assertEqual(series.origin_day, DAY_0)
        self.assertEqual(list(series.values), [4.0, 4.5, 4.5, 4.5, 3.0, 3.5])

    def test_empty_history(self) -> None:
        with self.assertRaises(SeriesTooShort):
            rating_series(make_history([]))
