# -*- coding: utf-8 -*-
"""
Synthetic app store traces with planted ground truth.

The generator inverts the analyses: release schedules follow a chosen
mix of archetypes, every release moves the rating after a planted lag,
ranks drift around a per-app base rank, and the sign of the effect of a
Successive release depends on the app's rank.
"""
import hashlib
import json
import logging
from dataclasses import asdict, dataclass, field
from datetime import date, timedelta
from typing import (
    Any,
    Dict,
    List,
    Mapping,
    Optional,
    Sequence,
    Set,
    Tuple,
)

import numpy as np
from sklearn.metrics import adjusted_rand_score

from releasetrends.effects import EffectLabel
from releasetrends.exceptions import (
    ConfigError,
    DomainError,
    ProgrammingError,
    RunMismatch,
)
from releasetrends.intervals import NORMAL_MAX_DAYS, SUCCESSIVE_MAX_DAYS
from releasetrends.patterns import DEFAULT_WINDOW_DAYS, Clustering, WindowVector
from releasetrends.records import snapshot_to_record
from releasetrends.snapshots import (
    MAX_RATING,
    MIN_RATING,
    RANK_LIST_SIZE,
    AppSnapshot,
    IntervalCategory,
    ReleaseEvent,
)
from releasetrends.stats import Series

logger = logging.getLogger(__name__)

MIN_SPAN_DAYS = 30
DEFAULT_START_DAY = date(2016, 11, 25)
BREAKPOINT_TOLERANCE_DAYS = 2
RANK_TREND_COUPLING = 20.0
RANK_PERSISTENCE = 0.9

RATING_MODE_CUMULATIVE = "cumulative"
RATING_MODE_DAILY = "daily"
RATING_MODES = (RATING_MODE_CUMULATIVE, RATING_MODE_DAILY)

ARCHETYPE_INTERVAL_MIX = "interval_mix"
ARCHETYPE_SUCCESSIVE_PEAK = "successive_peak"
ARCHETYPE_ASCENDING = "ascending"
ARCHETYPE_EARLY_BURST = "early_burst"
ARCHETYPE_WEEKLY_SPIKE = "weekly_spike"
ARCHETYPE_NEVER = "never"
PATTERN_ARCHETYPES = (
    ARCHETYPE_SUCCESSIVE_PEAK,
    ARCHETYPE_ASCENDING,
    ARCHETYPE_EARLY_BURST,
    ARCHETYPE_WEEKLY_SPIKE,
)
ARCHETYPES = (ARCHETYPE_INTERVAL_MIX,) + PATTERN_ARCHETYPES + (ARCHETYPE_NEVER,)


def _profile(peaks: Mapping[int, float], floor: float = 0.03) -> Tuple[float, ...]:
    return tuple(peaks.get(day, floor) for day in range(1, DEFAULT_WINDOW_DAYS + 1))


# Probability of a release on each day after an anchor release.
ARCHETYPE_PROFILES: Dict[str, Tuple[float, ...]] = {
    ARCHETYPE_SUCCESSIVE_PEAK: _profile({1: 0.9, 2: 0.7, 3: 0.3}),
    ARCHETYPE_ASCENDING: _profile({1: 0.8, 3: 0.8, 6: 0.8, 10: 0.8}),
    ARCHETYPE_EARLY_BURST: _profile({2: 0.85, 4: 0.85, 6: 0.6}),
    ARCHETYPE_WEEKLY_SPIKE: _profile({7: 0.9}),
}

STORE_CATEGORIES = ("GAME", "MUSIC", "PHOTOGRAPHY", "SOCIAL", "TOOLS")

PURPOSE_BUGFIX = "bugfix"
PURPOSE_FEATURE = "feature"
PURPOSE_COSMETIC = "cosmetic"
PURPOSES = (PURPOSE_BUGFIX, PURPOSE_FEATURE, PURPOSE_COSMETIC)
PURPOSE_SIGNS = {PURPOSE_BUGFIX: 1.0, PURPOSE_FEATURE: 0.0, PURPOSE_COSMETIC: -1.0}

TEXT_TEMPLATES: Dict[str, Tuple[str, ...]] = {
    PURPOSE_BUGFIX: (
        "Fixed a crash when opening {thing}.",
        "Bug fixes for {thing} and stability improvements.",
        "Resolved an issue where {thing} failed to load.",
    ),
    PURPOSE_FEATURE: (
        "Added {feature} support.",
        "New: {feature} for all users.",
        "Introducing {feature}, plus faster {thing}.",
    ),
    PURPOSE_COSMETIC: (
        "Refreshed the {screen} design.",
        "Updated icons and colours on the {screen}.",
        "Polished the {screen} layout and animations.",
    ),
}
TEXT_FILLERS: Dict[str, Tuple[str, ...]] = {
    "thing": ("sync", "login", "photos", "playback", "search", "notifications"),
    "feature": ("dark mode", "offline maps", "widgets", "cloud backup", "sharing"),
    "screen": ("home screen", "settings", "menu", "toolbar", "profile page"),
}
INITIAL_RELEASE_TEXT = "Initial release."


def release_text(purpose: str, rng: np.random.Generator) -> str:
    templates = TEXT_TEMPLATES[purpose]
    template = templates[int(rng.integers(len(templates)))]
    fillers = {k: v[int(rng.integers(len(v)))] for k, v in TEXT_FILLERS.items()}
    return template.format(**fillers)


def matthew_probability(
    rank: int, strength: float, max_rank: int = RANK_LIST_SIZE
) -> float:
    """
    Probability that a Successive release is received positively: 0.5 plus
    up to half the strength for the top rank, falling linearly to 0.5 minus
    half the strength at max_rank.
    """
    r = min(max(rank, 1), max_rank)
    return 0.5 + 0.5 * strength * (1.0 - 2.0 * (r - 1) / (max_rank - 1))


@dataclass(frozen=True)
class GeneratorConfig:
    """
    Knobs of the synthetic trace generator.

    archetype_mix gives the fraction of apps following each release
    archetype. interval_mix gives the Successive, Normal and Sparse
    fractions of intervals drawn by "interval_mix" apps.

    In "cumulative" rating mode a release ramps the rating up or down by
    step_size over lag_days days, then leaves a trend of trend_slope per
    day for trend_days days. In "daily" mode it adds a single pulse of
    pulse_size lag_days days after the release.
    """

    n_apps: int = 50
    span_days: int = 105
    seed: int = 0
    start_day: date = DEFAULT_START_DAY
    archetype_mix: Mapping[str, float] = field(
        default_factory=lambda: {ARCHETYPE_INTERVAL_MIX: 0.9, ARCHETYPE_NEVER: 0.1}
    )
    interval_mix: Tuple[float, float, float] = (0.4, 0.35, 0.25)
    sparse_max_days: int = 40
    lag_days: int = 4
    rating_mode: str = RATING_MODE_CUMULATIVE
    sigma: float = 0.02
    step_size: float = 0.15
    trend_slope: float = 0.005
    trend_days: int = 10
    pulse_size: float = 0.3
    matthew_strength: float = 1.0
    positive_probability: float = 0.5
    purpose_effect: float = 0.1
    weekday_bias: float = 0.0
    preferred_weekday: int = 3
    crawl_gap_rate: float = 0.0
    max_rank: int = RANK_LIST_SIZE

    def __post_init__(self) -> None:
        self._validate()

    def _validate(self) -> None:  # noqa: C901
        if self.n_apps < 1:
            raise ConfigError(f"Number of apps must be >= 1: {self.n_apps}")
        if self.span_days < MIN_SPAN_DAYS:
            raise ConfigError(
                f"Span must be at least {MIN_SPAN_DAYS} days: {self.span_days}"
            )
        unknown = [a for a in self.archetype_mix if a not in ARCHETYPES]
        if unknown:
            raise ConfigError(f"Unknown archetype(s): {', '.join(unknown)}")
        self._validate_fractions("archetype mix", list(self.archetype_mix.values()))
        if len(self.interval_mix) != 3:
            raise ConfigError("Interval mix needs Successive, Normal and Sparse parts")
        self._validate_fractions("interval mix", list(self.interval_mix))
        if self.sparse_max_days <= NORMAL_MAX_DAYS:
            raise ConfigError(
                f"Sparse intervals must be able to exceed {NORMAL_MAX_DAYS} days"
            )
        if self.interval_mix[2] > 0 and self.sparse_max_days >= self.span_days:
            raise ConfigError(
                f"Sparse intervals up to {self.sparse_max_days} days don't fit in"
                f" a span of {self.span_days} days"
            )
        if not 0 <= self.lag_days < self.span_days // 2:
            raise ConfigError(f"Lag must be in [0, span / 2): {self.lag_days}")
        if self.rating_mode not in RATING_MODES:
            raise ConfigError(
                f"Rating mode {self.rating_mode!r} not one of:"
                f" {', '.join(RATING_MODES)}"
            )
        if self.sigma < 0:
            raise ConfigError(f"Rating noise must be >= 0: {self.sigma}")
        if self.step_size < 0 or self.trend_slope < 0 or self.pulse_size < 0:
            raise ConfigError("Effect sizes must be >= 0")
        if self.trend_days < 0:
            raise ConfigError(f"Trend days must be >= 0: {self.trend_days}")
        for name in ("matthew_strength", "positive_probability", "weekday_bias"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ConfigError(f"{name} must be in [0, 1]: {value}")
        if not 0.0 <= self.purpose_effect <= 0.5:
            raise ConfigError(
                f"purpose_effect must be in [0, 0.5]: {self.purpose_effect}"
            )
        if not 0 <= self.preferred_weekday <= 6:
            raise ConfigError(f"Weekday must be in [0, 6]: {self.preferred_weekday}")
        if not 0.0 <= self.crawl_gap_rate < 1.0:
            raise ConfigError(
                f"Crawl gap rate must be in [0, 1): {self.crawl_gap_rate}"
            )
        if self.max_rank < 2 or self.n_apps > self.max_rank:
            raise ConfigError(
                f"Can't spread {self.n_apps} apps over ranks 1..{self.max_rank}"
            )

    @staticmethod
    def _validate_fractions(name: str, fractions: Sequence[float]) -> None:
        if any(f < 0 for f in fractions):
            raise ConfigError(f"Fractions of the {name} must be >= 0")
        if abs(sum(fractions) - 1.0) > 1e-9:
            raise ConfigError(f"Fractions of the {name} sum to {sum(fractions)}, not 1")

    def to_dict(self) -> Dict[str, Any]:
        d = asdict(self)
        d["start_day"] = self.start_day.isoformat()
        d["archetype_mix"] = dict(sorted(self.archetype_mix.items()))
        d["interval_mix"] = list(self.interval_mix)
        return d

    @property
    def run_id(self) -> str:
        digest = hashlib.sha256(
            json.dumps(self.to_dict(), sort_keys=True).encode("utf-8")
        ).hexdigest()
        return f"run-{self.seed}-{digest[:12]}"


@dataclass(frozen=True)
class PlantedRelease:
    day: date
    version: str
    interval_days: Optional[int]
    rank: int
    purpose: str
    effect: EffectLabel


@dataclass(frozen=True)
class PlantedApp:
    app_id: str
    category: str
    archetype: str
    base_rank: int
    releases: Tuple[PlantedRelease, ...]
    turning_points: Tuple[date, ...]


@dataclass(frozen=True)
class GroundTruth:
    """
    Everything the generator planted, serialised as JSON next to the
    snapshot log it describes.
    """

    run_id: str
    lag_days: int
    rating_mode: str
    apps: Tuple[PlantedApp, ...]
    config: Mapping[str, Any] = field(default_factory=dict, compare=False)

    @property
    def releases(self) -> List[Tuple[str, PlantedRelease]]:
        return [(app.app_id, r) for app in self.apps for r in app.releases]

    @property
    def successive_share(self) -> Optional[float]:
        intervals = [r.interval_days for _, r in self.releases if r.interval_days]
        if not intervals:
            return None
        return sum(1 for i in intervals if i <= SUCCESSIVE_MAX_DAYS) / len(intervals)

    def archetype_of(self, app_id: str) -> str:
        for app in self.apps:
            if app.app_id == app_id:
                return app.archetype
        raise KeyError(app_id)

    def to_json(self) -> str:
        apps = []
        for app in self.apps:
            apps.append(
                {
                    "app_id": app.app_id,
                    "category": app.category,
                    "archetype": app.archetype,
                    "base_rank": app.base_rank,
                    "turning_points": [d.isoformat() for d in app.turning_points],
                    "releases": [
                        {
                            "day": r.day.isoformat(),
                            "version": r.version,
                            "interval_days": r.interval_days,
                            "rank": r.rank,
                            "purpose": r.purpose,
                            "effect": r.effect.value,
                        }
                        for r in app.releases
                    ],
                }
            )
        return json.dumps(
            {
                "run_id": self.run_id,
                "lag_days": self.lag_days,
                "rating_mode": self.rating_mode,
                "config": dict(self.config),
                "apps": apps,
            },
            indent=1,
            sort_keys=True,
        )

    @classmethod
    def from_json(cls, text: str) -> "GroundTruth":
        try:
            data = json.loads(text)
            apps = tuple(
                PlantedApp(
                    app_id=a["app_id"],
                    category=a["category"],
                    archetype=a["archetype"],
                    base_rank=a["base_rank"],
                    turning_points=tuple(
                        date.fromisoformat(d) for d in a["turning_points"]
                    ),
                    releases=tuple(
                        PlantedRelease(
                            day=date.fromisoformat(r["day"]),
                            version=r["version"],
                            interval_days=r["interval_days"],
                            rank=r["rank"],
                            purpose=r["purpose"],
                            effect=EffectLabel(r["effect"]),
                        )
                        for r in a["releases"]
                    ),
                )
                for a in data["apps"]
            )
            return cls(
                run_id=data["run_id"],
                lag_days=data["lag_days"],
                rating_mode=data["rating_mode"],
                apps=apps,
                config=data.get("config", {}),
            )
        except (KeyError, TypeError, ValueError) as e:
            raise ConfigError(f"Invalid ground truth file: {e}") from None


def _pick_interval(
    category: int, day: int, config: GeneratorConfig, rng: np.random.Generator
) -> int:
    low, high = [
        (1, SUCCESSIVE_MAX_DAYS),
        (SUCCESSIVE_MAX_DAYS + 1, NORMAL_MAX_DAYS),
        (NORMAL_MAX_DAYS + 1, config.sparse_max_days),
    ][category]
    candidates = list(range(low, high + 1))
    if config.weekday_bias > 0 and rng.random() < config.weekday_bias:
        preferred = [
            c
            for c in candidates
            if (config.start_day + timedelta(days=day + c)).weekday()
            == config.preferred_weekday
        ]
        if preferred:
            candidates = preferred
    return candidates[int(rng.integers(len(candidates)))]


def _cycle_gaps(archetype: str, rng: np.random.Generator) -> List[int]:
    """
    Gaps between consecutive releases for one cycle of a pattern archetype,
    ending with the quiet gap before the next cycle.
    """
    quiet = int(rng.integers(21, 36))
    if archetype == ARCHETYPE_SUCCESSIVE_PEAK:
        return [1] * int(rng.integers(1, 4)) + [quiet]
    if archetype == ARCHETYPE_ASCENDING:
        return [1, 2, 3, 4, quiet]
    if archetype == ARCHETYPE_EARLY_BURST:
        return [2] * int(rng.integers(2, 4)) + [quiet]
    if archetype == ARCHETYPE_WEEKLY_SPIKE:
        return [7]
    raise ProgrammingError(f"Archetype {archetype!r} has no release cycle")


def release_schedule(
    archetype: str, config: GeneratorConfig, rng: np.random.Generator
) -> List[int]:
    """
    Day offsets of an app's releases, all in [1, span_days).
    """
    if archetype == ARCHETYPE_NEVER:
        return []
    day = int(rng.integers(1, 11))
    days: List[int] = []
    gaps: List[int] = []
    while day < config.span_days:
        days.append(day)
        if not gaps:
            if archetype == ARCHETYPE_INTERVAL_MIX:
                category = int(rng.choice(3, p=config.interval_mix))
                gaps = [_pick_interval(category, day, config, rng)]
            else:
                gaps = _cycle_gaps(archetype, rng)
        day += gaps.pop(0)
    return days


def _effect_curve(
    release_day: int, sign: float, config: GeneratorConfig
) -> Tuple[np.ndarray, List[int]]:
    """
    Rating change caused by one release on every day of the span, and the
    days on which it changes the rating trend.
    """
    t = np.arange(config.span_days, dtype=np.float64)
    lag = config.lag_days
    curve = np.zeros(config.span_days)
    if config.rating_mode == RATING_MODE_DAILY:
        if release_day + lag < config.span_days:
            curve[release_day + lag] = sign * config.pulse_size
        return curve, []
    full = release_day + lag
    if lag > 0:
        ramp = np.clip((t - release_day) / lag, 0.0, 1.0)
    else:
        ramp = (t >= release_day).astype(np.float64)
    trend = np.clip(t - full, 0.0, config.trend_days) * config.trend_slope
    curve = sign * (config.step_size * ramp + trend)
    kinks = [release_day, full] if lag > 0 else [release_day]
    if config.trend_days > 0 and config.trend_slope > 0:
        kinks.append(full + config.trend_days)
    return curve, [k for k in kinks if k < config.span_days - 1]


def _simulate_app(
    index: int,
    archetype: str,
    base_rank: int,
    config: GeneratorConfig,
    rng: np.random.Generator,
) -> Tuple[List[AppSnapshot], PlantedApp]:
    app_id = f"com.example.app{index:04d}"
    category = STORE_CATEGORIES[int(rng.integers(len(STORE_CATEGORIES)))]
    schedule = release_schedule(archetype, config, rng)
    release_days = set(schedule)
    span = config.span_days
    base = float(rng.uniform(2.8, 4.0))
    noise = np.zeros(span)
    if config.sigma > 0:
        noise = rng.normal(0.0, config.sigma, size=span)
    shape = np.zeros(span)
    ratings = np.zeros(span)
    ranks = np.zeros(span, dtype=np.int64)
    offset = 0.0
    kinks: Set[int] = set()
    releases: List[PlantedRelease] = []
    version = "1.0.0"
    text = INITIAL_RELEASE_TEXT
    snapshots: List[AppSnapshot] = []
    previous_release: Optional[int] = None

    for day in range(span):
        if day in release_days:
            interval = None if previous_release is None else day - previous_release
            rank_before = int(ranks[day - 1]) if day > 0 else base_rank
            if interval is not None and interval <= SUCCESSIVE_MAX_DAYS:
                p = matthew_probability(
                    rank_before, config.matthew_strength, config.max_rank
                )
            else:
                p = config.positive_probability
            purpose = PURPOSES[int(rng.integers(len(PURPOSES)))]
            p = min(1.0, max(0.0, p + config.purpose_effect * PURPOSE_SIGNS[purpose]))
            positive = bool(rng.random() < p)
            curve, curve_kinks = _effect_curve(day, 1.0 if positive else -1.0, config)
            shape += curve
            kinks.update(curve_kinks)
            version = f"1.0.{len(releases) + 1}"
            text = release_text(purpose, rng)
            releases.append(
                PlantedRelease(
                    day=config.start_day + timedelta(days=day),
                    version=version,
                    interval_days=interval,
                    rank=rank_before,
                    purpose=purpose,
                    effect=EffectLabel.POSITIVE if positive else EffectLabel.NEGATIVE,
                )
            )
            previous_release = day

        ratings[day] = min(MAX_RATING, max(MIN_RATING, base + shape[day] + noise[day]))
        recent = ratings[day] - ratings[max(0, day - 7)]
        offset = (
            RANK_PERSISTENCE * offset
            + float(rng.normal(0.0, 1.0 + 0.05 * base_rank))
            - RANK_TREND_COUPLING * recent
        )
        ranks[day] = min(config.max_rank, max(1, int(round(base_rank + offset))))

        is_edge = day == 0 or day == span - 1
        if (
            not is_edge
            and day not in release_days
            and config.crawl_gap_rate > 0
            and rng.random() < config.crawl_gap_rate
        ):
            continue
        snapshots.append(
            AppSnapshot(
                app_id=app_id,
                category=category,
                day=config.start_day + timedelta(days=day),
                rating=float(ratings[day]),
                version=version,
                rank=int(ranks[day]),
                whats_new=text,
            )
        )

    planted = PlantedApp(
        app_id=app_id,
        category=category,
        archetype=archetype,
        base_rank=base_rank,
        releases=tuple(releases),
        turning_points=tuple(
            config.start_day + timedelta(days=k) for k in sorted(kinks)
        ),
    )
    return snapshots, planted


def generate(config: GeneratorConfig) -> Tuple[List[str], GroundTruth]:
    """
    Returns the lines of a snapshot log and the ground truth planted in it.

    Output depends only on the config. Each app is simulated with its own
    random stream spawned from the seed, and apps are emitted in app_id
    order.
    """
    master = np.random.default_rng(config.seed)
    names = sorted(config.archetype_mix)
    weights = np.array([config.archetype_mix[n] for n in names])
    choices = master.choice(len(names), config.n_apps, p=weights)
    archetypes = [names[int(i)] for i in choices]
    base_ranks = master.permutation(
        np.round(np.linspace(1, config.max_rank, config.n_apps)).astype(np.int64)
    )
    streams = [
        np.random.default_rng(s)
        for s in np.random.SeedSequence(config.seed).spawn(config.n_apps)
    ]

    lines: List[str] = []
    apps: List[PlantedApp] = []
    for index in range(config.n_apps):
        snapshots, planted = _simulate_app(
            index, archetypes[index], int(base_ranks[index]), config, streams[index]
        )
        lines.extend(snapshot_to_record(s) for s in snapshots)
        apps.append(planted)

    truth = GroundTruth(
        run_id=config.run_id,
        lag_days=config.lag_days,
        rating_mode=config.rating_mode,
        apps=tuple(apps),
        config=config.to_dict(),
    )
    logger.info(
        "Generated %d apps, %d snapshots, %d releases (%s)",
        len(apps),
        len(lines),
        len(truth.releases),
        truth.run_id,
    )
    return lines, truth


@dataclass(frozen=True, eq=False)
class PlantedSeries:
    series: Series
    breakpoints: Tuple[int, ...]
    slopes: Tuple[float, ...]


def planted_rating_series(
    n_breakpoints: int,
    sigma: float,
    span: int,
    rng: np.random.Generator,
    min_gap: int = 10,
    start_day: date = DEFAULT_START_DAY,
) -> PlantedSeries:
    """
    A piecewise linear series whose slope changes sign at every breakpoint,
    plus Gaussian noise. Breakpoints are indices of the vertices.
    """
    if n_breakpoints < 0 or sigma < 0:
        raise DomainError("Breakpoint count and noise must be >= 0")
    if span < (n_breakpoints + 1) * min_gap:
        raise DomainError(
            f"Span {span} too short for {n_breakpoints} breakpoints {min_gap} apart"
        )
    chunk = span / (n_breakpoints + 1)
    jitter = max(0.0, (chunk - min_gap) / 2)
    breakpoints = tuple(
        int(round(chunk * (k + 1) + rng.uniform(-jitter, jitter)))
        for k in range(n_breakpoints)
    )
    sign = 1.0 if rng.random() < 0.5 else -1.0
    slopes = []
    for _ in range(n_breakpoints + 1):
        slopes.append(sign * float(rng.uniform(0.01, 0.04)))
        sign = -sign
    values = np.zeros(span)
    values[0] = 3.0
    for t in range(1, span):
        segment = sum(1 for b in breakpoints if b < t)
        values[t] = values[t - 1] + slopes[segment]
    if sigma > 0:
        values = values + rng.normal(0.0, sigma, size=span)
    return PlantedSeries(
        series=Series(values=values, origin_day=start_day),
        breakpoints=breakpoints,
        slopes=tuple(slopes),
    )


def sample_window_vectors(
    archetype: str,
    n: int,
    rng: np.random.Generator,
    start_day: date = DEFAULT_START_DAY,
) -> List[WindowVector]:
    """
    Draws n window vectors whose bits follow the archetype's daily release
    probabilities.
    """
    if archetype not in ARCHETYPE_PROFILES:
        raise DomainError(f"Archetype {archetype!r} has no window profile")
    profile = np.array(ARCHETYPE_PROFILES[archetype])
    return [
        WindowVector(
            app_id=f"{archetype}-{i}",
            anchor_day=start_day + timedelta(days=i),
            bits=tuple(int(b) for b in rng.random(len(profile)) < profile),
        )
        for i in range(n)
    ]


@dataclass(frozen=True)
class EffectCase:
    rank: int
    interval_days: int
    slope: float
    text: str
    purpose: str
    label: EffectLabel

    @property
    def category(self) -> IntervalCategory:
        if self.interval_days <= SUCCESSIVE_MAX_DAYS:
            return IntervalCategory.SUCCESSIVE
        if self.interval_days <= NORMAL_MAX_DAYS:
            return IntervalCategory.NORMAL
        return IntervalCategory.SPARSE


def sample_effect_cases(
    n: int,
    seed: int = 0,
    matthew_strength: float = 1.0,
    slope_effect: float = 0.2,
    purpose_effect: float = 0.1,
    interval_mix: Tuple[float, float, float] = (1 / 3, 1 / 3, 1 / 3),
    max_rank: int = RANK_LIST_SIZE,
    sparse_max_days: int = 40,
) -> List[EffectCase]:
    """
    Releases drawn directly with a planted effect probability: the rank
    rule for Successive releases (0.5 otherwise), plus slope_effect when
    the prior trend is falling and minus it when rising, plus the purpose
    shift of the release text.
    """
    config = GeneratorConfig(
        interval_mix=interval_mix,
        sparse_max_days=sparse_max_days,
        span_days=max(MIN_SPAN_DAYS, sparse_max_days + 1),
        max_rank=max_rank,
        matthew_strength=matthew_strength,
        purpose_effect=purpose_effect,
    )
    rng = np.random.default_rng(seed)
    cases = []
    for _ in range(n):
        rank = int(rng.integers(1, max_rank + 1))
        category = int(rng.choice(3, p=interval_mix))
        interval = _pick_interval(category, 0, config, rng)
        slope = float(rng.normal(0.0, 0.01))
        purpose = PURPOSES[int(rng.integers(len(PURPOSES)))]
        if interval <= SUCCESSIVE_MAX_DAYS:
            p = matthew_probability(rank, matthew_strength, max_rank)
        else:
            p = 0.5
        p += slope_effect if slope < 0 else -slope_effect
        p += purpose_effect * PURPOSE_SIGNS[purpose]
        p = min(0.98, max(0.02, p))
        label = EffectLabel.POSITIVE if rng.random() < p else EffectLabel.NEGATIVE
        cases.append(
            EffectCase(
                rank=rank,
                interval_days=interval,
                slope=slope,
                text=release_text(purpose, rng),
                purpose=purpose,
                label=label,
            )
        )
    return cases


@dataclass(frozen=True)
class AnalysisOutputs:
    """
    Results of analysing a generated run, any of which may be missing.

    Breakpoints are keyed by app_id. Labels are keyed by (app_id, day).
    """

    run_id: str
    releases: Optional[Sequence[ReleaseEvent]] = None
    breakpoints: Optional[Mapping[str, Sequence[date]]] = None
    peak_lag: Optional[int] = None
    windows: Optional[Sequence[WindowVector]] = None
    clustering: Optional[Clustering] = None
    labels: Optional[Mapping[Tuple[str, date], EffectLabel]] = None


@dataclass(frozen=True)
class Scorecard:
    run_id: str
    release_recall: Optional[float] = None
    release_precision: Optional[float] = None
    breakpoint_recall: Optional[float] = None
    breakpoint_precision: Optional[float] = None
    planted_lag: Optional[int] = None
    detected_lag: Optional[int] = None
    cluster_ari: Optional[float] = None
    label_agreement: Optional[float] = None
    n_labels: int = 0
    successive_share: Optional[float] = None

    @property
    def lag_recovered(self) -> Optional[bool]:
        if self.detected_lag is None:
            return None
        return self.detected_lag == self.planted_lag


def _near(day: date, days: Sequence[date], tolerance: int) -> bool:
    return any(abs((day - d).days) <= tolerance for d in days)


def validate_against_truth(
    outputs: AnalysisOutputs,
    truth: GroundTruth,
    tolerance_days: int = BREAKPOINT_TOLERANCE_DAYS,
) -> Scorecard:
    """
    Scores how well the analyses recovered what the generator planted.
    """
    if outputs.run_id != truth.run_id:
        raise RunMismatch(
            f"Outputs of run {outputs.run_id!r} can't be scored against ground"
            f" truth of run {truth.run_id!r}"
        )
    scores: Dict[str, Any] = {
        "planted_lag": truth.lag_days,
        "successive_share": truth.successive_share,
    }

    if outputs.releases is not None:
        planted = {(app_id, r.day) for app_id, r in truth.releases}
        found = {(e.app_id, e.day) for e in outputs.releases}
        if planted:
            scores["release_recall"] = len(planted & found) / len(planted)
        if found:
            scores["release_precision"] = len(planted & found) / len(found)

    if outputs.breakpoints is not None:
        hits = total = correct = detected = 0
        for app in truth.apps:
            if not app.turning_points or app.app_id not in outputs.breakpoints:
                continue
            found_days = list(outputs.breakpoints[app.app_id])
            total += len(app.turning_points)
            hits += sum(
                _near(d, found_days, tolerance_days) for d in app.turning_points
            )
            detected += len(found_days)
            correct += sum(
                _near(d, app.turning_points, tolerance_days) for d in found_days
            )
        if total:
            scores["breakpoint_recall"] = hits / total
        if detected:
            scores["breakpoint_precision"] = correct / detected

    if outputs.peak_lag is not None:
        scores["detected_lag"] = outputs.peak_lag

    if outputs.windows is not None and outputs.clustering is not None:
        if len(outputs.windows) != len(outputs.clustering.labels):
            raise DomainError("Windows and cluster labels differ in length")
        archetypes = [truth.archetype_of(w.app_id) for w in outputs.windows]
        if archetypes:
            scores["cluster_ari"] = float(
                adjusted_rand_score(archetypes, list(outputs.clustering.labels))
            )

    if outputs.labels is not None:
        planted_effects = {(app_id, r.day): r.effect for app_id, r in truth.releases}
        compared = [
            label is planted_effects[key]
            for key, label in outputs.labels.items()
            if key in planted_effects
        ]
        scores["n_labels"] = len(compared)
        if compared:
            scores["label_agreement"] = sum(compared) / len(compared)

    return Scorecard(run_id=truth.run_id, **scores)
