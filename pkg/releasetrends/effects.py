# -*- coding: utf-8 -*-
"""
Release effect model: labels, discrete features, multinomial naive Bayes,
cross-validation and the release interval optimizer.
"""
import logging
import warnings
from dataclasses import dataclass
from datetime import date, timedelta
from enum import Enum
from statistics import median
from typing import (
    Dict,
    Iterable,
    List,
    Optional,
    Sequence,
    TextIO,
    Tuple,
)

import numpy as np
from scipy.special import logsumexp
from sklearn.model_selection import StratifiedKFold
from typing_extensions import Literal

from releasetrends.exceptions import (
    DegenerateModelWarning,
    DimensionMismatch,
    DomainError,
    EmptyInput,
    FoldExcludedWarning,
    ModelFormatError,
    ModelVersionMismatch,
    SeriesTooShort,
)
from releasetrends.intervals import categorize_interval, derive_releases, rating_series
from releasetrends.records import decode_record, encode_record, format_float
from releasetrends.segmentation import (
    DEFAULT_LAG_WINDOW,
    FLAT_EPS,
    SegmentationResult,
    fit_segments,
)
from releasetrends.snapshots import AppHistory, IntervalCategory, ReleaseEvent
from releasetrends.stats import FloatArray, mann_whitney_u
from releasetrends.stopwords import STOPWORDS_VERSION
from releasetrends.text import (
    DEFAULT_MIN_DF,
    TermVector,
    Vocabulary,
    fit_vocabulary,
    preprocess,
    tfidf,
)

logger = logging.getLogger(__name__)

DEFAULT_LAPLACE_ALPHA = 1.0
DEFAULT_CV_FOLDS = 5
DEFAULT_T_MIN = 1
DEFAULT_T_MAX = 60
MODEL_FORMAT = "releasetrends-effect-model"
MODEL_FORMAT_VERSION = "1"

EffectLabelMode = Literal["rating", "slope"]

LABEL_MODE_RATING: EffectLabelMode = "rating"
LABEL_MODE_SLOPE: EffectLabelMode = "slope"
VALID_LABEL_MODES: List[EffectLabelMode] = [LABEL_MODE_RATING, LABEL_MODE_SLOPE]

# (low, high) inclusive; None means unbounded.
RANK_BUCKETS: Tuple[Tuple[int, Optional[int]], ...] = (
    (1, 10),
    (11, 50),
    (51, 150),
    (151, 300),
    (301, 540),
    (541, None),
)
INTERVAL_BUCKETS: Tuple[Tuple[int, Optional[int]], ...] = (
    (1, 1),
    (2, 2),
    (3, 3),
    (4, 4),
    (5, 5),
    (6, 10),
    (11, 20),
    (21, 40),
    (41, None),
)
SLOPE_BUCKETS = ("strong-", "weak-", "~0", "weak+", "strong+")


class EffectLabel(Enum):
    POSITIVE = "Positive"
    NEGATIVE = "Negative"


CLASSES = (EffectLabel.POSITIVE, EffectLabel.NEGATIVE)


class FeatureGroup(Enum):
    RANK = "rank"
    INTERVAL = "interval"
    SLOPE = "slope"
    INTERACTION = "interaction"
    TERMS = "terms"


FULL_GROUPS = (
    FeatureGroup.RANK,
    FeatureGroup.INTERVAL,
    FeatureGroup.SLOPE,
    FeatureGroup.INTERACTION,
    FeatureGroup.TERMS,
)
ABLATIONS: Dict[str, Tuple[FeatureGroup, ...]] = {
    "c_only": (FeatureGroup.TERMS,),
    "c_r_s": (FeatureGroup.RANK, FeatureGroup.SLOPE, FeatureGroup.TERMS),
    "full": FULL_GROUPS,
}


def bucket_label(bucket: Tuple[int, Optional[int]]) -> str:
    low, high = bucket
    if high is None:
        return f">{low - 1}"
    if low == high:
        return str(low)
    return f"{low}-{high}"


def bucket_index(value: int, buckets: Sequence[Tuple[int, Optional[int]]]) -> int:
    for i, (low, high) in enumerate(buckets):
        if value >= low and (high is None or value <= high):
            return i
    raise DomainError(f"Value {value} not covered by buckets")


@dataclass(frozen=True)
class EffectSample:
    """
    One release described by its rank, interval, prior rating trend and
    release text terms, with the observed effect.
    """

    rank: int
    interval_days: int
    slope: float
    terms: TermVector
    label: EffectLabel
    app_id: str = ""
    day: Optional[date] = None

    def __post_init__(self) -> None:
        if self.rank < 1:
            raise DomainError(f"Rank must be >= 1: {self.rank}")
        if self.interval_days < 1:
            raise DomainError(f"Interval must be >= 1: {self.interval_days}")

    @property
    def category(self) -> IntervalCategory:
        return categorize_interval(self.interval_days)


@dataclass(frozen=True)
class FeatureVector:
    """
    Sparse nonnegative feature values: sorted indices and their values.
    """

    indices: Tuple[int, ...]
    values: Tuple[float, ...]
    dimension: int

    def __post_init__(self) -> None:
        if len(self.indices) != len(self.values):
            raise DomainError("Feature indices and values differ in length")
        if any(v < 0 for v in self.values):
            raise DomainError("Feature values must be >= 0")
        if any(not 0 <= i < self.dimension for i in self.indices):
            raise DomainError("Feature index out of range")

    def to_array(self) -> FloatArray:
        dense = np.zeros(self.dimension)
        dense[list(self.indices)] = self.values
        return dense


@dataclass(frozen=True)
class FeatureSpace:
    """
    Layout of the effect model features.

    Groups appear in FULL_GROUPS order. Slopes within flat_eps of zero are
    "~0"; other slopes are weak up to slope_cut in magnitude and strong
    beyond it. The interval group holds the fine interval buckets only; the
    three interval categories appear in the interaction group, one-hot over
    rank bucket × interval category.
    """

    slope_cut: float
    vocabulary: Vocabulary
    groups: Tuple[FeatureGroup, ...] = FULL_GROUPS
    flat_eps: float = FLAT_EPS

    def __post_init__(self) -> None:
        if self.slope_cut < self.flat_eps:
            raise DomainError(
                f"Slope cut {self.slope_cut} below flat dead-band {self.flat_eps}"
            )
        ordered = tuple(g for g in FULL_GROUPS if g in self.groups)
        object.__setattr__(self, "groups", ordered)

    def group_size(self, group: FeatureGroup) -> int:
        if group is FeatureGroup.RANK:
            return len(RANK_BUCKETS)
        if group is FeatureGroup.INTERVAL:
            return len(INTERVAL_BUCKETS)
        if group is FeatureGroup.SLOPE:
            return len(SLOPE_BUCKETS)
        if group is FeatureGroup.INTERACTION:
            return len(RANK_BUCKETS) * len(IntervalCategory)
        return len(self.vocabulary)

    def offsets(self) -> Dict[FeatureGroup, int]:
        offsets = {}
        offset = 0
        for group in self.groups:
            offsets[group] = offset
            offset += self.group_size(group)
        return offsets

    @property
    def dimension(self) -> int:
        return sum(self.group_size(g) for g in self.groups)

    def feature_names(self) -> List[str]:
        names: List[str] = []
        categories = list(IntervalCategory)
        for group in self.groups:
            if group is FeatureGroup.RANK:
                names += [f"rank:{bucket_label(b)}" for b in RANK_BUCKETS]
            elif group is FeatureGroup.INTERVAL:
                names += [f"interval:{bucket_label(b)}" for b in INTERVAL_BUCKETS]
            elif group is FeatureGroup.SLOPE:
                names += [f"slope:{b}" for b in SLOPE_BUCKETS]
            elif group is FeatureGroup.INTERACTION:
                names += [
                    f"rank:{bucket_label(b)}*{c.value}"
                    for b in RANK_BUCKETS
                    for c in categories
                ]
            else:
                names += [f"term:{t}" for t in self.vocabulary.terms]
        return names

    def slope_bucket(self, slope: float) -> int:
        if abs(slope) <= self.flat_eps:
            return 2
        if slope < 0:
            return 0 if -slope > self.slope_cut else 1
        return 4 if slope > self.slope_cut else 3

    def featurize(
        self, rank: int, interval_days: int, slope: float, terms: TermVector
    ) -> FeatureVector:
        if rank < 1:
            raise DomainError(f"Rank must be >= 1: {rank}")
        if interval_days < 1:
            raise DomainError(f"Interval must be >= 1: {interval_days}")
        if terms.dimension != len(self.vocabulary):
            raise DimensionMismatch(
                f"Term vector has dimension {terms.dimension}, vocabulary has"
                f" {len(self.vocabulary)} terms"
            )
        offsets = self.offsets()
        rank_index = bucket_index(rank, RANK_BUCKETS)
        category = categorize_interval(interval_days)
        category_index = list(IntervalCategory).index(category)
        entries: List[Tuple[int, float]] = []
        for group in self.groups:
            offset = offsets[group]
            if group is FeatureGroup.RANK:
                entries.append((offset + rank_index, 1.0))
            elif group is FeatureGroup.INTERVAL:
                entries.append(
                    (offset + bucket_index(interval_days, INTERVAL_BUCKETS), 1.0)
                )
            elif group is FeatureGroup.SLOPE:
                entries.append((offset + self.slope_bucket(slope), 1.0))
            elif group is FeatureGroup.INTERACTION:
                index = rank_index * len(IntervalCategory) + category_index
                entries.append((offset + index, 1.0))
            else:
                entries += [(offset + i, w) for i, w in sorted(terms.weights.items())]
        return FeatureVector(
            indices=tuple(i for i, _ in entries),
            values=tuple(v for _, v in entries),
            dimension=self.dimension,
        )


def featurize(sample: EffectSample, buckets: FeatureSpace) -> FeatureVector:
    return buckets.featurize(
        sample.rank, sample.interval_days, sample.slope, sample.terms
    )


def fit_feature_space(
    samples: Sequence[EffectSample],
    vocabulary: Vocabulary,
    groups: Tuple[FeatureGroup, ...] = FULL_GROUPS,
    flat_eps: float = FLAT_EPS,
) -> FeatureSpace:
    """
    Sets the weak/strong slope cut to the median absolute slope of the
    samples.
    """
    if not samples:
        raise EmptyInput("No effect samples")
    cut = median(abs(s.slope) for s in samples)
    return FeatureSpace(
        slope_cut=max(cut, flat_eps),
        vocabulary=vocabulary,
        groups=groups,
        flat_eps=flat_eps,
    )


def _window_mean(history: AppHistory, first: date, last: date) -> Optional[float]:
    ratings = [s.rating for s in history.snapshots if first <= s.day <= last]
    if not ratings:
        return None
    return float(np.mean(ratings))


def prior_slope(seg: SegmentationResult, day: date) -> float:
    """
    Slope of the rating trend in effect on the day before the given day.
    """
    segment = seg.segment_at(day - timedelta(days=1)) or seg.segment_at(day)
    if segment is None:
        raise DomainError(f"Day {day} outside the segmented span")
    return segment.slope


def label_effect(
    history: AppHistory,
    release: ReleaseEvent,
    lag_window: int = DEFAULT_LAG_WINDOW,
    mode: EffectLabelMode = LABEL_MODE_RATING,
    segmentation: Optional[SegmentationResult] = None,
) -> Optional[EffectLabel]:
    """
    Positive when ratings rose after the release, Negative when they fell,
    None when there was no change or too little data.

    In rating mode the mean rating over (day, day + lag_window] is compared
    with the mean over [day - lag_window, day]; both windows must lie inside
    the history and hold at least one snapshot. In slope mode the trend slope
    lag_window days after the release is compared with the slope before it.
    """
    first, last = history.first_day, history.last_day
    if first is None or last is None:
        return None
    before_start = release.day - timedelta(days=lag_window)
    after_end = release.day + timedelta(days=lag_window)
    if before_start < first or after_end > last:
        return None
    if mode == LABEL_MODE_RATING:
        before = _window_mean(history, before_start, release.day)
        after = _window_mean(history, release.day + timedelta(days=1), after_end)
        if before is None or after is None:
            return None
        delta = after - before
    elif mode == LABEL_MODE_SLOPE:
        if segmentation is None:
            segmentation = fit_segments(rating_series(history))
        segment = segmentation.segment_at(after_end)
        if segment is None:
            return None
        delta = segment.slope - prior_slope(segmentation, release.day)
    else:
        raise DomainError(f"'{mode}' not one of: {', '.join(VALID_LABEL_MODES)}")
    if delta > 0:
        return EffectLabel.POSITIVE
    if delta < 0:
        return EffectLabel.NEGATIVE
    return None


def build_effect_samples(
    histories: Iterable[AppHistory],
    lag_window: int = DEFAULT_LAG_WINDOW,
    mode: EffectLabelMode = LABEL_MODE_RATING,
    threshold: Optional[float] = None,
    min_df: int = DEFAULT_MIN_DF,
) -> Tuple[List[EffectSample], Vocabulary]:
    """
    Labelled samples of every release with an interval and a known rank.
    Releases with an undefined label are left out.
    """
    pending: List[Tuple[ReleaseEvent, float, EffectLabel, List[str]]] = []
    for history in histories:
        try:
            seg = fit_segments(rating_series(history), threshold)
        except SeriesTooShort:
            continue
        for release in derive_releases(history):
            if release.interval_days is None or release.rank is None:
                continue
            label = label_effect(history, release, lag_window, mode, seg)
            if label is None:
                continue
            tokens = preprocess(release.whats_new)
            pending.append((release, prior_slope(seg, release.day), label, tokens))
    if not pending:
        raise EmptyInput("No release with a defined effect label")
    vocabulary = _fit_vocabulary_or_empty([p[3] for p in pending], min_df)
    samples = []
    for release, slope, label, tokens in pending:
        assert release.interval_days is not None and release.rank is not None
        samples.append(
            EffectSample(
                rank=release.rank,
                interval_days=release.interval_days,
                slope=slope,
                terms=tfidf(tokens, vocabulary),
                label=label,
                app_id=release.app_id,
                day=release.day,
            )
        )
    logger.info("Built %d effect samples, %d terms", len(samples), len(vocabulary))
    return samples, vocabulary


def _fit_vocabulary_or_empty(
    documents: Sequence[Sequence[str]], min_df: int
) -> Vocabulary:
    if not any(documents):
        return Vocabulary(terms=(), document_frequency=(), n_documents=len(documents))
    return fit_vocabulary(documents, min_df)


@dataclass(frozen=True, eq=False)
class MnbModel:
    """
    Multinomial naive Bayes over CLASSES. Row c of feature_log_prob holds
    the Laplace-smoothed log-probabilities of the features given class c.
    A class absent from training has log prior -inf.
    """

    class_log_prior: FloatArray
    feature_log_prob: FloatArray
    alpha: float
    degenerate: bool = False

    @property
    def dimension(self) -> int:
        return int(self.feature_log_prob.shape[1])


def mnb_train(
    samples: Sequence[Tuple[FeatureVector, EffectLabel]],
    alpha: float = DEFAULT_LAPLACE_ALPHA,
) -> MnbModel:
    """
    Fractional feature values count as fractional occurrences. Training on
    a single class gives a model flagged as degenerate.
    """
    if not samples:
        raise EmptyInput("No training samples")
    if alpha <= 0:
        raise DomainError(f"Laplace alpha must be > 0: {alpha}")
    dimension = samples[0][0].dimension
    counts = np.zeros((len(CLASSES), dimension))
    class_counts = np.zeros(len(CLASSES))
    for vector, label in samples:
        if vector.dimension != dimension:
            raise DimensionMismatch("Training vectors differ in dimension")
        c = CLASSES.index(label)
        class_counts[c] += 1
        counts[c, list(vector.indices)] += vector.values
    degenerate = bool(np.count_nonzero(class_counts) < len(CLASSES))
    if degenerate:
        warnings.warn(
            "Effect model trained on a single class", DegenerateModelWarning, 2
        )
    with np.errstate(divide="ignore"):
        class_log_prior = np.log(class_counts / class_counts.sum())
    smoothed = counts + alpha
    feature_log_prob = np.log(smoothed) - np.log(smoothed.sum(axis=1, keepdims=True))
    return MnbModel(
        class_log_prior=class_log_prior,
        feature_log_prob=feature_log_prob,
        alpha=alpha,
        degenerate=degenerate,
    )


def posterior(model: MnbModel, x: FeatureVector) -> FloatArray:
    """
    Class posterior probabilities in CLASSES order.
    """
    if x.dimension != model.dimension:
        raise DimensionMismatch(
            f"Feature vector has dimension {x.dimension}, model has {model.dimension}"
        )
    columns = model.feature_log_prob[:, list(x.indices)]
    joint = model.class_log_prior + columns @ np.asarray(x.values, dtype=np.float64)
    return np.exp(joint - logsumexp(joint))


def mnb_predict(model: MnbModel, x: FeatureVector) -> Tuple[EffectLabel, float]:
    """
    Returns the most probable label and the Positive posterior. Equal
    posteriors give Positive.
    """
    probabilities = posterior(model, x)
    positive = float(probabilities[0])
    if positive >= probabilities[1]:
        return EffectLabel.POSITIVE, positive
    return EffectLabel.NEGATIVE, positive


@dataclass(frozen=True)
class CvResult:
    """
    Mean accuracy over the folds that were used. Excluded folds have
    accuracy None.
    """

    accuracy: float
    fold_accuracies: Tuple[Optional[float], ...]

    @property
    def excluded_folds(self) -> List[int]:
        return [i for i, a in enumerate(self.fold_accuracies) if a is None]


def cross_validate(
    samples: Sequence[Tuple[FeatureVector, EffectLabel]],
    k: int = DEFAULT_CV_FOLDS,
    alpha: float = DEFAULT_LAPLACE_ALPHA,
    seed: int = 0,
) -> CvResult:
    """
    Stratified k-fold cross-validation with a seeded shuffle. A fold whose
    training part lacks a class is excluded with a FoldExcludedWarning.
    """
    if k < 2:
        raise DomainError(f"Cross-validation needs k >= 2: {k}")
    if len(samples) < k:
        raise DomainError(f"Cross-validation needs at least {k} samples")
    labels = np.array([CLASSES.index(label) for _, label in samples])
    if len(set(labels.tolist())) < len(CLASSES):
        raise DomainError("Cross-validation needs samples of both classes")

    splitter = StratifiedKFold(n_splits=k, shuffle=True, random_state=seed)
    with warnings.catch_warnings():
        # Few members in a class is expected for small corpora.
        warnings.filterwarnings("ignore", message="The least populated class")
        try:
            folds = list(splitter.split(np.zeros(len(samples)), labels))
        except ValueError as e:
            raise DomainError(str(e)) from None
    accuracies: List[Optional[float]] = []
    for number, (train, test) in enumerate(folds):
        if len(set(labels[train].tolist())) < len(CLASSES):
            warnings.warn(
                f"Fold {number} excluded: its training part lacks a class",
                FoldExcludedWarning,
                2,
            )
            accuracies.append(None)
            continue
        model = mnb_train([samples[i] for i in train], alpha)
        correct = sum(
            1 for i in test if mnb_predict(model, samples[i][0])[0] is samples[i][1]
        )
        accuracies.append(correct / len(test))
        logger.debug("Fold %d accuracy %.4f", number, accuracies[-1])
    used = [a for a in accuracies if a is not None]
    if not used:
        raise DomainError("Every cross-validation fold was excluded")
    return CvResult(accuracy=float(np.mean(used)), fold_accuracies=tuple(accuracies))


@dataclass(frozen=True, eq=False)
class EffectModel:
    """
    A trained naive Bayes model together with the feature space it needs to
    featurise new releases.
    """

    mnb: MnbModel
    space: FeatureSpace


def train_effect_model(
    samples: Sequence[EffectSample],
    space: FeatureSpace,
    alpha: float = DEFAULT_LAPLACE_ALPHA,
) -> EffectModel:
    training = [(featurize(s, space), s.label) for s in samples]
    return EffectModel(mnb=mnb_train(training, alpha), space=space)


@dataclass(frozen=True)
class Recommendation:
    t_best: int
    predicted_positive_probability: float
    probability_by_t: Tuple[Tuple[int, float], ...]
    t_min: int
    t_max: int


def optimize_interval(
    model: EffectModel,
    rank: int,
    slope: float,
    terms: TermVector,
    t_min: int = DEFAULT_T_MIN,
    t_max: int = DEFAULT_T_MAX,
) -> Recommendation:
    """
    Scans every interval from t_min to t_max and returns the one with the
    largest Positive posterior, the smallest such interval on ties.
    """
    if t_min < 1 or t_max < t_min:
        raise DomainError(f"Empty interval range [{t_min}, {t_max}]")
    curve: List[Tuple[int, float]] = []
    best_t = t_min
    best_p = -1.0
    for t in range(t_min, t_max + 1):
        x = model.space.featurize(rank, t, slope, terms)
        _, p = mnb_predict(model.mnb, x)
        curve.append((t, p))
        if p > best_p:
            best_t, best_p = t, p
    return Recommendation(
        t_best=best_t,
        predicted_positive_probability=best_p,
        probability_by_t=tuple(curve),
        t_min=t_min,
        t_max=t_max,
    )


def evaluate_ablations(
    samples: Sequence[EffectSample],
    vocabulary: Vocabulary,
    k: int = DEFAULT_CV_FOLDS,
    alpha: float = DEFAULT_LAPLACE_ALPHA,
    seed: int = 0,
    flat_eps: float = FLAT_EPS,
) -> Dict[str, CvResult]:
    """
    Cross-validated accuracy of the terms-only model, the model on terms,
    rank and slope, and the full model.
    """
    results = {}
    for name, groups in ABLATIONS.items():
        space = fit_feature_space(samples, vocabulary, groups, flat_eps)
        vectors = [(featurize(s, space), s.label) for s in samples]
        results[name] = cross_validate(vectors, k, alpha, seed)
        logger.info("Ablation %s: accuracy %.4f", name, results[name].accuracy)
    return results


@dataclass(frozen=True)
class GroupRankComparison:
    """
    Ranks of positive and negative updates within one interval category,
    compared with the Mann-Whitney U test.
    """

    category: IntervalCategory
    n_positive: int
    n_negative: int
    median_rank_positive: Optional[float]
    median_rank_negative: Optional[float]
    u: Optional[float]
    p: Optional[float]


def compare_group_ranks(samples: Sequence[EffectSample]) -> List[GroupRankComparison]:
    comparisons = []
    for category in IntervalCategory:
        positive = [
            float(s.rank)
            for s in samples
            if s.category is category and s.label is EffectLabel.POSITIVE
        ]
        negative = [
            float(s.rank)
            for s in samples
            if s.category is category and s.label is EffectLabel.NEGATIVE
        ]
        u: Optional[float] = None
        p: Optional[float] = None
        if positive and negative:
            u, p = mann_whitney_u(positive, negative)
        comparisons.append(
            GroupRankComparison(
                category=category,
                n_positive=len(positive),
                n_negative=len(negative),
                median_rank_positive=float(median(positive)) if positive else None,
                median_rank_negative=float(median(negative)) if negative else None,
                u=u,
                p=p,
            )
        )
    return comparisons


def save_model(model: EffectModel, f: TextIO) -> None:
    """
    Writes the model as lines of URL-encoded key/value records: a header,
    the feature space, the vocabulary, then one record per class.
    """
    space = model.space
    vocabulary = space.vocabulary
    lines = [
        encode_record(
            [
                ("format", MODEL_FORMAT),
                ("version", MODEL_FORMAT_VERSION),
                ("stopwords", STOPWORDS_VERSION),
            ]
        ),
        encode_record(
            [
                ("alpha", format_float(model.mnb.alpha)),
                ("degenerate", "1" if model.mnb.degenerate else "0"),
                ("flat_eps", format_float(space.flat_eps)),
                ("groups", ",".join(g.value for g in space.groups)),
                ("n_documents", str(vocabulary.n_documents)),
                ("slope_cut", format_float(space.slope_cut)),
            ]
        ),
    ]
    for term, df in zip(vocabulary.terms, vocabulary.document_frequency):
        lines.append(encode_record([("term", term), ("df", str(df))]))
    for c, label in enumerate(CLASSES):
        row = model.mnb.feature_log_prob[c]
        lines.append(
            encode_record(
                [
                    ("class", label.value),
                    ("log_prior", format_float(model.mnb.class_log_prior[c])),
                    ("log_likelihood", " ".join(map(format_float, row))),
                ]
            )
        )
    for line in lines:
        f.write(line)
        f.write("\n")


def load_model(f: TextIO) -> EffectModel:
    lines = [line for line in f.read().splitlines() if line.strip()]
    try:
        return _decode_model(lines)
    except ModelFormatError:
        raise
    except (ValueError, KeyError, IndexError) as e:
        raise ModelFormatError(f"Invalid effect model file: {e}") from None


def _decode_model(lines: List[str]) -> EffectModel:
    if len(lines) < 2 + len(CLASSES):
        raise ModelFormatError("Effect model file is truncated")
    header = decode_record(lines[0])
    if header.get("format") != MODEL_FORMAT:
        raise ModelFormatError(f"Not an effect model file: {lines[0]!r}")
    if header.get("version") != MODEL_FORMAT_VERSION:
        raise ModelVersionMismatch(
            f"Effect model format version {header.get('version')!r} isn't"
            f" supported (expected {MODEL_FORMAT_VERSION!r})"
        )
    if header.get("stopwords") != STOPWORDS_VERSION:
        raise ModelVersionMismatch(
            f"Effect model uses stop word list {header.get('stopwords')!r}"
            f" (expected {STOPWORDS_VERSION!r})"
        )
    settings = decode_record(lines[1])
    terms = [decode_record(line) for line in lines[2 : len(lines) - len(CLASSES)]]
    vocabulary = Vocabulary(
        terms=tuple(t["term"] for t in terms),
        document_frequency=tuple(int(t["df"]) for t in terms),
        n_documents=int(settings["n_documents"]),
    )
    groups = tuple(FeatureGroup(g) for g in settings["groups"].split(",") if g)
    space = FeatureSpace(
        slope_cut=float(settings["slope_cut"]),
        vocabulary=vocabulary,
        groups=groups,
        flat_eps=float(settings["flat_eps"]),
    )
    priors = np.zeros(len(CLASSES))
    likelihoods = np.zeros((len(CLASSES), space.dimension))
    for line in lines[len(lines) - len(CLASSES) :]:
        record = decode_record(line)
        c = CLASSES.index(EffectLabel(record["class"]))
        priors[c] = float(record["log_prior"])
        row = [float(v) for v in record["log_likelihood"].split()]
        if len(row) != space.dimension:
            raise ModelFormatError(
                f"Likelihood row has {len(row)} values, expected {space.dimension}"
            )
        likelihoods[c] = row
    mnb = MnbModel(
        class_log_prior=priors,
        feature_log_prob=likelihoods,
        alpha=float(settings["alpha"]),
        degenerate=settings["degenerate"] == "1",
    )
    return EffectModel(mnb=mnb, space=space)
