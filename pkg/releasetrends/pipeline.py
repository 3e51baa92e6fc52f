# -*- coding: utf-8 -*-
"""
Pipeline stages. Every stage reads the artifacts of earlier stages from
the output directory, writes its own, and records itself in the run
manifest. Tables are tab-separated text whose first line names the table
and its format version.
"""
import logging
import os
import shutil
import warnings
from dataclasses import replace
from datetime import date
from enum import Enum
from typing import (
    Callable,
    Dict,
    Iterable,
    List,
    Optional,
    Sequence,
    Tuple,
)

from releasetrends.datagen import GeneratorConfig, generate
from releasetrends.effects import (
    FULL_GROUPS,
    EffectLabel,
    FeatureGroup,
    Recommendation,
    build_effect_samples,
    compare_group_ranks,
    evaluate_ablations,
    fit_feature_space,
    load_model,
    optimize_interval,
    save_model,
    train_effect_model,
)
from releasetrends.exceptions import (
    DomainError,
    EmptyInput,
    MalformedRecord,
    MissingTableWarning,
    ReleaseTrendsError,
    SeriesTooShort,
    StageDependencyError,
)
from releasetrends.intervals import (
    category_shares,
    category_successive_share,
    derive_all_releases,
    derive_releases,
    interval_cdf,
    interval_profile,
    successive_app_share,
    update_count_distribution,
    weekday_distribution,
)
from releasetrends.lags import LagResult, aggregate_lags, scan_history
from releasetrends.options import PipelineOptions, RunManifest
from releasetrends.patterns import (
    aggregate_patterns,
    export_embedding,
    history_windows,
    tsne_embed,
    ward_cluster,
)
from releasetrends.records import (
    format_float,
    read_snapshot_file,
    write_snapshot_file,
)
from releasetrends.segmentation import (
    SignificantUpdate,
    TrendTransition,
    TurningPoint,
    link_significant_updates,
    positive_share,
    segment_history,
    transition_summary,
)
from releasetrends.snapshots import AppHistory, IntervalCategory, ReleaseEvent
from releasetrends.stats import linear_fit
from releasetrends.text import (
    preprocess,
    term_importance_by_group,
    term_quadrants,
    tfidf,
)

logger = logging.getLogger(__name__)

TABLE_FORMAT_VERSION = "v1"
MANIFEST_FILE = "manifest.txt"
GENERATED_FILE = "generated.log"
TRUTH_FILE = "truth.json"
SNAPSHOTS_FILE = "snapshots.log"
MODEL_FILE = "model.txt"
REPORT_DIR = "report"

STAGE_DATAGEN = "datagen"
STAGE_INGEST = "ingest"
STAGE_INTERVALS = "intervals"
STAGE_SEGMENT = "segment"
STAGE_LAG = "lag"
STAGE_CLUSTER = "cluster"
STAGE_TERMS = "terms"
STAGE_TRAIN = "train"
STAGE_RECOMMEND = "recommend"
STAGE_REPORT = "report"

# Report table name, source file and producing stage.
REPORT_TABLES: Tuple[Tuple[str, str, str], ...] = (
    ("weekday", "weekday.tsv", STAGE_INTERVALS),
    ("interval_cdf", "interval_cdf.tsv", STAGE_INTERVALS),
    ("update_counts", "update_counts.tsv", STAGE_INTERVALS),
    ("interval_profiles", "interval_profiles.tsv", STAGE_INTERVALS),
    ("embedding", "embedding.tsv", STAGE_CLUSTER),
    ("patterns", "patterns.tsv", STAGE_CLUSTER),
    ("update_ranks", "update_ranks.tsv", STAGE_TRAIN),
    ("quadrants", "quadrants.tsv", STAGE_TERMS),
)

Cell = object


def _cell(value: Cell) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format_float(value)
    if isinstance(value, date):
        return value.isoformat()
    if isinstance(value, Enum):
        return str(value.value)
    text = str(value)
    if "\t" in text or "\n" in text:
        raise DomainError(f"Table cell contains a tab or newline: {text!r}")
    return text


def write_table(
    path: str, name: str, columns: Sequence[str], rows: Iterable[Sequence[Cell]]
) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(f"# releasetrends {name} {TABLE_FORMAT_VERSION}\n")
        f.write("\t".join(columns) + "\n")
        for row in rows:
            if len(row) != len(columns):
                raise DomainError(f"Row of table {name} has {len(row)} cells")
            f.write("\t".join(_cell(v) for v in row) + "\n")


def read_table(path: str, name: str) -> List[Dict[str, str]]:
    with open(path, encoding="utf-8") as f:
        lines = f.read().splitlines()
    expected = f"# releasetrends {name} {TABLE_FORMAT_VERSION}"
    if not lines or lines[0] != expected:
        raise MalformedRecord(f"{path} is not a {name} table", 1)
    if len(lines) < 2:
        raise MalformedRecord(f"{path} has no column line", 2)
    columns = lines[1].split("\t")
    rows = []
    for number, line in enumerate(lines[2:], start=3):
        cells = line.split("\t")
        if len(cells) != len(columns):
            raise MalformedRecord(
                f"{path}: {len(cells)} cells, expected {len(columns)}", number
            )
        rows.append(dict(zip(columns, cells)))
    return rows


def _require(out: str, filename: str, stage: str) -> str:
    path = os.path.join(out, filename)
    if not os.path.exists(path):
        raise StageDependencyError(path, stage)
    return path


def _manifest(out: str, options: PipelineOptions) -> RunManifest:
    path = os.path.join(out, MANIFEST_FILE)
    if os.path.exists(path):
        manifest = RunManifest.load(path)
        return RunManifest(
            options=options,
            inputs=manifest.inputs,
            stages=manifest.stages,
            run_id=manifest.run_id,
        )
    return RunManifest(options=options)


def _complete(out: str, manifest: RunManifest, stage: str) -> None:
    manifest.with_stage(stage).save(os.path.join(out, MANIFEST_FILE))
    logger.info("Stage %s complete: %s", stage, out)


def _histories(out: str) -> List[AppHistory]:
    return read_snapshot_file(_require(out, SNAPSHOTS_FILE, STAGE_INGEST))


def cmd_datagen(
    out: str, config: GeneratorConfig, options: Optional[PipelineOptions] = None
) -> str:
    """
    Writes a synthetic snapshot log and its ground truth. Returns the path
    of the log.
    """
    os.makedirs(out, exist_ok=True)
    lines, truth = generate(config)
    path = os.path.join(out, GENERATED_FILE)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write("".join(line + "\n" for line in lines))
    truth_path = os.path.join(out, TRUTH_FILE)
    with open(truth_path, "w", encoding="utf-8", newline="\n") as f:
        f.write(truth.to_json() + "\n")
    manifest = _manifest(out, options or PipelineOptions())
    manifest = manifest.with_input(STAGE_DATAGEN, TRUTH_FILE)
    manifest = replace(manifest, run_id=truth.run_id)
    _complete(out, manifest, STAGE_DATAGEN)
    return path


def cmd_ingest(
    out: str, snapshot_log: str, options: Optional[PipelineOptions] = None
) -> List[AppHistory]:
    """
    Parses a snapshot log and writes it back in canonical order, with a
    table of the apps it holds.
    """
    if not os.path.exists(snapshot_log):
        raise StageDependencyError(snapshot_log)
    histories = read_snapshot_file(snapshot_log)
    os.makedirs(out, exist_ok=True)
    write_snapshot_file(os.path.join(out, SNAPSHOTS_FILE), histories)
    write_table(
        os.path.join(out, "apps.tsv"),
        "apps",
        ["app_id", "category", "snapshots", "first_day", "last_day"],
        [
            (h.app_id, h.category, len(h.snapshots), h.first_day, h.last_day)
            for h in histories
        ],
    )
    logger.info("Ingested %d app histories from %s", len(histories), snapshot_log)
    manifest = _manifest(out, options or PipelineOptions())
    manifest = manifest.with_input(STAGE_INGEST, os.path.abspath(snapshot_log))
    _complete(out, manifest, STAGE_INGEST)
    return histories


def cmd_intervals(out: str, options: Optional[PipelineOptions] = None) -> None:
    """
    Release events, interval shares and the interval distribution tables.
    """
    options = options or PipelineOptions()
    histories = _histories(out)
    events = derive_all_releases(histories)

    write_table(
        os.path.join(out, "releases.tsv"),
        "releases",
        [
            "app_id",
            "day",
            "version_from",
            "version_to",
            "interval_days",
            "interval_category",
            "rank",
        ],
        [
            (
                e.app_id,
                e.day,
                e.version_from,
                e.version_to,
                e.interval_days,
                e.category,
                e.rank,
            )
            for e in events
        ],
    )
    weekdays = weekday_distribution(histories)
    write_table(
        os.path.join(out, "weekday.tsv"),
        "weekday",
        ["iso_year", "iso_week", "mon", "tue", "wed", "thu", "fri", "sat", "sun"],
        [(year, week) + counts for (year, week), counts in weekdays.weeks.items()],
    )
    counts = update_count_distribution(histories)
    write_table(
        os.path.join(out, "update_counts.tsv"),
        "update_counts",
        ["releases", "apps"],
        list(counts.apps_by_count.items()),
    )

    cdf_rows: List[Tuple[int, float]] = []
    summary: List[Tuple[str, Cell]] = [
        ("releases", len(events)),
        ("never_updated_share", counts.never_updated_share),
        ("weekday_share", weekdays.weekday_share),
    ]
    try:
        cdf_rows = interval_cdf(events)
    except EmptyInput:
        logger.warning("No release intervals in %s", out)
    else:
        shares = category_shares(events)
        summary += [(f"share_{c.value.lower()}", shares[c]) for c in IntervalCategory]
        summary.append(("successive_app_share", successive_app_share(histories)))
    write_table(
        os.path.join(out, "interval_cdf.tsv"),
        "interval_cdf",
        ["interval_days", "cumulative_fraction"],
        cdf_rows,
    )
    write_table(
        os.path.join(out, "interval_summary.tsv"),
        "interval_summary",
        ["key", "value"],
        summary,
    )
    write_table(
        os.path.join(out, "category_successive.tsv"),
        "category_successive",
        ["category", "successive_share"],
        list(category_successive_share(histories).items()),
    )

    profiles = []
    for history in histories:
        profile = interval_profile(derive_releases(history))
        if profile is not None:
            profiles.append(profile)
    write_table(
        os.path.join(out, "interval_profiles.tsv"),
        "interval_profiles",
        ["app_id", "mean_interval", "std_interval", "releases"],
        [(p.app_id, p.mean_interval, p.std_interval, p.n_releases) for p in profiles],
    )
    fit_rows: List[Tuple[Cell, ...]] = []
    try:
        line = linear_fit((p.mean_interval, p.std_interval) for p in profiles)
        fit_rows.append((line.slope, line.intercept, line.r_squared, line.n))
    except DomainError:
        logger.warning("Too few distinct interval profiles to fit a line")
    write_table(
        os.path.join(out, "interval_fit.tsv"),
        "interval_fit",
        ["slope", "intercept", "r_squared", "n"],
        fit_rows,
    )
    _complete(out, _manifest(out, options), STAGE_INTERVALS)


def cmd_segment(
    out: str, options: Optional[PipelineOptions] = None
) -> List[SignificantUpdate]:
    """
    Trend segments, turning points and the releases linked to them.
    """
    options = options or PipelineOptions()
    histories = _histories(out)
    segment_rows: List[Tuple[Cell, ...]] = []
    point_rows: List[Tuple[Cell, ...]] = []
    links: List[SignificantUpdate] = []
    for history in histories:
        try:
            trend = segment_history(
                history,
                threshold=options.SegmentThreshold,
                min_slope_delta=options.MinSlopeDelta,
                eps=options.FlatEps,
            )
        except SeriesTooShort:
            logger.debug("History of %s too short to segment", history.app_id)
            continue
        for s in trend.segmentation.segments:
            segment_rows.append(
                (history.app_id, s.start_day, s.end_day, s.slope, s.intercept, s.sse)
            )
        for p in trend.turning_points:
            point_rows.append(
                (history.app_id, p.day, p.slope_before, p.slope_after, p.transition)
            )
        links += link_significant_updates(
            derive_releases(history), trend.turning_points, options.LagWindow
        )

    write_table(
        os.path.join(out, "segments.tsv"),
        "segments",
        ["app_id", "start_day", "end_day", "slope", "intercept", "sse"],
        segment_rows,
    )
    write_table(
        os.path.join(out, "turning_points.tsv"),
        "turning_points",
        ["app_id", "day", "slope_before", "slope_after", "transition"],
        point_rows,
    )
    write_table(
        os.path.join(out, "significant_updates.tsv"),
        "significant_updates",
        [
            "app_id",
            "release_day",
            "turning_point_day",
            "gap_days",
            "interval_days",
            "interval_category",
            "slope_before",
            "slope_after",
            "transition",
        ],
        [
            (
                link.release.app_id,
                link.release.day,
                link.turning_point.day,
                link.gap_days,
                link.release.interval_days,
                link.release.category,
                link.turning_point.slope_before,
                link.turning_point.slope_after,
                link.turning_point.transition,
            )
            for link in links
        ],
    )
    write_table(
        os.path.join(out, "transitions.tsv"),
        "transitions",
        ["transition", "count", "share", "median_interval"],
        [
            (t.transition, t.count, t.share, t.median_interval)
            for t in transition_summary(links)
        ]
        + [("positive_share", len(links), positive_share(links), None)],
    )
    logger.info("Linked %d significant updates", len(links))
    _complete(out, _manifest(out, options), STAGE_SEGMENT)
    return links


def read_significant_updates(
    out: str, histories: Sequence[AppHistory]
) -> List[SignificantUpdate]:
    """
    Rebuilds the significant updates written by the segment stage.
    """
    path = _require(out, "significant_updates.tsv", STAGE_SEGMENT)
    releases: Dict[Tuple[str, str], ReleaseEvent] = {
        (e.app_id, e.day.isoformat()): e for e in derive_all_releases(histories)
    }
    links = []
    for number, row in enumerate(read_table(path, "significant_updates"), start=3):
        release = releases.get((row["app_id"], row["release_day"]))
        if release is None:
            raise MalformedRecord(
                f"{path}: no release of {row['app_id']} on {row['release_day']}",
                number,
            )
        point = TurningPoint(
            day=date.fromisoformat(row["turning_point_day"]),
            slope_before=float(row["slope_before"]),
            slope_after=float(row["slope_after"]),
            transition=TrendTransition(row["transition"]),
        )
        links.append(
            SignificantUpdate(
                release=release, turning_point=point, gap_days=int(row["gap_days"])
            )
        )
    return links


def cmd_lag(out: str, options: Optional[PipelineOptions] = None) -> Optional[int]:
    """
    Lagged correlation of releases and ratings per app, and the share of
    apps significant at each lag. Returns the peak lag.
    """
    options = options or PipelineOptions()
    results: List[LagResult] = []
    for history in _histories(out):
        if not derive_releases(history):
            continue
        try:
            results.append(
                scan_history(
                    history,
                    max_lag=options.MaxLag,
                    smooth_window=options.SmoothWindow,
                    alpha=options.Alpha,
                )
            )
        except (SeriesTooShort, DomainError) as e:
            logger.debug("Lag scan skipped %s: %s", history.app_id, e)
    histogram = aggregate_lags(results, options.Alpha)
    write_table(
        os.path.join(out, "lags.tsv"),
        "lags",
        ["app_id", "lag_days", "r", "p", "best_lag"],
        [
            (result.app_id, c.lag_days, c.r, c.p, result.best_lag)
            for result in results
            for c in result.per_lag
        ],
    )
    write_table(
        os.path.join(out, "lag_histogram.tsv"),
        "lag_histogram",
        ["lag_days", "fraction", "mean_abs_r", "apps", "peak"],
        [
            (lag, fraction, mean_r, histogram.n_apps, lag == histogram.peak_lag)
            for (lag, fraction), mean_r in zip(
                histogram.per_lag, histogram.mean_abs_r
            )
        ],
    )
    _complete(out, _manifest(out, options), STAGE_LAG)
    return histogram.peak_lag


def cmd_cluster(out: str, options: Optional[PipelineOptions] = None) -> None:
    """
    Release windows embedded with t-SNE and grouped by Ward clustering of
    the map.
    """
    options = options or PipelineOptions()
    vectors = []
    for history in _histories(out):
        vectors += history_windows(history, options.WindowDays)
    embedding = tsne_embed(
        vectors,
        perplexity=options.Perplexity,
        iterations=options.TsneIterations,
        seed=options.Seed,
    )
    clustering = ward_cluster(embedding.points, min(options.Clusters, len(vectors)))
    write_table(
        os.path.join(out, "embedding.tsv"),
        "embedding",
        ["app_id", "anchor_day", "x", "y", "cluster"],
        export_embedding(vectors, embedding, clustering),
    )
    write_table(
        os.path.join(out, "patterns.tsv"),
        "patterns",
        ["cluster", "size"] + [f"day_{i + 1}" for i in range(options.WindowDays)],
        [(p.label, p.size) + p.mean for p in aggregate_patterns(vectors, clustering)],
    )
    write_table(
        os.path.join(out, "tsne.tsv"),
        "tsne",
        ["key", "value"],
        [
            ("points", len(vectors)),
            ("perplexity", embedding.perplexity),
            ("seed", embedding.seed),
            ("early_kl", embedding.early_kl),
            ("final_kl", embedding.final_kl),
        ],
    )
    _complete(out, _manifest(out, options), STAGE_CLUSTER)


def cmd_terms(out: str, options: Optional[PipelineOptions] = None) -> None:
    """
    Lasso term importance per interval category, and the quadrant of each
    term by its Sparse and Successive coefficients.
    """
    options = options or PipelineOptions()
    histories = _histories(out)
    links = read_significant_updates(out, histories)
    tables = term_importance_by_group(
        links,
        derive_all_releases(histories),
        min_df=options.MinDf,
        n_top_terms=options.TopTerms,
        folds=options.LassoFolds,
        path_size=options.LassoPathSize,
        seed=options.Seed,
    )
    write_table(
        os.path.join(out, "terms.tsv"),
        "terms",
        ["group", "term", "coefficient", "lambda", "updates"],
        [
            (table.group, term, coefficient, table.lam, table.n_samples)
            for table in tables.values()
            for term, coefficient in sorted(table.coefficients.items())
        ],
    )
    successive = tables.get(IntervalCategory.SUCCESSIVE)
    sparse = tables.get(IntervalCategory.SPARSE)
    if successive is None or sparse is None:
        raise EmptyInput("Term quadrants need both Successive and Sparse tables")
    write_table(
        os.path.join(out, "quadrants.tsv"),
        "quadrants",
        ["term", "sparse", "successive", "quadrant"],
        [
            (
                term,
                sparse.coefficients[term],
                successive.coefficients[term],
                quadrant,
            )
            for term, quadrant in term_quadrants(successive, sparse).items()
        ],
    )
    _complete(out, _manifest(out, options), STAGE_TERMS)


def cmd_train(out: str, options: Optional[PipelineOptions] = None) -> None:
    """
    Labels releases by their effect, trains the effect model, and compares
    feature sets and the ranks of positive and negative updates.
    """
    options = options or PipelineOptions()
    samples, vocabulary = build_effect_samples(
        _histories(out),
        lag_window=options.LagWindow,
        mode=options.LabelMode,
        threshold=options.SegmentThreshold,
        min_df=options.MinDf,
    )
    groups = FULL_GROUPS
    if not options.Interactions:
        groups = tuple(g for g in FULL_GROUPS if g is not FeatureGroup.INTERACTION)
    space = fit_feature_space(samples, vocabulary, groups, options.FlatEps)
    model = train_effect_model(samples, space, options.LaplaceAlpha)
    with open(os.path.join(out, MODEL_FILE), "w", encoding="utf-8", newline="\n") as f:
        save_model(model, f)

    write_table(
        os.path.join(out, "update_ranks.tsv"),
        "update_ranks",
        ["app_id", "day", "interval_category", "label", "rank"],
        [(s.app_id, s.day, s.category, s.label, s.rank) for s in samples],
    )
    write_table(
        os.path.join(out, "rank_tests.tsv"),
        "rank_tests",
        [
            "interval_category",
            "positive",
            "negative",
            "median_rank_positive",
            "median_rank_negative",
            "u",
            "p",
        ],
        [
            (
                c.category,
                c.n_positive,
                c.n_negative,
                c.median_rank_positive,
                c.median_rank_negative,
                c.u,
                c.p,
            )
            for c in compare_group_ranks(samples)
        ],
    )
    ablation_rows: List[Tuple[Cell, ...]] = []
    try:
        ablations = evaluate_ablations(
            samples,
            vocabulary,
            k=options.CvFolds,
            alpha=options.LaplaceAlpha,
            seed=options.Seed,
            flat_eps=options.FlatEps,
        )
    except DomainError as e:
        logger.warning("Feature set comparison skipped: %s", e)
    else:
        for name, result in ablations.items():
            ablation_rows.append(
                (
                    name,
                    result.accuracy,
                    len(result.fold_accuracies),
                    len(result.excluded_folds),
                )
            )
    write_table(
        os.path.join(out, "ablations.tsv"),
        "ablations",
        ["features", "accuracy", "folds", "excluded_folds"],
        ablation_rows,
    )
    positives = sum(1 for s in samples if s.label is EffectLabel.POSITIVE)
    logger.info(
        "Trained on %d samples (%d positive), %d features",
        len(samples),
        positives,
        space.dimension,
    )
    _complete(out, _manifest(out, options), STAGE_TRAIN)


def cmd_recommend(
    out: str,
    rank: int,
    slope: float = 0.0,
    text: str = "",
    options: Optional[PipelineOptions] = None,
) -> Recommendation:
    """
    The release interval with the best predicted effect for an app with the
    given rank, rating trend and release text.
    """
    options = options or PipelineOptions()
    with open(_require(out, MODEL_FILE, STAGE_TRAIN), encoding="utf-8") as f:
        model = load_model(f)
    terms = tfidf(preprocess(text), model.space.vocabulary)
    recommendation = optimize_interval(
        model, rank, slope, terms, t_min=options.TMin, t_max=options.TMax
    )
    write_table(
        os.path.join(out, "recommendation.tsv"),
        "recommendation",
        ["interval_days", "positive_probability", "best"],
        [
            (t, p, t == recommendation.t_best)
            for t, p in recommendation.probability_by_t
        ],
    )
    _complete(out, _manifest(out, options), STAGE_RECOMMEND)
    return recommendation


def export_report(out: str) -> Dict[str, Optional[str]]:
    """
    Copies the plot tables into the report directory. Tables of stages
    that haven't run are left out with a MissingTableWarning; the interval
    tables are required.
    """
    report_dir = os.path.join(out, REPORT_DIR)
    os.makedirs(report_dir, exist_ok=True)
    cdf_path = _require(out, "interval_cdf.tsv", STAGE_INTERVALS)
    if not read_table(cdf_path, "interval_cdf"):
        raise EmptyInput("No release intervals to report")
    exported: Dict[str, Optional[str]] = {}
    for name, filename, stage in REPORT_TABLES:
        source = os.path.join(out, filename)
        if not os.path.exists(source):
            if stage == STAGE_INTERVALS:
                raise StageDependencyError(source, stage)
            warnings.warn(
                f"Table {name} missing (run stage '{stage}')", MissingTableWarning, 2
            )
            exported[name] = None
            continue
        target = os.path.join(report_dir, filename)
        shutil.copyfile(source, target)
        exported[name] = target
        if name == "interval_profiles":
            shutil.copyfile(
                _require(out, "interval_fit.tsv", STAGE_INTERVALS),
                os.path.join(report_dir, "interval_fit.tsv"),
            )
    return exported


def cmd_report(
    out: str, options: Optional[PipelineOptions] = None
) -> Dict[str, Optional[str]]:
    exported = export_report(out)
    manifest = _manifest(out, options or PipelineOptions()).with_stage(STAGE_REPORT)
    manifest.save(os.path.join(out, REPORT_DIR, MANIFEST_FILE))
    _complete(out, manifest, STAGE_REPORT)
    return exported


Stage = Callable[[str, PipelineOptions], object]

# Stages run by run_pipeline() after ingest, and whether a failure stops it.
ANALYSIS_STAGES: Tuple[Tuple[str, Stage, bool], ...] = (
    (STAGE_INTERVALS, cmd_intervals, True),
    (STAGE_SEGMENT, cmd_segment, True),
    (STAGE_LAG, cmd_lag, False),
    (STAGE_CLUSTER, cmd_cluster, False),
    (STAGE_TERMS, cmd_terms, False),
    (STAGE_TRAIN, cmd_train, False),
)


def run_pipeline(
    out: str,
    snapshot_log: Optional[str] = None,
    options: Optional[PipelineOptions] = None,
    config: Optional[GeneratorConfig] = None,
) -> Dict[str, Optional[str]]:
    """
    Runs every stage in order, generating the input first when no snapshot
    log is given. Optional stages that fail are logged and their report
    tables left out.
    """
    options = options or PipelineOptions()
    if snapshot_log is None:
        snapshot_log = cmd_datagen(
            out, config or GeneratorConfig(seed=options.Seed), options
        )
    cmd_ingest(out, snapshot_log, options)
    for stage, command, required in ANALYSIS_STAGES:
        try:
            command(out, options)
        except ReleaseTrendsError as e:
            if required:
                raise
            logger.warning("Stage %s failed: %s", stage, e)
    return cmd_report(out, options)
