# -*- coding: utf-8 -*-
import datetime
import os
import sys
import warnings
from datetime import date
from tempfile import TemporaryDirectory
from typing import Dict, List, Optional
from unittest import TestCase

from releasetrends.datagen import (
    AnalysisOutputs,
    GeneratorConfig,
    GroundTruth,
    validate_against_truth,
)
from releasetrends.exceptions import (
    DomainError,
    EmptyInput,
    MalformedRecord,
    MissingTableWarning,
    StageDependencyError,
)
from releasetrends.intervals import derive_all_releases
from releasetrends.options import PipelineOptions, RunManifest
from releasetrends.pipeline import (
    GENERATED_FILE,
    MANIFEST_FILE,
    MODEL_FILE,
    REPORT_DIR,
    REPORT_TABLES,
    SNAPSHOTS_FILE,
    TRUTH_FILE,
    cmd_cluster,
    cmd_datagen,
    cmd_ingest,
    cmd_intervals,
    cmd_lag,
    cmd_recommend,
    cmd_segment,
    cmd_terms,
    cmd_train,
    export_report,
    read_significant_updates,
    read_table,
    run_pipeline,
    write_table,
)
from releasetrends.records import read_snapshot_file
from releasetrends.snapshots import IntervalCategory

started = datetime.datetime.now()
last = datetime.datetime.now()


def get_elapsed_time() -> str:
    global last
    last = datetime.datetime.now()
    delta = last - started
    result = ""
    minutes = int(delta.seconds // 60)
    if minutes:
        result += f"{minutes}m"
    seconds = int(delta.seconds % 60)
    return result + f"{seconds}s"


def get_duration() -> str:
    delta_seconds = (datetime.datetime.now() - last).total_seconds()
    minutes = int(delta_seconds // 60)
    result = ""
    if minutes:
        result = f"{minutes}m"
    seconds = delta_seconds % 60
    return result + f"{seconds:.3f}s"


class TimedTestCase(TestCase):
    def setUp(self) -> None:
        super().setUp()
        if "-v" in sys.argv:
            sys.stderr.write(f"[@{get_elapsed_time()}] ")
            sys.stderr.flush()

    def tearDown(self) -> None:
        if "-v" in sys.argv:
            sys.stderr.write(f"[+{get_duration()}] ")
        super().tearDown()


FAST_OPTIONS = PipelineOptions("Seed=3&TsneIterations=250&TMin=1&TMax=20")


class TestTables(TestCase):
    def test_write_and_read(self) -> None:
        with TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "t.tsv")
            write_table(
                path,
                "things",
                ["name", "day", "value", "flag", "category", "missing"],
                [
                    ("a", date(2024, 1, 2), 0.1, True, IntervalCategory.SPARSE, None),
                    ("b", date(2024, 1, 3), 3, False, IntervalCategory.NORMAL, 1.5),
                ],
            )
            with open(path, encoding="utf-8") as f:
                self.assertEqual(f.readline(), "# releasetrends things v1\n")
            rows = read_table(path, "things")
        self.assertEqual(
            rows[0],
            {
                "name": "a",
                "day": "2024-01-02",
                "value": "0.1",
                "flag": "true",
                "category": "Sparse",
                "missing": "",
            },
        )
        self.assertEqual(rows[1]["value"], "3")
        self.assertEqual(rows[1]["flag"], "false")
        self.assertEqual(rows[1]["missing"], "1.5")

    def test_empty_table(self) -> None:
        with TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "t.tsv")
            write_table(path, "things", ["a", "b"], [])
            self.assertEqual(read_table(path, "things"), [])

    def test_write_errors(self) -> None:
        with TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "t.tsv")
            with self.assertRaises(DomainError):
                write_table(path, "things", ["a"], [("tab\there",)])
            with self.assertRaises(DomainError):
                write_table(path, "things", ["a", "b"], [(1,)])

    def test_read_errors(self) -> None:
        with TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "t.tsv")
            write_table(path, "things", ["a", "b"], [(1, 2)])

            # Wrong table name.
            with self.assertRaises(MalformedRecord):
                read_table(path, "other")

            with open(path, "w", encoding="utf-8") as f:
                f.write("# releasetrends things v1\n")
            with self.assertRaises(MalformedRecord):
                read_table(path, "things")

            with open(path, "w", encoding="utf-8") as f:
                f.write("# releasetrends things v1\na\tb\n1\n")
            with self.assertRaises(MalformedRecord) as cm:
                read_table(path, "things")
            self.assertEqual(cm.exception.line_number, 3)


class TestStageDependencies(TestCase):
    def test_stages_need_ingested_snapshots(self) -> None:
        with TemporaryDirectory() as tmp:
            for command in [cmd_intervals, cmd_segment, cmd_lag, cmd_train]:
                with self.assertRaises(StageDependencyError) as cm:
                    command(tmp, None)
                self.assertEqual(cm.exception.path, os.path.join(tmp, SNAPSHOTS_FILE))
                self.assertIn("run stage 'ingest' first", str(cm.exception))

    def test_ingest_needs_input(self) -> None:
        with TemporaryDirectory() as tmp:
            with self.assertRaises(StageDependencyError):
                cmd_ingest(tmp, os.path.join(tmp, "nowhere.log"))

    def test_terms_need_segment(self) -> None:
        with TemporaryDirectory() as tmp:
            log = cmd_datagen(tmp, GeneratorConfig(n_apps=5, seed=1))
            cmd_ingest(tmp, log)
            with self.assertRaises(StageDependencyError) as cm:
                cmd_terms(tmp)
            self.assertIn("segment", str(cm.exception))

    def test_recommend_needs_model(self) -> None:
        with TemporaryDirectory() as tmp:
            with self.assertRaises(StageDependencyError) as cm:
                cmd_recommend(tmp, rank=10)
            self.assertEqual(cm.exception.path, os.path.join(tmp, MODEL_FILE))

    def test_report_needs_intervals(self) -> None:
        with TemporaryDirectory() as tmp:
            log = cmd_datagen(tmp, GeneratorConfig(n_apps=5, seed=1))
            cmd_ingest(tmp, log)
            with self.assertRaises(StageDependencyError):
                export_report(tmp)


class TestStages(TimedTestCase):
    def test_datagen_and_ingest(self) -> None:
        config = GeneratorConfig(n_apps=8, seed=4)
        with TemporaryDirectory() as tmp:
            log = cmd_datagen(tmp, config)
            self.assertEqual(log, os.path.join(tmp, GENERATED_FILE))
            with open(os.path.join(tmp, TRUTH_FILE), encoding="utf-8") as f:
                truth = GroundTruth.from_json(f.read())
            self.assertEqual(truth.run_id, config.run_id)

            histories = cmd_ingest(tmp, log)
            self.assertEqual(len(histories), 8)
            snapshots = read_snapshot_file(os.path.join(tmp, SNAPSHOTS_FILE))
            self.assertEqual(snapshots, histories)
            apps = read_table(os.path.join(tmp, "apps.tsv"), "apps")
            self.assertEqual(
                [row["app_id"] for row in apps], [h.app_id for h in histories]
            )

            manifest = RunManifest.load(os.path.join(tmp, MANIFEST_FILE))
            self.assertEqual(manifest.stages, ("datagen", "ingest"))
            self.assertEqual(manifest.run_id, config.run_id)
            self.assertEqual(manifest.inputs["ingest"], os.path.abspath(log))

            # Recovers every planted release.
            outputs = AnalysisOutputs(
                run_id=manifest.run_id or "",
                releases=derive_all_releases(histories),
            )
            scorecard = validate_against_truth(outputs, truth)
            self.assertEqual(scorecard.release_recall, 1.0)
            self.assertEqual(scorecard.release_precision, 1.0)

    def test_intervals(self) -> None:
        with TemporaryDirectory() as tmp:
            histories = cmd_ingest(
                tmp, cmd_datagen(tmp, GeneratorConfig(n_apps=20, seed=2))
            )
            cmd_intervals(tmp)
            releases = read_table(os.path.join(tmp, "releases.tsv"), "releases")
            self.assertEqual(len(releases), len(derive_all_releases(histories)))

            cdf = read_table(os.path.join(tmp, "interval_cdf.tsv"), "interval_cdf")
            fractions = [float(row["cumulative_fraction"]) for row in cdf]
            self.assertEqual(fractions, sorted(fractions))
            self.assertEqual(fractions[-1], 1.0)

            summary = {
                row["key"]: row["value"]
                for row in read_table(
                    os.path.join(tmp, "interval_summary.tsv"), "interval_summary"
                )
            }
            shares = [
                float(summary[f"share_{c.value.lower()}"]) for c in IntervalCategory
            ]
            self.assertAlmostEqual(sum(shares), 1.0)
            self.assertEqual(int(summary["releases"]), len(releases))

            # Matches what the generator planted.
            with open(os.path.join(tmp, TRUTH_FILE), encoding="utf-8") as f:
                truth = GroundTruth.from_json(f.read())
            self.assertEqual(
                float(summary["share_successive"]), truth.successive_share
            )

            counts = read_table(os.path.join(tmp, "update_counts.tsv"), "update_counts")
            self.assertEqual(sum(int(row["apps"]) for row in counts), 20)

    def test_intervals_without_releases(self) -> None:
        config = GeneratorConfig(n_apps=5, seed=2, archetype_mix={"never": 1.0})
        with TemporaryDirectory() as tmp:
            cmd_ingest(tmp, cmd_datagen(tmp, config))
            with self.assertLogs("releasetrends.pipeline", "WARNING"):
                cmd_intervals(tmp)
            cdf_path = os.path.join(tmp, "interval_cdf.tsv")
            self.assertEqual(read_table(cdf_path, "interval_cdf"), [])
            with self.assertRaises(EmptyInput):
                export_report(tmp)

    def test_segment_writes_significant_updates(self) -> None:
        with TemporaryDirectory() as tmp:
            histories = cmd_ingest(
                tmp, cmd_datagen(tmp, GeneratorConfig(n_apps=20, seed=8))
            )
            links = cmd_segment(tmp)
            self.assertTrue(links)
            self.assertEqual(read_significant_updates(tmp, histories), links)
            for link in links:
                self.assertLessEqual(link.gap_days, FAST_OPTIONS.LagWindow)

    def test_lag_finds_planted_lag(self) -> None:
        config = GeneratorConfig(
            n_apps=20,
            seed=0,
            rating_mode="daily",
            archetype_mix={"interval_mix": 1.0},
            interval_mix=(0.0, 0.5, 0.5),
            positive_probability=1.0,
            purpose_effect=0.0,
            lag_days=4,
        )
        with TemporaryDirectory() as tmp:
            cmd_ingest(tmp, cmd_datagen(tmp, config))
            self.assertEqual(cmd_lag(tmp), 4)
            rows = read_table(os.path.join(tmp, "lag_histogram.tsv"), "lag_histogram")
            self.assertEqual([int(row["lag_days"]) for row in rows], list(range(11)))
            peaks = [row["lag_days"] for row in rows if row["peak"] == "true"]
            self.assertEqual(peaks, ["4"])

    def test_train_and_recommend(self) -> None:
        with TemporaryDirectory() as tmp:
            cmd_ingest(tmp, cmd_datagen(tmp, GeneratorConfig(n_apps=40, seed=5)))
            cmd_train(tmp, FAST_OPTIONS)
            self.assertTrue(os.path.exists(os.path.join(tmp, MODEL_FILE)))
            ranks = read_table(os.path.join(tmp, "update_ranks.tsv"), "update_ranks")
            self.assertTrue(ranks)
            self.assertTrue({row["label"] for row in ranks} <= {"Positive", "Negative"})

            recommendation = cmd_recommend(
                tmp, rank=25, slope=0.001, text="fixed crash", options=FAST_OPTIONS
            )
            self.assertTrue(1 <= recommendation.t_best <= 20)
            rows = read_table(
                os.path.join(tmp, "recommendation.tsv"), "recommendation"
            )
            self.assertEqual(len(rows), 20)
            best = [int(row["interval_days"]) for row in rows if row["best"] == "true"]
            self.assertEqual(best, [recommendation.t_best])

            manifest = RunManifest.load(os.path.join(tmp, MANIFEST_FILE))
            self.assertIn("train", manifest.stages)
            self.assertIn("recommend", manifest.stages)
            self.assertEqual(manifest.options, FAST_OPTIONS)

    def test_report_warns_about_missing_tables(self) -> None:
        with TemporaryDirectory() as tmp:
            cmd_ingest(tmp, cmd_datagen(tmp, GeneratorConfig(n_apps=10, seed=3)))
            cmd_intervals(tmp)
            with warnings.catch_warnings(record=True) as caught:
                warnings.simplefilter("always")
                exported = export_report(tmp)
            missing = [w for w in caught if issubclass(w.category, MissingTableWarning)]
            self.assertEqual(len(missing), 4)
            self.assertIsNone(exported["embedding"])
            self.assertIsNone(exported["quadrants"])
            self.assertEqual(
                exported["weekday"], os.path.join(tmp, REPORT_DIR, "weekday.tsv")
            )
            self.assertTrue(
                os.path.exists(os.path.join(tmp, REPORT_DIR, "interval_fit.tsv"))
            )


RUN_CONFIG = GeneratorConfig(n_apps=200, seed=7)
RUN_OPTIONS = PipelineOptions("Seed=7&TsneIterations=250")


def read_tree(root: str) -> Dict[str, bytes]:
    contents: Dict[str, bytes] = {}
    for dirpath, _, filenames in os.walk(root):
        for filename in filenames:
            path = os.path.join(dirpath, filename)
            with open(path, "rb") as f:
                contents[os.path.relpath(path, root)] = f.read()
    return contents


class TestRunPipeline(TimedTestCase):
    tmp: "TemporaryDirectory[str]"
    out: str
    exported: Dict[str, Optional[str]]
    caught: List[warnings.WarningMessage]

    @classmethod
    def setUpClass(cls) -> None:
        cls.tmp = TemporaryDirectory()
        cls.out = cls.tmp.name
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            cls.exported = run_pipeline(cls.out, options=RUN_OPTIONS, config=RUN_CONFIG)
        cls.caught = list(caught)

    @classmethod
    def tearDownClass(cls) -> None:
        cls.tmp.cleanup()

    def test_every_report_table_exported(self) -> None:
        missing = [
            w for w in self.caught if issubclass(w.category, MissingTableWarning)
        ]
        self.assertEqual(missing, [])
        self.assertEqual(set(self.exported), {name for name, _, _ in REPORT_TABLES})
        for name, filename, _ in REPORT_TABLES:
            path = self.exported[name]
            self.assertEqual(path, os.path.join(self.out, REPORT_DIR, filename))
            assert path is not None
            self.assertTrue(os.path.exists(path), name)

    def test_manifests(self) -> None:
        manifest = RunManifest.load(os.path.join(self.out, MANIFEST_FILE))
        self.assertEqual(manifest.run_id, RUN_CONFIG.run_id)
        self.assertEqual(
            manifest.stages[:4], ("datagen", "ingest", "intervals", "segment")
        )
        for stage in ("lag", "cluster", "terms", "train", "report"):
            self.assertIn(stage, manifest.stages)
        report_manifest = RunManifest.load(
            os.path.join(self.out, REPORT_DIR, MANIFEST_FILE)
        )
        self.assertEqual(report_manifest.run_id, RUN_CONFIG.run_id)
        self.assertEqual(report_manifest.options, RUN_OPTIONS)

    def test_rerun_is_byte_identical(self) -> None:
        before = read_tree(self.out)
        cmd_cluster(self.out, RUN_OPTIONS)
        cmd_train(self.out, RUN_OPTIONS)
        after = read_tree(self.out)
        self.assertEqual(sorted(after), sorted(before))
        for path in before:
            self.assertEqual(after[path], before[path], path)

    def test_successive_updates_separate_by_rank(self) -> None:
        rows = read_table(os.path.join(self.out, "rank_tests.tsv"), "rank_tests")
        p = {row["interval_category"]: float(row["p"]) for row in rows}
        self.assertEqual(set(p), {c.value for c in IntervalCategory})
        self.assertLess(p[IntervalCategory.SUCCESSIVE.value], 0.01)
        self.assertGreaterEqual(p[IntervalCategory.SPARSE.value], 0.05)

    def test_recommendation_depends_on_rank(self) -> None:
        top = cmd_recommend(self.out, rank=10, options=RUN_OPTIONS)
        low = cmd_recommend(self.out, rank=500, options=RUN_OPTIONS)
        for recommendation in (top, low):
            self.assertTrue(
                RUN_OPTIONS.TMin <= recommendation.t_best <= RUN_OPTIONS.TMax
            )
        self.assertNotEqual(top.t_best, low.t_best)


    def test_given_snapshot_log(self) -> None:
        with TemporaryDirectory() as source, TemporaryDirectory() as tmp:
            log = cmd_datagen(source, GeneratorConfig(n_apps=15, seed=9))
            exported = run_pipeline(tmp, log, FAST_OPTIONS)
            self.assertIsNotNone(exported["interval_cdf"])
            self.assertFalse(os.path.exists(os.path.join(tmp, GENERATED_FILE)))
            manifest = RunManifest.load(os.path.join(tmp, MANIFEST_FILE))
            self.assertIsNone(manifest.run_id)
            self.assertNotIn("datagen", manifest.stages)
            self.assertEqual(manifest.inputs["ingest"], os.path.abspath(log))
