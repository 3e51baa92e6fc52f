# -*- coding: utf-8 -*-
import os
from tempfile import TemporaryDirectory
from unittest import TestCase

from releasetrends.exceptions import ConfigError
from releasetrends.options import (
    TOOL_VERSION,
    VALID_PIPELINE_OPTION_FIELDS,
    PipelineOptions,
    RunManifest,
)


class TestPipelineOptions(TestCase):
    def test_defaults(self) -> None:
        options = PipelineOptions()
        self.assertEqual(options.Seed, 0)
        self.assertEqual(options.WindowDays, 13)
        self.assertEqual(options.Clusters, 4)
        self.assertIsNone(options.Perplexity)
        self.assertEqual(options.TsneIterations, 1000)
        self.assertEqual(options.LagWindow, 4)
        self.assertEqual(options.MaxLag, 10)
        self.assertEqual(options.SmoothWindow, 3)
        self.assertEqual(options.Alpha, 0.01)
        self.assertIsNone(options.SegmentThreshold)
        self.assertIsNone(options.MinSlopeDelta)
        self.assertEqual(options.FlatEps, 1e-4)
        self.assertEqual(options.MinDf, 2)
        self.assertEqual(options.TopTerms, 500)
        self.assertEqual(options.LassoFolds, 5)
        self.assertEqual(options.LassoPathSize, 50)
        self.assertEqual(options.LaplaceAlpha, 1.0)
        self.assertEqual(options.CvFolds, 5)
        self.assertEqual(options.TMin, 1)
        self.assertEqual(options.TMax, 60)
        self.assertEqual(options.LabelMode, "rating")
        self.assertIs(options.Interactions, True)

    def test_seed(self) -> None:
        self.assertEqual(PipelineOptions("Seed=7").Seed, 7)

        # Check case insensitivity.
        self.assertEqual(PipelineOptions("seed=7").Seed, 7)
        self.assertEqual(PipelineOptions("SEED=7").Seed, 7)

        # Repeated field (use first value).
        self.assertEqual(PipelineOptions("Seed=7&Seed=8").Seed, 7)

        # Invalid values.
        with self.assertRaises(ConfigError):
            PipelineOptions("Seed=-1")
        with self.assertRaises(ConfigError) as cm:
            PipelineOptions("Seed=blah")
        self.assertIn("not an integer", cm.exception.args[0])

    def test_perplexity(self) -> None:
        self.assertIsNone(PipelineOptions("Perplexity=auto").Perplexity)
        self.assertIsNone(PipelineOptions("Perplexity=AUTO").Perplexity)
        self.assertEqual(PipelineOptions("Perplexity=12.5").Perplexity, 12.5)

        with self.assertRaises(ConfigError):
            PipelineOptions("Perplexity=1")
        with self.assertRaises(ConfigError):
            PipelineOptions("Perplexity=blah")

    def test_alpha(self) -> None:
        self.assertEqual(PipelineOptions("Alpha=0.05").Alpha, 0.05)

        with self.assertRaises(ConfigError):
            PipelineOptions("Alpha=0")
        with self.assertRaises(ConfigError):
            PipelineOptions("Alpha=1.5")

    def test_segment_threshold(self) -> None:
        self.assertEqual(
            PipelineOptions("SegmentThreshold=0.02").SegmentThreshold, 0.02
        )
        self.assertEqual(PipelineOptions("SegmentThreshold=0").SegmentThreshold, 0.0)
        with self.assertRaises(ConfigError):
            PipelineOptions("SegmentThreshold=-0.1")

    def test_flat_eps(self) -> None:
        self.assertEqual(PipelineOptions("FlatEps=0.001").FlatEps, 0.001)

        # Zero turns the flat dead-band off.
        self.assertEqual(PipelineOptions("FlatEps=0").FlatEps, 0.0)
        with self.assertRaises(ConfigError):
            PipelineOptions("FlatEps=-0.1")

        # Other real-valued options stay strictly positive.
        with self.assertRaises(ConfigError):
            PipelineOptions("LaplaceAlpha=0")

    def test_smooth_window(self) -> None:
        self.assertEqual(PipelineOptions("SmoothWindow=5").SmoothWindow, 5)
        self.assertEqual(PipelineOptions("SmoothWindow=1").SmoothWindow, 1)
        with self.assertRaises(ConfigError) as cm:
            PipelineOptions("SmoothWindow=4")
        self.assertIn("not odd", cm.exception.args[0])

    def test_interval_range(self) -> None:
        options = PipelineOptions("TMin=3&TMax=30")
        self.assertEqual((options.TMin, options.TMax), (3, 30))
        with self.assertRaises(ConfigError):
            PipelineOptions("TMin=10&TMax=5")
        with self.assertRaises(ConfigError):
            PipelineOptions("TMin=0")

    def test_label_mode(self) -> None:
        self.assertEqual(PipelineOptions("LabelMode=slope").LabelMode, "slope")
        self.assertEqual(PipelineOptions("labelmode=SLOPE").LabelMode, "slope")
        self.assertEqual(PipelineOptions("LabelMode=Rating").LabelMode, "rating")
        with self.assertRaises(ConfigError):
            PipelineOptions("LabelMode=blah")

    def test_interactions(self) -> None:
        self.assertIs(PipelineOptions("Interactions=false").Interactions, False)
        self.assertIs(PipelineOptions("Interactions=FALSE").Interactions, False)
        self.assertIs(PipelineOptions("Interactions=True").Interactions, True)
        with self.assertRaises(ConfigError):
            PipelineOptions("Interactions=blah")

    def test_raises_when_query_string_has_unsupported_field(self) -> None:
        with self.assertRaises(ValueError) as cm1:
            PipelineOptions("NotSupported=10")
        self.assertIn("Unknown field in", cm1.exception.args[0])

        with self.assertRaises(ValueError) as cm2:
            PipelineOptions("NotSupported=10&AlsoNotSupported=20")
        self.assertIn("Unknown fields in", cm2.exception.args[0])

    def test_to_query_names_every_option(self) -> None:
        options = PipelineOptions("Seed=3&MaxLag=14&Interactions=false")
        query = options.to_query()
        for name in VALID_PIPELINE_OPTION_FIELDS:
            self.assertIn(f"{name}=", query)
        self.assertEqual(PipelineOptions(query), options)
        self.assertEqual(hash(PipelineOptions(query)), hash(options))

    def test_updated(self) -> None:
        options = PipelineOptions("Seed=3&MaxLag=14")
        updated = options.updated({"MaxLag": "7", "Clusters": "5"})
        self.assertEqual(updated.Seed, 3)
        self.assertEqual(updated.MaxLag, 7)
        self.assertEqual(updated.Clusters, 5)
        self.assertEqual(options.MaxLag, 14)
        self.assertNotEqual(updated, options)

        with self.assertRaises(ConfigError):
            options.updated({"MaxLag": "-1"})


class TestRunManifest(TestCase):
    def test_serialize_and_deserialize(self) -> None:
        manifest = RunManifest(
            options=PipelineOptions("Seed=11&WindowDays=9"), run_id="run-11-abc"
        )
        manifest = manifest.with_input("ingest", "/data/snap shots.log")
        manifest = manifest.with_stage("ingest").with_stage("intervals")
        manifest = manifest.with_stage("ingest")
        self.assertEqual(manifest.stages, ("ingest", "intervals"))

        text = manifest.serialize()
        self.assertTrue(text.startswith("format=releasetrends-manifest&version=1&"))
        copy = RunManifest.deserialize(text)
        self.assertEqual(copy, manifest)
        self.assertEqual(copy.options.WindowDays, 9)
        self.assertEqual(copy.inputs["ingest"], "/data/snap shots.log")
        self.assertEqual(copy.tool_version, TOOL_VERSION)

    def test_save_and_load(self) -> None:
        manifest = RunManifest().with_stage("datagen")
        with TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "manifest.txt")
            manifest.save(path)
            self.assertEqual(RunManifest.load(path), manifest)

    def test_deserialize_rejects_invalid_manifests(self) -> None:
        with self.assertRaises(ConfigError):
            RunManifest.deserialize("")
        with self.assertRaises(ConfigError):
            RunManifest.deserialize("format=something-else&version=1\n")
        with self.assertRaises(ConfigError):
            RunManifest.deserialize("format=releasetrends-manifest&version=99\n")
        with self.assertRaises(ConfigError):
            RunManifest.deserialize(
                "format=releasetrends-manifest&version=1\nwhat=ever\n"
            )
        with self.assertRaises(ConfigError):
            RunManifest.deserialize(
                "format=releasetrends-manifest&version=1\noptions=Bogus%3D1\n"
            )
