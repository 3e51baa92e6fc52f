# -*- coding: utf-8 -*-
from releasetrends.datagen import GeneratorConfig, GroundTruth, generate
from releasetrends.effects import (
    EffectLabel,
    EffectModel,
    EffectSample,
    Recommendation,
    optimize_interval,
    train_effect_model,
)
from releasetrends.options import PipelineOptions, RunManifest
from releasetrends.pipeline import run_pipeline
from releasetrends.records import parse_snapshots, serialize_snapshots
from releasetrends.segmentation import (
    SegmentationResult,
    TrendTransition,
    TurningPoint,
    fit_segments,
)
from releasetrends.snapshots import (
    AppHistory,
    AppSnapshot,
    IntervalCategory,
    IntervalProfile,
    ReleaseEvent,
)
from releasetrends.text import TermVector, Vocabulary

__all__ = [
    "AppHistory",
    "AppSnapshot",
    "EffectLabel",
    "EffectModel",
    "EffectSample",
    "GeneratorConfig",
    "GroundTruth",
    "IntervalCategory",
    "IntervalProfile",
    "PipelineOptions",
    "Recommendation",
    "ReleaseEvent",
    "RunManifest",
    "SegmentationResult",
    "TermVector",
    "TrendTransition",
    "TurningPoint",
    "Vocabulary",
    "fit_segments",
    "generate",
    "optimize_interval",
    "parse_snapshots",
    "run_pipeline",
    "serialize_snapshots",
    "train_effect_model",
]
