# -*- coding: utf-8 -*-
"""
Command line interface. Each subcommand runs one pipeline stage against an
output directory; "run" runs them all.
"""
import argparse
import logging
import re
import sys
from typing import Dict, Optional, Sequence

from releasetrends.datagen import RATING_MODES, GeneratorConfig
from releasetrends.exceptions import ConfigError, ReleaseTrendsError
from releasetrends.intervals import categorize_interval
from releasetrends.options import (
    TOOL_VERSION,
    VALID_PIPELINE_OPTION_FIELDS,
    PipelineOptions,
    RunManifest,
)
from releasetrends.pipeline import (
    cmd_cluster,
    cmd_datagen,
    cmd_ingest,
    cmd_intervals,
    cmd_lag,
    cmd_recommend,
    cmd_report,
    cmd_segment,
    cmd_terms,
    cmd_train,
    run_pipeline,
)
from releasetrends.records import encode_record, format_float

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_ERROR = 2


def option_flag(name: str) -> str:
    """
    The command line flag of an option, e.g. "--lag-window" for LagWindow.
    """
    return "--" + re.sub(r"(?<!^)(?=[A-Z])", "-", name).lower()


def _common_arguments() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", required=True, help="output directory")
    common.add_argument(
        "--manifest", help="take options from a manifest written by an earlier run"
    )
    verbosity = common.add_mutually_exclusive_group()
    verbosity.add_argument("-v", "--verbose", action="store_true")
    verbosity.add_argument("-q", "--quiet", action="store_true")
    group = common.add_argument_group("analysis options")
    for name in VALID_PIPELINE_OPTION_FIELDS:
        group.add_argument(option_flag(name), dest=f"option_{name}", metavar="VALUE")
    return common


def _generator_arguments(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("generator")
    group.add_argument("--n-apps", type=int, default=50)
    group.add_argument("--span-days", type=int, default=105)
    group.add_argument("--lag-days", type=int, default=4)
    group.add_argument("--rating-mode", choices=RATING_MODES, default=RATING_MODES[0])
    group.add_argument("--sigma", type=float, default=0.02)
    group.add_argument("--matthew-strength", type=float, default=1.0)
    group.add_argument("--positive-probability", type=float, default=0.5)
    group.add_argument("--crawl-gap-rate", type=float, default=0.0)
    group.add_argument("--weekday-bias", type=float, default=0.0)
    group.add_argument(
        "--interval-mix",
        default="0.4,0.35,0.25",
        help="Successive, Normal and Sparse fractions, comma separated",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="releasetrends",
        description="Release interval analytics over daily app snapshots.",
    )
    parser.add_argument("--version", action="version", version=TOOL_VERSION)
    common = _common_arguments()
    commands = parser.add_subparsers(dest="command", required=True)

    datagen = commands.add_parser(
        "datagen", parents=[common], help="write a synthetic snapshot log"
    )
    _generator_arguments(datagen)
    ingest = commands.add_parser(
        "ingest", parents=[common], help="parse a snapshot log"
    )
    ingest.add_argument("input", help="snapshot log")
    for name, text in [
        ("intervals", "release intervals and their distributions"),
        ("segment", "rating trends, turning points and significant updates"),
        ("lag", "lag between releases and rating changes"),
        ("cluster", "release patterns"),
        ("terms", "release note terms related to rating trends"),
        ("train", "train the release effect model"),
        ("report", "collect the plot tables"),
    ]:
        commands.add_parser(name, parents=[common], help=text)
    recommend = commands.add_parser(
        "recommend", parents=[common], help="best release interval for an app"
    )
    recommend.add_argument("--rank", type=int, required=True)
    recommend.add_argument("--slope", type=float, default=0.0)
    recommend.add_argument("--text", default="", help="release notes")
    run = commands.add_parser(
        "run", parents=[common], help="every stage, generating input if none given"
    )
    run.add_argument("input", nargs="?", help="snapshot log")
    _generator_arguments(run)
    return parser


def _options(args: argparse.Namespace) -> PipelineOptions:
    options = PipelineOptions()
    if args.manifest:
        options = RunManifest.load(args.manifest).options
    overrides: Dict[str, str] = {}
    for name in VALID_PIPELINE_OPTION_FIELDS:
        value = getattr(args, f"option_{name}")
        if value is not None:
            overrides[name] = value
    return options.updated(overrides) if overrides else options


def _generator_config(args: argparse.Namespace, seed: int) -> GeneratorConfig:
    try:
        mix = tuple(float(part) for part in args.interval_mix.split(","))
    except ValueError:
        raise ConfigError(f"Invalid interval mix: {args.interval_mix!r}") from None
    if len(mix) != 3:
        raise ConfigError(f"Interval mix needs 3 fractions: {args.interval_mix!r}")
    return GeneratorConfig(
        n_apps=args.n_apps,
        span_days=args.span_days,
        seed=seed,
        interval_mix=(mix[0], mix[1], mix[2]),
        lag_days=args.lag_days,
        rating_mode=args.rating_mode,
        sigma=args.sigma,
        matthew_strength=args.matthew_strength,
        positive_probability=args.positive_probability,
        crawl_gap_rate=args.crawl_gap_rate,
        weekday_bias=args.weekday_bias,
    )


def _run(args: argparse.Namespace) -> None:
    options = _options(args)
    command = args.command
    if command == "datagen":
        print(cmd_datagen(args.out, _generator_config(args, options.Seed), options))
    elif command == "ingest":
        cmd_ingest(args.out, args.input, options)
    elif command == "intervals":
        cmd_intervals(args.out, options)
    elif command == "segment":
        cmd_segment(args.out, options)
    elif command == "lag":
        cmd_lag(args.out, options)
    elif command == "cluster":
        cmd_cluster(args.out, options)
    elif command == "terms":
        cmd_terms(args.out, options)
    elif command == "train":
        cmd_train(args.out, options)
    elif command == "recommend":
        recommendation = cmd_recommend(
            args.out, args.rank, args.slope, args.text, options
        )
        category = categorize_interval(recommendation.t_best)
        print(
            encode_record(
                [
                    ("t_best", str(recommendation.t_best)),
                    ("category", category.value),
                    (
                        "positive_probability",
                        format_float(recommendation.predicted_positive_probability),
                    ),
                ]
            )
        )
    elif command == "report":
        cmd_report(args.out, options)
    elif command == "run":
        config = None
        if args.input is None:
            config = _generator_config(args, options.Seed)
        run_pipeline(args.out, args.input, options, config)


def error_line(error: BaseException) -> str:
    """
    One machine readable line describing an error.
    """
    return encode_record(
        [("error", error.__class__.__name__), ("message", str(error))]
    )


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    level = logging.INFO
    if args.verbose:
        level = logging.DEBUG
    elif args.quiet:
        level = logging.WARNING
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    try:
        _run(args)
    except ReleaseTrendsError as e:
        logger.debug("Command %s failed", args.command, exc_info=True)
        print(error_line(e), file=sys.stderr)
        return EXIT_ERROR
    except OSError as e:
        print(error_line(e), file=sys.stderr)
        return EXIT_ERROR
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
