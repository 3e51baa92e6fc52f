# -*- coding: utf-8 -*-
from dataclasses import dataclass, field, replace
from typing import Any, Dict, List, Mapping, Optional, Tuple, cast
from urllib.parse import parse_qs

from releasetrends.effects import (
    LABEL_MODE_RATING,
    VALID_LABEL_MODES,
    EffectLabelMode,
)
from releasetrends.exceptions import ConfigError, ValidationError
from releasetrends.records import decode_record, encode_record, format_float

TOOL_VERSION = "0.1.0"
MANIFEST_FORMAT = "releasetrends-manifest"
MANIFEST_FORMAT_VERSION = "1"
AUTO = "auto"

VALID_PIPELINE_OPTION_FIELDS = [
    "Seed",
    "WindowDays",
    "Clusters",
    "Perplexity",
    "TsneIterations",
    "LagWindow",
    "MaxLag",
    "SmoothWindow",
    "Alpha",
    "SegmentThreshold",
    "MinSlopeDelta",
    "FlatEps",
    "MinDf",
    "TopTerms",
    "LassoFolds",
    "LassoPathSize",
    "LaplaceAlpha",
    "CvFolds",
    "TMin",
    "TMax",
    "LabelMode",
    "Interactions",
]


def _int(options: Dict[str, Any], name: str, default: int, minimum: int) -> int:
    value = options.get(name.upper())
    if value is None:
        return default
    try:
        number = int(value)
    except ValueError:
        raise ConfigError(f"{name}: '{value}' is not an integer") from None
    if number < minimum:
        raise ConfigError(f"{name}: {number} is less than {minimum}")
    return number


def _float(
    options: Dict[str, Any], name: str, default: float, allow_zero: bool = False
) -> float:
    value = options.get(name.upper())
    if value is None:
        return default
    try:
        number = float(value)
    except ValueError:
        raise ConfigError(f"{name}: '{value}' is not a number") from None
    if allow_zero and number == 0:
        return number
    if not number > 0:
        raise ConfigError(f"{name}: {number} is not positive")
    return number


def _float_or_auto(options: Dict[str, Any], name: str) -> Optional[float]:
    value = options.get(name.upper())
    if value is None or value.lower() == AUTO:
        return None
    try:
        number = float(value)
    except ValueError:
        raise ConfigError(
            f"{name}: '{value}' is neither a number nor 'auto'"
        ) from None
    if number < 0:
        raise ConfigError(f"{name}: {number} is negative")
    return number


class PipelineOptions:
    """
    Parameters of every analysis stage, parsed from a query string such as
    "Seed=7&MaxLag=14". Field names are case insensitive.
    """

    __slots__ = [f"_{s}" for s in VALID_PIPELINE_OPTION_FIELDS]

    def __init__(self, query: str = ""):
        # Parse query string (case insensitivity, assume single values).
        options = {k.upper(): v[0] for k, v in parse_qs(query).items()}

        self._validate_field_names(options)
        self._Seed = _int(options, "Seed", 0, 0)
        self._WindowDays = _int(options, "WindowDays", 13, 1)
        self._Clusters = _int(options, "Clusters", 4, 1)
        self._set_Perplexity(options)
        self._TsneIterations = _int(options, "TsneIterations", 1000, 1)
        self._LagWindow = _int(options, "LagWindow", 4, 0)
        self._MaxLag = _int(options, "MaxLag", 10, 0)
        self._SmoothWindow = _int(options, "SmoothWindow", 3, 1)
        self._set_Alpha(options)
        self._SegmentThreshold = _float_or_auto(options, "SegmentThreshold")
        self._MinSlopeDelta = _float_or_auto(options, "MinSlopeDelta")
        self._FlatEps = _float(options, "FlatEps", 1e-4, allow_zero=True)
        self._MinDf = _int(options, "MinDf", 2, 1)
        self._TopTerms = _int(options, "TopTerms", 500, 1)
        self._LassoFolds = _int(options, "LassoFolds", 5, 2)
        self._LassoPathSize = _int(options, "LassoPathSize", 50, 1)
        self._LaplaceAlpha = _float(options, "LaplaceAlpha", 1.0)
        self._CvFolds = _int(options, "CvFolds", 5, 2)
        self._TMin = _int(options, "TMin", 1, 1)
        self._TMax = _int(options, "TMax", 60, 1)
        self._set_LabelMode(options)
        self._set_Interactions(options)
        if self._SmoothWindow % 2 == 0:
            raise ConfigError(f"SmoothWindow: {self._SmoothWindow} is not odd")
        if self._TMax < self._TMin:
            raise ConfigError(f"TMax {self._TMax} is less than TMin {self._TMin}")

    @staticmethod
    def _validate_field_names(options: Dict[str, Any]) -> None:
        valid_fields = [s.upper() for s in VALID_PIPELINE_OPTION_FIELDS]
        invalid_fields = []
        for name in options.keys():
            if name not in valid_fields:
                invalid_fields.append(name)
        if len(invalid_fields) > 0:
            plural = "s" if len(invalid_fields) > 1 else ""
            joined_fields = ", ".join(invalid_fields)
            raise ConfigError(f"Unknown field{plural} in options: {joined_fields}")

    def _set_Perplexity(self, options: Dict[str, Any]) -> None:
        self._Perplexity = _float_or_auto(options, "Perplexity")
        if self._Perplexity is not None and self._Perplexity <= 1:
            raise ConfigError(f"Perplexity: {self._Perplexity} is not above 1")

    def _set_Alpha(self, options: Dict[str, Any]) -> None:
        self._Alpha = _float(options, "Alpha", 0.01)
        if self._Alpha > 1:
            raise ConfigError(f"Alpha: {self._Alpha} is greater than 1")

    def _set_LabelMode(self, options: Dict[str, Any]) -> None:
        _LabelMode = options.get("LabelMode".upper())
        if _LabelMode is None:
            self._LabelMode = LABEL_MODE_RATING
        else:
            if _LabelMode.lower() not in VALID_LABEL_MODES:
                raise ConfigError(
                    f"'{_LabelMode}' not one of: {', '.join(VALID_LABEL_MODES)}"
                )
            self._LabelMode = cast(EffectLabelMode, _LabelMode.lower())

    def _set_Interactions(self, options: Dict[str, Any]) -> None:
        _Interactions = options.get("Interactions".upper())
        if _Interactions is None:
            self._Interactions = True
        else:
            validInteractionsValues = ["true", "false"]
            if _Interactions.lower() not in validInteractionsValues:
                raise ConfigError(
                    f"'{_Interactions}' not one of:"
                    f" {', '.join(validInteractionsValues)}"
                )
            self._Interactions = _Interactions.lower() == "true"

    def to_query(self) -> str:
        """
        Every option with its value, in a form the constructor accepts.
        """
        items: List[Tuple[str, str]] = []
        for name in VALID_PIPELINE_OPTION_FIELDS:
            value = getattr(self, name)
            if value is None:
                text = AUTO
            elif isinstance(value, bool):
                text = "true" if value else "false"
            elif isinstance(value, float):
                text = format_float(value)
            else:
                text = str(value)
            items.append((name, text))
        return encode_record(items)

    def updated(self, overrides: Mapping[str, str]) -> "PipelineOptions":
        """
        A copy with some options replaced.
        """
        items = dict(decode_record(self.to_query()))
        items.update(overrides)
        return PipelineOptions(encode_record(list(items.items())))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PipelineOptions):
            return NotImplemented
        return self.to_query() == other.to_query()

    def __hash__(self) -> int:
        return hash(self.to_query())

    def __repr__(self) -> str:
        return f"PipelineOptions({self.to_query()!r})"

    @property
    def Seed(self) -> int:
        """
        Seed of every random choice: t-SNE start, fold shuffles, generator.
        """
        return self._Seed

    @property
    def WindowDays(self) -> int:
        """
        Length of the release pattern window after each release.
        """
        return self._WindowDays

    @property
    def Clusters(self) -> int:
        return self._Clusters

    @property
    def Perplexity(self) -> Optional[float]:
        """
        t-SNE perplexity. None ('auto') means min(30, (n - 1) / 3).
        """
        return self._Perplexity

    @property
    def TsneIterations(self) -> int:
        return self._TsneIterations

    @property
    def LagWindow(self) -> int:
        """
        Days after a release in which a turning point or rating change is
        attributed to it.
        """
        return self._LagWindow

    @property
    def MaxLag(self) -> int:
        return self._MaxLag

    @property
    def SmoothWindow(self) -> int:
        """
        Odd length of the moving average applied before the lag scan.
        """
        return self._SmoothWindow

    @property
    def Alpha(self) -> float:
        """
        Significance level of the lag scan.
        """
        return self._Alpha

    @property
    def SegmentThreshold(self) -> Optional[float]:
        """
        RMS residual below which a trend segment isn't split. None ('auto')
        means the median absolute daily rating change.
        """
        return self._SegmentThreshold

    @property
    def MinSlopeDelta(self) -> Optional[float]:
        """
        Smallest slope change counted as a turning point. None ('auto') means
        a tenth of the median absolute segment slope.
        """
        return self._MinSlopeDelta

    @property
    def FlatEps(self) -> float:
        """
        Slopes within this distance of zero count as flat.
        """
        return self._FlatEps

    @property
    def MinDf(self) -> int:
        """
        Minimum number of release texts a term must appear in.
        """
        return self._MinDf

    @property
    def TopTerms(self) -> int:
        return self._TopTerms

    @property
    def LassoFolds(self) -> int:
        return self._LassoFolds

    @property
    def LassoPathSize(self) -> int:
        return self._LassoPathSize

    @property
    def LaplaceAlpha(self) -> float:
        """
        Additive smoothing of the naive Bayes likelihoods.
        """
        return self._LaplaceAlpha

    @property
    def CvFolds(self) -> int:
        return self._CvFolds

    @property
    def TMin(self) -> int:
        """
        Shortest release interval considered by the recommender.
        """
        return self._TMin

    @property
    def TMax(self) -> int:
        """
        Longest release interval considered by the recommender.
        """
        return self._TMax

    @property
    def LabelMode(self) -> EffectLabelMode:
        """
        How release effects are labelled: by the change of mean rating
        ('rating') or of trend slope ('slope').
        """
        return self._LabelMode

    @property
    def Interactions(self) -> bool:
        """
        Whether the effect model has rank bucket × interval category features.

        Valid values: 'true', 'false'.
        """
        return self._Interactions


@dataclass(frozen=True)
class RunManifest:
    """
    What produced an output directory: tool version, options, inputs and
    the stages completed so far.
    """

    options: PipelineOptions = field(default_factory=PipelineOptions)
    inputs: Mapping[str, str] = field(default_factory=dict)
    stages: Tuple[str, ...] = ()
    run_id: Optional[str] = None
    tool_version: str = TOOL_VERSION

    def with_input(self, name: str, path: str) -> "RunManifest":
        inputs = dict(self.inputs)
        inputs[name] = path
        return replace(self, inputs=inputs)

    def with_stage(self, stage: str) -> "RunManifest":
        if stage in self.stages:
            return self
        return replace(self, stages=self.stages + (stage,))

    def serialize(self) -> str:
        header = [
            ("format", MANIFEST_FORMAT),
            ("version", MANIFEST_FORMAT_VERSION),
            ("tool_version", self.tool_version),
        ]
        if self.run_id is not None:
            header.append(("run_id", self.run_id))
        lines = [encode_record(header)]
        lines.append(encode_record([("options", self.options.to_query())]))
        for name in sorted(self.inputs):
            record = [("input", name), ("path", self.inputs[name])]
            lines.append(encode_record(record))
        for stage in self.stages:
            lines.append(encode_record([("stage", stage)]))
        return "".join(line + "\n" for line in lines)

    @classmethod
    def deserialize(cls, text: str) -> "RunManifest":
        lines = [line for line in text.splitlines() if line.strip()]
        try:
            header = decode_record(lines[0], 1)
            if header.get("format") != MANIFEST_FORMAT:
                raise ConfigError(f"Not a run manifest: {lines[0]!r}")
            if header.get("version") != MANIFEST_FORMAT_VERSION:
                raise ConfigError(
                    f"Unsupported manifest version: {header.get('version')!r}"
                )
            options = PipelineOptions()
            inputs: Dict[str, str] = {}
            stages: List[str] = []
            for number, line in enumerate(lines[1:], start=2):
                record = decode_record(line, number)
                if "options" in record:
                    options = PipelineOptions(record["options"])
                elif "input" in record:
                    inputs[record["input"]] = record["path"]
                elif "stage" in record:
                    stages.append(record["stage"])
                else:
                    raise ConfigError(f"line {number}: unknown manifest entry")
        except (IndexError, KeyError, ValidationError) as e:
            raise ConfigError(f"Invalid run manifest: {e}") from None
        return cls(
            options=options,
            inputs=inputs,
            stages=tuple(stages),
            run_id=header.get("run_id"),
            tool_version=header.get("tool_version", TOOL_VERSION),
        )

    def save(self, path: str) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            f.write(self.serialize())

    @classmethod
    def load(cls, path: str) -> "RunManifest":
        with open(path, encoding="utf-8") as f:
            return cls.deserialize(f.read())
