# -*- coding: utf-8 -*-
"""
Snapshot log codec.

A snapshot log is UTF-8 text with one record per line. Each record is a
URL-encoded key/value string, for example::

    app_id=com.example&category=TOOLS&day=2016-11-25&rank=131&rating=4.2&version=1.0.3

Fields ``app_id``, ``category``, ``day`` (ISO-8601 date), ``rating`` and
``version`` are required; ``rank`` and ``whats_new`` are optional and are
omitted when absent. Blank lines are ignored. Logs are append-only, so
records of one app may be spread through the file in any order.
"""
from collections import defaultdict
from datetime import date
from typing import (
    Dict,
    Iterable,
    Iterator,
    List,
    Optional,
    Sequence,
    TextIO,
    Tuple,
)
from urllib.parse import parse_qsl, quote, urlencode

from releasetrends.exceptions import DuplicateDay, MalformedRecord, ValidationError
from releasetrends.snapshots import AppHistory, AppSnapshot

FIELD_APP_ID = "app_id"
FIELD_CATEGORY = "category"
FIELD_DAY = "day"
FIELD_RANK = "rank"
FIELD_RATING = "rating"
FIELD_VERSION = "version"
FIELD_WHATS_NEW = "whats_new"
SNAPSHOT_FIELDS = [
    FIELD_APP_ID,
    FIELD_CATEGORY,
    FIELD_DAY,
    FIELD_RANK,
    FIELD_RATING,
    FIELD_VERSION,
    FIELD_WHATS_NEW,
]
REQUIRED_SNAPSHOT_FIELDS = [
    FIELD_APP_ID,
    FIELD_CATEGORY,
    FIELD_DAY,
    FIELD_RATING,
    FIELD_VERSION,
]


def encode_record(items: Sequence[Tuple[str, str]]) -> str:
    """
    Encodes ordered key/value pairs as a single line of text.
    """
    return urlencode(list(items), quote_via=quote, safe="")


def decode_record(line: str, line_number: Optional[int] = None) -> Dict[str, str]:
    """
    Decodes a line written by encode_record(). Repeated keys are rejected.
    """
    try:
        pairs = parse_qsl(line.strip(), keep_blank_values=True, strict_parsing=True)
    except ValueError as e:
        raise MalformedRecord(str(e), line_number) from None
    record: Dict[str, str] = {}
    for key, value in pairs:
        if key in record:
            raise MalformedRecord(f"Repeated field: {key}", line_number)
        record[key] = value
    return record


def format_float(value: float) -> str:
    # repr() is the shortest string that round-trips exactly.
    return repr(float(value))


def snapshot_to_record(snapshot: AppSnapshot) -> str:
    items = [
        (FIELD_APP_ID, snapshot.app_id),
        (FIELD_CATEGORY, snapshot.category),
        (FIELD_DAY, snapshot.day.isoformat()),
    ]
    if snapshot.rank is not None:
        items.append((FIELD_RANK, str(snapshot.rank)))
    items.append((FIELD_RATING, format_float(snapshot.rating)))
    items.append((FIELD_VERSION, snapshot.version))
    if snapshot.whats_new is not None:
        items.append((FIELD_WHATS_NEW, snapshot.whats_new))
    return encode_record(items)


def record_to_snapshot(line: str, line_number: Optional[int] = None) -> AppSnapshot:
    record = decode_record(line, line_number)
    _validate_field_names(record, line_number)
    try:
        day = date.fromisoformat(record[FIELD_DAY])
    except ValueError:
        raise MalformedRecord(
            f"Invalid day: {record[FIELD_DAY]!r}", line_number
        ) from None
    try:
        rating = float(record[FIELD_RATING])
    except ValueError:
        raise MalformedRecord(
            f"Invalid rating: {record[FIELD_RATING]!r}", line_number
        ) from None
    rank: Optional[int] = None
    if FIELD_RANK in record:
        try:
            rank = int(record[FIELD_RANK])
        except ValueError:
            raise MalformedRecord(
                f"Invalid rank: {record[FIELD_RANK]!r}", line_number
            ) from None
    try:
        return AppSnapshot(
            app_id=record[FIELD_APP_ID],
            category=record[FIELD_CATEGORY],
            day=day,
            rating=rating,
            version=record[FIELD_VERSION],
            rank=rank,
            whats_new=record.get(FIELD_WHATS_NEW),
        )
    except ValidationError as e:
        if line_number is None:
            raise
        raise type(e)(f"line {line_number}: {e}") from None


def _validate_field_names(record: Dict[str, str], line_number: Optional[int]) -> None:
    invalid_fields = [f for f in record if f not in SNAPSHOT_FIELDS]
    if len(invalid_fields) > 0:
        plural = "s" if len(invalid_fields) > 1 else ""
        joined_fields = ", ".join(invalid_fields)
        raise MalformedRecord(f"Unknown field{plural}: {joined_fields}", line_number)
    missing_fields = [f for f in REQUIRED_SNAPSHOT_FIELDS if f not in record]
    if len(missing_fields) > 0:
        plural = "s" if len(missing_fields) > 1 else ""
        joined_fields = ", ".join(missing_fields)
        raise MalformedRecord(f"Missing field{plural}: {joined_fields}", line_number)


def parse_snapshots(stream: Iterable[str]) -> List[AppHistory]:
    """
    Parses a snapshot log into per-app histories.

    Histories are keyed by (app_id, category), so an app listed in two
    categories yields two histories. Histories are returned sorted by
    app_id then category, each with day-ordered snapshots.
    """
    grouped: Dict[Tuple[str, str], Dict[date, AppSnapshot]] = defaultdict(dict)
    for line_number, line in enumerate(stream, start=1):
        if not line.strip():
            continue
        snapshot = record_to_snapshot(line, line_number)
        days = grouped[(snapshot.app_id, snapshot.category)]
        if snapshot.day in days:
            raise DuplicateDay(
                f"line {line_number}: duplicate day {snapshot.day} for app"
                f" {snapshot.app_id!r}"
            )
        days[snapshot.day] = snapshot

    return [
        AppHistory(
            app_id=app_id,
            category=category,
            snapshots=tuple(days[d] for d in sorted(days)),
        )
        for (app_id, category), days in sorted(grouped.items())
    ]


def iter_snapshot_records(histories: Iterable[AppHistory]) -> Iterator[str]:
    for history in histories:
        for snapshot in history.snapshots:
            yield snapshot_to_record(snapshot)


def serialize_snapshots(histories: Iterable[AppHistory]) -> str:
    """
    Serializes histories as a snapshot log, one record per line.
    """
    return "".join(line + "\n" for line in iter_snapshot_records(histories))


def read_snapshot_file(path: str) -> List[AppHistory]:
    with open(path, encoding="utf-8") as f:
        return parse_snapshots(f)


def write_snapshot_file(path: str, histories: Iterable[AppHistory]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        _write_lines(f, iter_snapshot_records(histories))


def _write_lines(f: TextIO, lines: Iterable[str]) -> None:
    for line in lines:
        f.write(line)
        f.write("\n")
