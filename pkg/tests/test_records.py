# -*- coding: utf-8 -*-
import os
from datetime import date
from tempfile import TemporaryDirectory
from unittest import TestCase

from releasetrends.datagen import GeneratorConfig, generate
from releasetrends.exceptions import DuplicateDay, MalformedRecord, ValidationError
from releasetrends.records import (
    decode_record,
    encode_record,
    parse_snapshots,
    read_snapshot_file,
    record_to_snapshot,
    serialize_snapshots,
    snapshot_to_record,
    write_snapshot_file,
)
from releasetrends.snapshots import AppSnapshot

LINE_1 = "app_id=a&category=TOOLS&day=2016-11-25&rank=3&rating=4.2&version=1.0"
LINE_2 = "app_id=a&category=TOOLS&day=2016-11-26&rank=4&rating=4.3&version=1.1"


class TestRecordCodec(TestCase):
    def test_encode_record_escapes_separators(self) -> None:
        line = encode_record([("whats_new", "Fixes & tweaks = 100%\nmore")])
        self.assertNotIn("\n", line)
        self.assertEqual(line.count("&"), 0)
        self.assertEqual(line.count("="), 1)
        self.assertEqual(
            decode_record(line), {"whats_new": "Fixes & tweaks = 100%\nmore"}
        )

    def test_decode_record_rejects_repeated_fields(self) -> None:
        with self.assertRaises(MalformedRecord) as cm:
            decode_record("a=1&a=2", 7)
        self.assertEqual(cm.exception.line_number, 7)

    def test_decode_record_rejects_garbage(self) -> None:
        with self.assertRaises(MalformedRecord):
            decode_record("no separator here", 3)

    def test_snapshot_to_record(self) -> None:
        snapshot = AppSnapshot(
            app_id="com.example",
            category="TOOLS",
            day=date(2016, 11, 25),
            rating=4.2,
            version="1.0.3",
            rank=131,
        )
        line = snapshot_to_record(snapshot)
        self.assertEqual(
            line,
            "app_id=com.example&category=TOOLS&day=2016-11-25&rank=131"
            "&rating=4.2&version=1.0.3",
        )
        self.assertEqual(record_to_snapshot(line), snapshot)

    def test_record_to_snapshot_optional_fields(self) -> None:
        snapshot = record_to_snapshot(
            "app_id=a&category=C&day=2017-01-02&rating=3&version=2"
        )
        self.assertIsNone(snapshot.rank)
        self.assertIsNone(snapshot.whats_new)
        self.assertEqual(snapshot.rating, 3.0)

        snapshot = record_to_snapshot(
            "app_id=a&category=C&day=2017-01-02&rating=3&version=2&whats_new="
        )
        self.assertEqual(snapshot.whats_new, "")

    def test_record_to_snapshot_errors(self) -> None:
        with self.assertRaises(MalformedRecord) as cm1:
            record_to_snapshot("app_id=a&category=C&day=2017-01-02&rating=3", 5)
        self.assertIn("Missing field: version", cm1.exception.args[0])
        self.assertEqual(cm1.exception.line_number, 5)

        with self.assertRaises(MalformedRecord) as cm2:
            record_to_snapshot(LINE_1 + "&colour=red&size=9", 2)
        self.assertIn("Unknown fields: colour, size", cm2.exception.args[0])

        with self.assertRaises(MalformedRecord):
            record_to_snapshot(LINE_1.replace("2016-11-25", "25/11/2016"))
        with self.assertRaises(MalformedRecord):
            record_to_snapshot(LINE_1.replace("rating=4.2", "rating=high"))
        with self.assertRaises(MalformedRecord):
            record_to_snapshot(LINE_1.replace("rank=3", "rank=top"))

        # Out of range values.
        with self.assertRaises(ValidationError) as cm3:
            record_to_snapshot(LINE_1.replace("rating=4.2", "rating=5.7"), 9)
        self.assertIn("line 9", cm3.exception.args[0])
        self.assertNotIsInstance(cm3.exception, MalformedRecord)
        with self.assertRaises(ValidationError):
            record_to_snapshot(LINE_1.replace("rank=3", "rank=0"))


class TestParseSnapshots(TestCase):
    def test_groups_lines_by_app(self) -> None:
        histories = parse_snapshots([LINE_2, "", LINE_1])
        self.assertEqual(len(histories), 1)
        history = histories[0]
        self.assertEqual(history.app_id, "a")
        self.assertEqual(len(history.snapshots), 2)
        self.assertEqual(
            [s.day for s in history.snapshots],
            [date(2016, 11, 25), date(2016, 11, 26)],
        )

    def test_same_app_in_two_categories(self) -> None:
        histories = parse_snapshots([LINE_1, LINE_1.replace("TOOLS", "GAMES")])
        self.assertEqual([h.category for h in histories], ["GAMES", "TOOLS"])

    def test_duplicate_day(self) -> None:
        with self.assertRaises(DuplicateDay) as cm:
            parse_snapshots([LINE_1, LINE_2, LINE_1])
        self.assertIn("line 3", cm.exception.args[0])

    def test_error_has_line_number(self) -> None:
        with self.assertRaises(MalformedRecord) as cm:
            parse_snapshots([LINE_1, "", "rubbish"])
        self.assertEqual(cm.exception.line_number, 3)

    def test_empty_input(self) -> None:
        self.assertEqual(parse_snapshots([]), [])
        self.assertEqual(serialize_snapshots([]), "")

    def test_generated_log(self) -> None:
        lines, _ = generate(GeneratorConfig(n_apps=3, span_days=105, seed=1))
        histories = parse_snapshots(lines)
        self.assertEqual(len(histories), 3)
        for history in histories:
            self.assertEqual(len(history.snapshots), 105)

    def test_parse_serialize_parse_is_identical(self) -> None:
        lines, _ = generate(
            GeneratorConfig(n_apps=4, span_days=60, seed=2, crawl_gap_rate=0.1)
        )
        text = serialize_snapshots(parse_snapshots(lines))
        again = serialize_snapshots(parse_snapshots(text.splitlines()))
        self.assertEqual(again, text)
        self.assertEqual(sorted(text.splitlines()), sorted(lines))

    def test_read_and_write_file(self) -> None:
        histories = parse_snapshots([LINE_1, LINE_2])
        with TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "snapshots.log")
            write_snapshot_file(path, histories)
            with open(path, encoding="utf-8") as f:
                self.assertEqual(f.read(), LINE_1 + "\n" + LINE_2 + "\n")
            self.assertEqual(read_snapshot_file(path), histories)
