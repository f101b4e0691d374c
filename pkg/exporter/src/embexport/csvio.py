"""Minimal reader for the pair-CSV interchange format."""

from __future__ import annotations

import csv
from pathlib import Path

EXPECTED_HEADER = ("pair_id", "lang", "sentence_1", "sentence_2", "label")


class CsvFormatError(Exception):
    pass


def read_unique_sentences(path) -> list[tuple[str, str]]:
    """Return ``(sentence, lang)`` pairs, deduplicated by exact sentence text
    in first-occurrence order. The lang is the first language the sentence
    was seen under."""
    path = Path(path)
    if not path.is_file():
        raise CsvFormatError(f"input CSV not found: {path}")
    pool: dict[str, str] = {}
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise CsvFormatError(f"{path}: missing header row") from None
        if tuple(header) != EXPECTED_HEADER:
            raise CsvFormatError(
                f"{path}: expected header {','.join(EXPECTED_HEADER)!r}"
            )
        for row in reader:
            if len(row) != len(EXPECTED_HEADER):
                raise CsvFormatError(
                    f"{path} line {reader.line_num}: expected "
                    f"{len(EXPECTED_HEADER)} fields, got {len(row)}"
                )
            _, lang, s1, s2, _ = row
            for sentence in (s1.strip(), s2.strip()):
                if not sentence:
                    raise CsvFormatError(
                        f"{path} line {reader.line_num}: empty sentence"
                    )
                pool.setdefault(sentence, lang)
    return list(pool.items())
