"""Language-tagged sentence-pair datasets: loading, validation, balancing.

The on-disk format is a UTF-8 CSV with the header row
``pair_id,lang,sentence_1,sentence_2,label`` and RFC-4180 quoting. The label
column may be left empty for unlabeled data; when present it must be a real
number in [0, 1].
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DatasetParseError, ValidationError
from .ioutil import atomic_write

CSV_HEADER = ("pair_id", "lang", "sentence_1", "sentence_2", "label")

DEFAULT_TARGET_COUNT = 1000
DEFAULT_SEED = 42


@dataclass(frozen=True)
class PairRecord:
    """One sentence pair with an optional relatedness label in [0, 1]."""

    pair_id: str
    lang: str
    sentence_1: str
    sentence_2: str
    label: float | None = None


@dataclass(frozen=True)
class PairDataset:
    """Ordered, immutable collection of pair records."""

    records: tuple[PairRecord, ...]

    @property
    def langs(self) -> set[str]:
        return {r.lang for r in self.records}

    def __len__(self) -> int:
        return len(self.records)

    def fully_labeled(self) -> bool:
        return all(r.label is not None for r in self.records)

    def gold(self) -> np.ndarray:
        """Gold labels as an array; requires every record to be labeled."""
        if not self.records:
            raise ValidationError("dataset has no records")
        if not self.fully_labeled():
            missing = next(r.pair_id for r in self.records if r.label is None)
            raise ValidationError(
                f"dataset is not fully labeled (first unlabeled pair: {missing!r})"
            )
        return np.array([r.label for r in self.records], dtype=np.float64)


@dataclass(frozen=True)
class BalanceConfig:
    """Per-language record count to balance to, and the sampling seed."""

    target_count: int = DEFAULT_TARGET_COUNT
    seed: int = DEFAULT_SEED

    def __post_init__(self):
        if self.target_count < 1:
            raise ValidationError("balance target_count must be >= 1")
        if not 0 <= int(self.seed) < 2**64:
            raise ValidationError("balance seed must fit in 64 unsigned bits")


def _validated_record(
    pair_id: str, lang: str, s1: str, s2: str, raw_label: str, line: int
) -> PairRecord:
    s1 = s1.strip()
    s2 = s2.strip()
    if not pair_id:
        raise ValidationError(f"line {line}: empty pair_id")
    if not lang:
        raise ValidationError(f"line {line}: pair {pair_id!r} has empty lang")
    if not s1 or not s2:
        raise ValidationError(
            f"line {line}: pair {pair_id!r} has an empty sentence after trimming"
        )
    label: float | None = None
    raw_label = raw_label.strip()
    if raw_label:
        try:
            label = float(raw_label)
        except ValueError:
            raise DatasetParseError(
                f"pair {pair_id!r}: label {raw_label!r} is not a decimal real",
                line=line,
            ) from None
        if not 0.0 <= label <= 1.0:
            raise ValidationError(
                f"line {line}: pair {pair_id!r} label {label} outside [0, 1]"
            )
    return PairRecord(pair_id, lang, s1, s2, label)


def load_dataset(path) -> PairDataset:
    """Parse a dataset CSV, preserving row order.

    Raises DatasetParseError for malformed rows (with the line number) and
    ValidationError for labels outside [0, 1], duplicate pair_ids, or empty
    sentences.
    """
    path = Path(path)
    if not path.is_file():
        raise ValidationError(f"dataset file not found: {path}")
    records: list[PairRecord] = []
    seen: set[str] = set()
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DatasetParseError("missing header row", line=1) from None
        except csv.Error as err:
            raise DatasetParseError(str(err), line=1) from None
        if tuple(header) != CSV_HEADER:
            raise DatasetParseError(
                f"expected header {','.join(CSV_HEADER)!r}, got {','.join(header)!r}",
                line=1,
            )
        while True:
            try:
                row = next(reader)
            except StopIteration:
                break
            except csv.Error as err:
                raise DatasetParseError(str(err), line=reader.line_num) from None
            line = reader.line_num
            if len(row) != len(CSV_HEADER):
                raise DatasetParseError(
                    f"expected {len(CSV_HEADER)} fields, got {len(row)}", line=line
                )
            record = _validated_record(*row, line=line)
            if record.pair_id in seen:
                raise ValidationError(
                    f"line {line}: duplicate pair_id {record.pair_id!r}"
                )
            seen.add(record.pair_id)
            records.append(record)
    return PairDataset(tuple(records))


def save_dataset(ds: PairDataset, path) -> None:
    """Serialize a dataset back to the CSV schema (atomic write).

    Loading the written file yields a dataset equal to ``ds`` up to float
    formatting of labels.
    """
    seen: set[str] = set()
    for rec in ds.records:
        if rec.pair_id in seen:
            raise ValidationError(f"duplicate pair_id {rec.pair_id!r} in dataset")
        seen.add(rec.pair_id)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for rec in ds.records:
        label = "" if rec.label is None else repr(float(rec.label))
        writer.writerow([rec.pair_id, rec.lang, rec.sentence_1, rec.sentence_2, label])
    atomic_write(path, buf.getvalue())


def balance_language(records, cfg: BalanceConfig) -> list[PairRecord]:
    """Balance a single language's records to exactly ``cfg.target_count``.

    More records than the target: a seeded uniform subsample without
    replacement (input order preserved). Fewer: every input record once plus
    uniformly resampled duplicates. Equal: the input unchanged. Deterministic
    for a fixed seed.
    """
    recs = list(records)
    if not recs:
        raise ValidationError("cannot balance an empty record list")
    langs = {r.lang for r in recs}
    if len(langs) != 1:
        raise ValidationError(
            f"balance_language expects a single language, got {sorted(langs)}"
        )
    n = len(recs)
    target = cfg.target_count
    if n == target:
        return recs
    rng = np.random.default_rng(cfg.seed)
    if n > target:
        idx = np.sort(rng.choice(n, size=target, replace=False))
        return [recs[i] for i in idx]
    extra = rng.integers(0, n, size=target - n)
    return recs + [recs[i] for i in extra]


def unique_sentences(ds: PairDataset) -> list[str]:
    """Deduplicated sentence pool, first-occurrence order, exact-string equality."""
    pool: dict[str, None] = {}
    for rec in ds.records:
        pool.setdefault(rec.sentence_1)
        pool.setdefault(rec.sentence_2)
    return list(pool)
