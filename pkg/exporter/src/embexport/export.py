"""Export unique sentences from a pair CSV into a JSONL embedding store."""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
from dataclasses import dataclass
from pathlib import Path

from .csvio import CsvFormatError, read_unique_sentences
from .encoders import EncoderError, make_encoder

DEFAULT_MODEL = "xlm-roberta-base"


class ExportError(Exception):
    pass


@dataclass
class ExportJob:
    input_csv: str
    output_jsonl: str
    model_name: str = DEFAULT_MODEL
    pooling: str = "mean_last_layer"
    batch_size: int = 32


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def export(job: ExportJob) -> int:
    """Run an export job; returns the number of records written.

    The output holds one meta line followed by one record per unique
    sentence, keyed by the SHA-256 of the sentence text.
    """
    try:
        sentences = read_unique_sentences(job.input_csv)
    except CsvFormatError as err:
        raise ExportError(str(err)) from err
    if not sentences:
        raise ExportError(f"no sentences found in {job.input_csv}")
    try:
        encoder = make_encoder(job.model_name, job.pooling, job.batch_size)
        matrix = encoder.encode([text for text, _ in sentences])
    except EncoderError as err:
        raise ExportError(str(err)) from err

    meta = {"model": encoder.name, "pooling": job.pooling, "dim": encoder.dim}
    lines = [json.dumps({"meta": meta})]
    for (text, lang), row in zip(sentences, matrix):
        key = hashlib.sha256(text.encode("utf-8")).hexdigest()
        values = ",".join(_fmt(v) for v in row)
        lines.append(
            f'{{"key":"{key}","lang":{json.dumps(lang)},"dim":{encoder.dim},'
            f'"vector":[{values}]}}'
        )
    _atomic_write(job.output_jsonl, "\n".join(lines) + "\n")
    return len(sentences)


def _atomic_write(path, text: str) -> None:
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=target.parent, prefix=target.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, target)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise
