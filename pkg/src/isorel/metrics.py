"""Pair scoring, Spearman rank correlation, and cosine-distribution histograms."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .corpus import PairDataset, unique_sentences
from .errors import (
    IsorelError,
    MissingEmbeddingError,
    ScoringError,
    UndefinedCorrelationError,
    UndefinedCosineError,
    ValidationError,
)
from .providers import text_key
from .whitening import WhiteningParams, apply_whitening

HIST_BIN_COUNT = 20
HIST_RANGE = (-1.0, 1.0)


def cosine_similarity(a, b) -> float:
    """Cosine of two equal-length nonzero vectors, clamped to [-1, 1]."""
    va = np.asarray(a, dtype=np.float64)
    vb = np.asarray(b, dtype=np.float64)
    if va.ndim != 1 or vb.ndim != 1 or va.size != vb.size:
        raise ValidationError(
            f"cosine needs two equal-length vectors, got shapes {va.shape}, {vb.shape}"
        )
    na = float(np.linalg.norm(va))
    nb = float(np.linalg.norm(vb))
    if na == 0.0 or nb == 0.0:
        raise UndefinedCosineError("undefined cosine: zero vector")
    value = float(va @ vb) / (na * nb)
    return min(1.0, max(-1.0, value))


def average_ranks(values) -> np.ndarray:
    """Fractional 1-based ranks; ties receive the mean of the ranks they span."""
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 1:
        raise ValidationError("ranks are defined for 1-dimensional input")
    if not np.isfinite(arr).all():
        raise ValidationError("ranks are undefined for non-finite values")
    order = np.argsort(arr, kind="mergesort")
    sorted_vals = arr[order]
    ranks = np.empty(arr.size, dtype=np.float64)
    i = 0
    while i < arr.size:
        j = i
        while j + 1 < arr.size and sorted_vals[j + 1] == sorted_vals[i]:
            j += 1
        ranks[order[i : j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    return ranks


def spearman(x, y) -> float:
    """Pearson correlation of fractional ranks, clamped to [-1, 1].

    Raises UndefinedCorrelationError when either input has zero rank
    variance (all entries tied).
    """
    ax = np.asarray(x, dtype=np.float64)
    ay = np.asarray(y, dtype=np.float64)
    if ax.ndim != 1 or ay.ndim != 1 or ax.size != ay.size:
        raise ValidationError(
            f"spearman needs two equal-length vectors, got shapes {ax.shape}, {ay.shape}"
        )
    if ax.size < 2:
        raise ValidationError("spearman needs at least 2 observations")
    rx = average_ranks(ax)
    ry = average_ranks(ay)
    dx = rx - rx.mean()
    dy = ry - ry.mean()
    vx = float(dx @ dx)
    vy = float(dy @ dy)
    if vx == 0.0 or vy == 0.0:
        raise UndefinedCorrelationError(
            "undefined correlation: an input is constant"
        )
    rho = float(dx @ dy) / math.sqrt(vx * vy)
    return min(1.0, max(-1.0, rho))


def score_pairs(
    pairs: PairDataset, provider, params: WhiteningParams | None = None
) -> np.ndarray:
    """Cosine score for every pair, in dataset order.

    Sentences are embedded once per unique text; with ``params`` given both
    sides are whitened before the cosine (``params=None`` is the raw-encoder
    baseline). Provider and cosine failures re-raise as ScoringError tagged
    with the pair_id they hit.
    """
    texts = unique_sentences(pairs)
    try:
        emb = provider.get_embeddings(texts)
    except MissingEmbeddingError as err:
        raise ScoringError(str(err), pair_id=_first_affected_pair(pairs, err.keys)) from err
    if params is not None:
        emb = apply_whitening(params, emb)
    index = {t: i for i, t in enumerate(texts)}
    scores = np.empty(len(pairs.records), dtype=np.float64)
    for i, rec in enumerate(pairs.records):
        try:
            scores[i] = cosine_similarity(
                emb[index[rec.sentence_1]], emb[index[rec.sentence_2]]
            )
        except IsorelError as err:
            raise ScoringError(str(err), pair_id=rec.pair_id) from err
    return scores


def _first_affected_pair(pairs: PairDataset, missing_keys) -> str:
    missing = set(missing_keys)
    for rec in pairs.records:
        if text_key(rec.sentence_1) in missing or text_key(rec.sentence_2) in missing:
            return rec.pair_id
    return "<unknown>"


@dataclass(frozen=True)
class HistogramReport:
    """Fixed 20-bin histogram over [-1, 1] plus score moments."""

    bin_edges: tuple[float, ...]
    counts: tuple[int, ...]
    mean: float
    stddev: float


def histogram(scores) -> HistogramReport:
    """Bin scores into 20 uniform bins over [-1, 1] (final bin right-inclusive)."""
    arr = np.asarray(scores, dtype=np.float64)
    if arr.ndim != 1 or arr.size < 1:
        raise ValidationError("histogram needs a nonempty 1-dimensional score list")
    if not np.isfinite(arr).all():
        raise ValidationError("histogram scores must be finite")
    if arr.min() < HIST_RANGE[0] or arr.max() > HIST_RANGE[1]:
        raise ValidationError("histogram scores must lie in [-1, 1]")
    counts, edges = np.histogram(arr, bins=HIST_BIN_COUNT, range=HIST_RANGE)
    return HistogramReport(
        bin_edges=tuple(float(e) for e in edges),
        counts=tuple(int(c) for c in counts),
        mean=float(arr.mean()),
        stddev=float(arr.std()),
    )


def score_report(pairs: PairDataset, scores) -> dict:
    """Assemble the score-report object: n, spearman vs gold (null when
    fewer than two labels exist), raw scores, histogram."""
    arr = np.asarray(scores, dtype=np.float64)
    if arr.size != len(pairs.records):
        raise ValidationError(
            f"{arr.size} scores for {len(pairs.records)} pairs"
        )
    gold = [r.label for r in pairs.records if r.label is not None]
    rho = None
    if len(gold) >= 2:
        pred = [float(s) for r, s in zip(pairs.records, arr) if r.label is not None]
        rho = spearman(gold, pred)
    hist = histogram(arr)
    return {
        "n": int(arr.size),
        "spearman": rho,
        "scores": [float(s) for s in arr],
        "histogram": {
            "bin_edges": list(hist.bin_edges),
            "counts": list(hist.counts),
            "mean": hist.mean,
            "stddev": hist.stddev,
        },
    }
