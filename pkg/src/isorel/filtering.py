"""Source-language selection for a target language without labels.

Whitening is fitted once on the target language's text pool; every candidate
source language is then probed on its own labeled pairs, comparing Spearman
under the target-fitted whitening against the raw-embedding baseline. Sources
whose Spearman degrades beyond the tolerance are excluded, the survivors are
balanced and concatenated into the training pool, and a fresh fit on that
pool scores the target pairs.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .corpus import BalanceConfig, PairDataset, PairRecord, balance_language, unique_sentences
from .errors import (
    EmptyTrainingPoolError,
    IsorelError,
    ProbeError,
    ValidationError,
)
from .metrics import score_pairs, spearman
from .providers import text_key
from .whitening import WhiteningParams, fit_whitening


@dataclass(frozen=True)
class SourceProbe:
    """Outcome of testing one source language under target-fitted whitening."""

    lang: str
    rho_baseline: float
    rho_whitened: float
    margin: float
    kept: bool


@dataclass(frozen=True)
class FilterReport:
    """Per-source probes plus the kept languages, ordered by descending margin."""

    target_lang: str
    probes: tuple[SourceProbe, ...]
    kept_langs: tuple[str, ...]
    delta: float
    seed: int


def fit_pool_params(
    texts, provider, k_config: int, *, extra_texts=(), keep: str = "largest"
) -> WhiteningParams:
    """Fit whitening on a deduplicated text pool.

    The pool is ordered by content hash before embedding, so the fit does not
    depend on how the texts were concatenated.
    """
    pool = dict.fromkeys(texts)
    for t in extra_texts:
        pool.setdefault(t)
    if not pool:
        raise ValidationError("whitening fit pool is empty")
    ordered = sorted(pool, key=text_key)
    emb = provider.get_embeddings(ordered)
    return fit_whitening(emb, k_config, keep=keep)


def _single_lang(source: PairDataset) -> str:
    langs = source.langs
    if len(langs) != 1:
        raise ValidationError(
            f"source dataset must hold a single language, got {sorted(langs)}"
        )
    return next(iter(langs))


def _probe_with_params(
    params: WhiteningParams, source: PairDataset, provider, delta: float
) -> SourceProbe:
    lang = _single_lang(source)
    try:
        gold = source.gold()
        raw = score_pairs(source, provider, None)
        whitened = score_pairs(source, provider, params)
        rho_baseline = spearman(gold, raw)
        rho_whitened = spearman(gold, whitened)
    except IsorelError as err:
        raise ProbeError(str(err), lang=lang) from err
    margin = rho_whitened - rho_baseline
    return SourceProbe(
        lang=lang,
        rho_baseline=rho_baseline,
        rho_whitened=rho_whitened,
        margin=margin,
        kept=margin >= -delta,
    )


def probe_source(
    target_texts, source: PairDataset, provider, k_config: int, delta: float = 0.0
) -> SourceProbe:
    """Fit whitening on the target text pool and probe one labeled source."""
    target_texts = list(target_texts)
    if not target_texts:
        raise ValidationError("target text pool is empty")
    lang = _single_lang(source)
    try:
        params = fit_pool_params(target_texts, provider, k_config)
    except IsorelError as err:
        raise ProbeError(str(err), lang=lang) from err
    return _probe_with_params(params, source, provider, delta)


def filter_languages(
    target_texts,
    sources,
    provider,
    k_config: int,
    delta: float = 0.0,
    *,
    target_lang: str,
    seed: int = 42,
) -> FilterReport:
    """Probe every source under one target-fitted whitening and keep the
    sources whose margin is at least ``-delta``.

    Raises EmptyTrainingPoolError when everything is excluded; the caller may
    relax delta.
    """
    target_texts = list(target_texts)
    if not target_texts:
        raise ValidationError("target text pool is empty")
    sources = list(sources)
    if not sources:
        raise ValidationError("no source datasets given")
    if delta < 0:
        raise ValidationError("delta must be >= 0")
    langs = [_single_lang(src) for src in sources]
    if len(set(langs)) != len(langs):
        raise ValidationError(f"source languages must be pairwise distinct: {langs}")
    if target_lang in langs:
        raise ValidationError(
            f"target language {target_lang!r} must not appear among sources"
        )
    params = fit_pool_params(target_texts, provider, k_config)
    probes = tuple(
        _probe_with_params(params, src, provider, delta) for src in sources
    )
    kept = [p for p in probes if p.kept]
    if not kept:
        raise EmptyTrainingPoolError(
            "empty training pool: every source language was excluded"
        )
    kept.sort(key=lambda p: (-p.margin, p.lang))
    return FilterReport(
        target_lang=target_lang,
        probes=probes,
        kept_langs=tuple(p.lang for p in kept),
        delta=float(delta),
        seed=int(seed),
    )


def build_training_set(
    report: FilterReport, sources, cfg: BalanceConfig
) -> PairDataset:
    """Concatenate the balanced kept sources in kept order.

    Oversampling duplicates records; duplicated pair_ids get a ``__dupN``
    suffix so the merged set still satisfies per-file pair_id uniqueness.
    """
    by_lang: dict[str, PairDataset] = {}
    for src in sources:
        lang = _single_lang(src)
        if lang in by_lang:
            raise ValidationError(f"duplicate source dataset for language {lang!r}")
        by_lang[lang] = src
    records: list[PairRecord] = []
    for lang in report.kept_langs:
        if lang not in by_lang:
            raise ValidationError(f"no source dataset for kept language {lang!r}")
        records.extend(balance_language(by_lang[lang].records, cfg))
    return PairDataset(tuple(_dedupe_pair_ids(records)))


def _dedupe_pair_ids(records) -> list[PairRecord]:
    seen: dict[str, int] = {}
    out: list[PairRecord] = []
    for rec in records:
        count = seen.get(rec.pair_id, 0)
        seen[rec.pair_id] = count + 1
        if count == 0:
            out.append(rec)
        else:
            out.append(
                PairRecord(
                    pair_id=f"{rec.pair_id}__dup{count}",
                    lang=rec.lang,
                    sentence_1=rec.sentence_1,
                    sentence_2=rec.sentence_2,
                    label=rec.label,
                )
            )
    return out


def predict_target(
    training: PairDataset,
    target_pairs: PairDataset,
    provider,
    k_config: int,
    *,
    include_target_in_fit: bool = False,
) -> np.ndarray:
    """Fit whitening on the training sentences and score the target pairs.

    Scores come back in target dataset order. With ``include_target_in_fit``
    the target pairs' own sentences join the fit pool.
    """
    if not training.records:
        raise ValidationError("training dataset is empty")
    extra = unique_sentences(target_pairs) if include_target_in_fit else ()
    params = fit_pool_params(
        unique_sentences(training), provider, k_config, extra_texts=extra
    )
    return score_pairs(target_pairs, provider, params)


def filter_report_to_json(report: FilterReport) -> str:
    obj = {
        "target_lang": report.target_lang,
        "delta": report.delta,
        "probes": [
            {
                "lang": p.lang,
                "rho_baseline": p.rho_baseline,
                "rho_whitened": p.rho_whitened,
                "margin": p.margin,
                "kept": p.kept,
            }
            for p in report.probes
        ],
        "kept_langs": list(report.kept_langs),
    }
    return json.dumps(obj)
