"""Synthetic multilingual fixture with planted pair structure.

Geometry (dim 16, shared +5 offset on every component so the raw space is
anisotropic):

* coords 0-3  "semantic": std 2; the two sentences of a pair correlate here
  with strength equal to the pair's planted gold score,
* coord  4    "style": std-10 noise shared by every language; it dominates
  raw cosine variation and drowns the semantic signal until whitening
  rescales it,
* coords 5-11 "neutral": independent std-1 noise,
* coords 12-15 "rogue": std 0.5 everywhere except the adversarial source,
  whose sentences carry std-30 noise there.

With k=5 a whitening fit on clean text keeps the style direction plus the
whole semantic block, so whitened cosines track the planted gold; a fit
polluted by the adversarial source spends its directions on the rogue block
and destroys the signal. Labels are assigned from scores computed under
target-fitted params: friendly sources get the normalized ranks of their
whitened scores (Spearman +1), the adversarial source the reversed ranks
(Spearman -1).
"""

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from isorel.corpus import PairDataset, PairRecord, save_dataset
from isorel.filtering import fit_pool_params
from isorel.metrics import average_ranks, score_pairs
from isorel.providers import FileStoreProvider, write_store

DIM = 16
K_CONFIG = 5
BIAS = 5.0
FRIENDLY_LANGS = ("aaa", "bbb", "ccc")
ADVERSARIAL_LANG = "zzz"
TARGET_LANG = "tgt"


@dataclass
class SynthFixture:
    store_path: Path
    provider: FileStoreProvider
    target_pairs: PairDataset
    target_gold: np.ndarray
    sources: list[PairDataset]
    friendly_langs: tuple
    adversarial_lang: str
    target_lang: str
    target_params: object


def _pair_vectors(rng, gold, rogue_scale):
    u = rng.standard_normal(4)
    w = rng.standard_normal(4)
    mix = gold * u + math.sqrt(max(0.0, 1.0 - gold * gold)) * w
    vecs = []
    for sem in (2.0 * u, 2.0 * mix):
        v = np.empty(DIM)
        v[0:4] = sem
        v[4] = 10.0 * rng.standard_normal()
        v[5:12] = rng.standard_normal(7)
        v[12:16] = rogue_scale * rng.standard_normal(4)
        vecs.append(v + BIAS)
    return vecs


def _build_lang(rng, lang, n_pairs, rogue_scale, vectors):
    records = []
    golds = np.empty(n_pairs)
    for i in range(n_pairs):
        gold = rng.uniform()
        golds[i] = gold
        va, vb = _pair_vectors(rng, gold, rogue_scale)
        ta = f"{lang}-{i:04d}-a"
        tb = f"{lang}-{i:04d}-b"
        vectors[ta] = (lang, va)
        vectors[tb] = (lang, vb)
        records.append(PairRecord(f"{lang}{i:04d}", lang, ta, tb, None))
    return PairDataset(tuple(records)), golds


def _with_labels(ds, labels):
    records = tuple(
        PairRecord(r.pair_id, r.lang, r.sentence_1, r.sentence_2, float(v))
        for r, v in zip(ds.records, labels)
    )
    return PairDataset(records)


def build_fixture(tmp_path, n_target=120, n_source=120, seed=7) -> SynthFixture:
    rng = np.random.default_rng(seed)
    vectors: dict[str, tuple] = {}

    target_pairs, target_gold = _build_lang(rng, TARGET_LANG, n_target, 0.5, vectors)
    raw_sources = {}
    for lang in FRIENDLY_LANGS:
        raw_sources[lang], _ = _build_lang(rng, lang, n_source, 0.5, vectors)
    raw_sources[ADVERSARIAL_LANG], _ = _build_lang(
        rng, ADVERSARIAL_LANG, n_source, 30.0, vectors
    )

    store_path = Path(tmp_path) / "store.jsonl"
    write_store(
        store_path,
        ((text, lang, vec) for text, (lang, vec) in vectors.items()),
        meta={"model": "synthetic-planted", "pooling": "none", "dim": DIM},
    )
    provider = FileStoreProvider(store_path)

    target_texts = [t for r in target_pairs.records for t in (r.sentence_1, r.sentence_2)]
    params = fit_pool_params(target_texts, provider, K_CONFIG)

    sources = []
    for lang in FRIENDLY_LANGS + (ADVERSARIAL_LANG,):
        ds = raw_sources[lang]
        whitened = score_pairs(ds, provider, params)
        ranks = average_ranks(whitened)
        n = len(ranks)
        if lang == ADVERSARIAL_LANG:
            labels = (n - ranks) / (n - 1)
        else:
            labels = (ranks - 1) / (n - 1)
        sources.append(_with_labels(ds, labels))

    return SynthFixture(
        store_path=store_path,
        provider=provider,
        target_pairs=target_pairs,
        target_gold=target_gold,
        sources=sources,
        friendly_langs=FRIENDLY_LANGS,
        adversarial_lang=ADVERSARIAL_LANG,
        target_lang=TARGET_LANG,
        target_params=params,
    )


def write_fixture_files(fix: SynthFixture, outdir, target_count=100, seed=42):
    """Emit the CSV/JSON files a CLI run needs; returns a path dict."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    paths = {"store": fix.store_path, "sources": []}

    target_csv = outdir / "target.csv"
    save_dataset(fix.target_pairs, target_csv)
    paths["target"] = target_csv

    labeled_csv = outdir / "target_labeled.csv"
    save_dataset(_with_labels(fix.target_pairs, fix.target_gold), labeled_csv)
    paths["target_labeled"] = labeled_csv

    for ds in fix.sources:
        lang = next(iter(ds.langs))
        p = outdir / f"source_{lang}.csv"
        save_dataset(ds, p)
        paths["sources"].append(p)

    config = outdir / "config.json"
    config.write_text(
        json.dumps(
            {
                "provider": {
                    "kind": "file_store",
                    "path": str(fix.store_path.resolve()),
                },
                "k": K_CONFIG,
                "balance": {"target_count": target_count, "seed": seed},
                "delta": 0.0,
            },
            indent=2,
        )
        + "\n",
        encoding="utf-8",
    )
    paths["config"] = config
    return paths
