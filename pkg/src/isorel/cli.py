"""Command-line entry points: fit, score, filter, pipeline, export-hist.

Configuration lives in a single JSON document (see README for the schema);
command-line flags override file values. All outputs are written atomically
and every command is deterministic for a fixed config, so reruns reproduce
files byte for byte. Failures print a machine-readable error object to
stderr and exit nonzero.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

from .corpus import (
    BalanceConfig,
    PairDataset,
    balance_language,
    load_dataset,
    save_dataset,
    unique_sentences,
)
from .errors import IsorelError, ValidationError
from .filtering import (
    build_training_set,
    filter_languages,
    filter_report_to_json,
    fit_pool_params,
)
from .ioutil import atomic_write
from .metrics import histogram, score_pairs, score_report
from .providers import ProviderConfig, make_provider
from .whitening import load_params, save_params

DEFAULT_K = 256

PIPELINE_FILES = {
    "filter_report": "filter_report.json",
    "training": "training.csv",
    "params": "params.json",
    "score_report": "score_report.json",
    "predictions": "predictions.csv",
}


@dataclass
class RunConfig:
    """Resolved run configuration after merging the config file and flags."""

    provider: ProviderConfig
    k: int = DEFAULT_K
    balance: BalanceConfig = field(default_factory=BalanceConfig)
    delta: float = 0.0
    include_target_in_fit: bool = False

    def __post_init__(self):
        if self.k < 1:
            raise ValidationError("k must be >= 1")
        if self.delta < 0:
            raise ValidationError("delta must be >= 0")


def load_run_config(path: str | None, args: argparse.Namespace) -> RunConfig:
    raw: dict = {}
    if path is not None:
        cfg_path = Path(path)
        if not cfg_path.is_file():
            raise ValidationError(f"config file not found: {cfg_path}")
        try:
            raw = json.loads(cfg_path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as err:
            raise ValidationError(f"config file {cfg_path} is not valid JSON: {err}")
        if not isinstance(raw, dict):
            raise ValidationError("config file must hold a JSON object")
    prov = raw.get("provider")
    if prov is None:
        raise ValidationError(
            "no provider configured (pass --config with a provider section)"
        )
    if not isinstance(prov, dict) or "kind" not in prov:
        raise ValidationError("config provider section needs at least a kind")
    provider_cfg = ProviderConfig(
        kind=prov["kind"],
        dim=prov.get("dim"),
        path=_resolve_relative(prov.get("path"), path),
        endpoint=prov.get("endpoint"),
        toy_seed=int(prov.get("toy_seed", 42)),
    )
    balance_raw = raw.get("balance", {})
    if not isinstance(balance_raw, dict):
        raise ValidationError("config balance section must be an object")
    balance = BalanceConfig(
        target_count=int(balance_raw.get("target_count", 1000)),
        seed=int(balance_raw.get("seed", 42)),
    )
    k = int(raw.get("k", DEFAULT_K))
    delta = float(raw.get("delta", 0.0))
    include_target = bool(raw.get("include_target_in_fit", False))

    if getattr(args, "k", None) is not None:
        k = args.k
    if getattr(args, "seed", None) is not None:
        balance = BalanceConfig(target_count=balance.target_count, seed=args.seed)
    if getattr(args, "delta", None) is not None:
        delta = args.delta
    if getattr(args, "include_target_in_fit", False):
        include_target = True
    return RunConfig(
        provider=provider_cfg,
        k=k,
        balance=balance,
        delta=delta,
        include_target_in_fit=include_target,
    )


def _resolve_relative(value: str | None, config_path: str | None) -> str | None:
    # Paths in a config file are relative to the file, not the CWD.
    if value is None or config_path is None:
        return value
    candidate = Path(value)
    if candidate.is_absolute():
        return value
    return str(Path(config_path).parent / candidate)


def _require_file(path, what: str) -> Path:
    p = Path(path)
    if not p.is_file():
        raise ValidationError(f"{what} not found: {p}")
    return p


def _score_report_json(report: dict) -> str:
    return json.dumps(report) + "\n"


def _print_score_table(report: dict) -> None:
    rho = report["spearman"]
    print(f"pairs     {report['n']}")
    print(f"spearman  {'n/a' if rho is None else format(rho, '.6f')}")
    print(f"mean      {report['histogram']['mean']:.6f}")
    print(f"stddev    {report['histogram']['stddev']:.6f}")


def _predictions_csv(pairs: PairDataset, scores) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["pair_id", "score"])
    for rec, value in zip(pairs.records, scores):
        writer.writerow([rec.pair_id, repr(float(value))])
    return buf.getvalue()


def cmd_fit(cfg: RunConfig, dataset_path, out_path) -> None:
    ds = load_dataset(_require_file(dataset_path, "dataset"))
    provider = make_provider(cfg.provider)
    params = fit_pool_params(unique_sentences(ds), provider, cfg.k)
    save_params(out_path, params)
    print(f"fit: {len(ds)} pairs, dim {params.dim}, k {params.k}, "
          f"fit_count {params.fit_count}")
    print(f"fingerprint: {params.fingerprint}")


def cmd_score(
    cfg: RunConfig, dataset_path, params_path, no_whitening: bool, out_path
) -> None:
    if params_path is not None and no_whitening:
        raise ValidationError("--no-whitening conflicts with --params")
    ds = load_dataset(_require_file(dataset_path, "dataset"))
    params = None
    if params_path is not None:
        params = load_params(_require_file(params_path, "params file"))
    provider = make_provider(cfg.provider)
    scores = score_pairs(ds, provider, params)
    report = score_report(ds, scores)
    atomic_write(out_path, _score_report_json(report))
    _print_score_table(report)


def _load_sources(paths) -> list[PairDataset]:
    return [load_dataset(_require_file(p, "source dataset")) for p in paths]


def _balanced_sources(sources, cfg: RunConfig) -> list[PairDataset]:
    # Balancing happens before probing, so probes and training see the
    # same per-language record count.
    return [
        PairDataset(tuple(balance_language(src.records, cfg.balance)))
        for src in sources
    ]


def _target_lang(ds: PairDataset) -> str:
    langs = ds.langs
    if len(langs) != 1:
        raise ValidationError(
            f"target dataset must hold a single language, got {sorted(langs)}"
        )
    return next(iter(langs))


def _print_filter_table(report) -> None:
    print(f"target {report.target_lang}  delta {report.delta}")
    for p in report.probes:
        mark = "keep" if p.kept else "drop"
        print(
            f"  {p.lang:8s} baseline {p.rho_baseline:+.4f}  "
            f"whitened {p.rho_whitened:+.4f}  margin {p.margin:+.4f}  {mark}"
        )
    print(f"kept: {', '.join(report.kept_langs)}")


def cmd_filter(
    cfg: RunConfig, target_path, source_paths, report_out, training_out
) -> None:
    target_ds = load_dataset(_require_file(target_path, "target dataset"))
    target_lang = _target_lang(target_ds)
    sources = _balanced_sources(_load_sources(source_paths), cfg)
    provider = make_provider(cfg.provider)
    report = filter_languages(
        unique_sentences(target_ds),
        sources,
        provider,
        cfg.k,
        cfg.delta,
        target_lang=target_lang,
        seed=cfg.balance.seed,
    )
    training = build_training_set(report, sources, cfg.balance)
    atomic_write(report_out, filter_report_to_json(report) + "\n")
    save_dataset(training, training_out)
    _print_filter_table(report)


def cmd_pipeline(cfg: RunConfig, target_path, source_paths, outdir) -> None:
    target_ds = load_dataset(_require_file(target_path, "target dataset"))
    target_lang = _target_lang(target_ds)
    sources = _balanced_sources(_load_sources(source_paths), cfg)
    provider = make_provider(cfg.provider)
    target_texts = unique_sentences(target_ds)

    report = filter_languages(
        target_texts,
        sources,
        provider,
        cfg.k,
        cfg.delta,
        target_lang=target_lang,
        seed=cfg.balance.seed,
    )
    training = build_training_set(report, sources, cfg.balance)
    extra = target_texts if cfg.include_target_in_fit else ()
    params = fit_pool_params(
        unique_sentences(training), provider, cfg.k, extra_texts=extra
    )
    scores = score_pairs(target_ds, provider, params)

    out = Path(outdir)
    atomic_write(out / PIPELINE_FILES["filter_report"], filter_report_to_json(report) + "\n")
    save_dataset(training, out / PIPELINE_FILES["training"])
    save_params(out / PIPELINE_FILES["params"], params)
    atomic_write(
        out / PIPELINE_FILES["score_report"],
        _score_report_json(score_report(target_ds, scores)),
    )
    atomic_write(out / PIPELINE_FILES["predictions"], _predictions_csv(target_ds, scores))
    _print_filter_table(report)
    print(f"training pairs: {len(training)}")
    print(f"params fingerprint: {params.fingerprint}")
    print(f"predictions: {len(target_ds)} pairs -> {out / PIPELINE_FILES['predictions']}")


def cmd_export_hist(report_path, out_path) -> None:
    path = _require_file(report_path, "score report")
    try:
        report = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as err:
        raise ValidationError(f"score report {path} is not valid JSON: {err}")
    if not isinstance(report, dict) or "scores" not in report:
        raise ValidationError(f"score report {path} has no scores field")
    hist = histogram(report["scores"])
    obj = {
        "bin_edges": list(hist.bin_edges),
        "counts": list(hist.counts),
        "mean": hist.mean,
        "stddev": hist.stddev,
    }
    atomic_write(out_path, json.dumps(obj) + "\n")
    print(f"histogram: {sum(hist.counts)} scores in {len(hist.counts)} bins")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="isorel",
        description="Whitening-based cross-lingual semantic relatedness pipeline",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", help="JSON config file")
        p.add_argument("--k", type=int, default=None, help="whitening top-k override")
        p.add_argument("--seed", type=int, default=None, help="balance seed override")
        p.add_argument("--delta", type=float, default=None, help="exclusion tolerance override")
        p.add_argument(
            "--include-target-in-fit",
            action="store_true",
            help="add target sentences to the final whitening fit pool",
        )

    p_fit = sub.add_parser("fit", help="fit whitening on a dataset's sentences")
    add_common(p_fit)
    p_fit.add_argument("--dataset", required=True)
    p_fit.add_argument("--output", required=True, help="params JSON path")

    p_score = sub.add_parser("score", help="score pairs and report Spearman")
    add_common(p_score)
    p_score.add_argument("--dataset", required=True)
    p_score.add_argument("--params", default=None, help="params JSON to whiten with")
    p_score.add_argument(
        "--no-whitening", action="store_true", help="force the raw-encoder baseline"
    )
    p_score.add_argument("--output", required=True, help="score report JSON path")

    p_filter = sub.add_parser("filter", help="probe and select source languages")
    add_common(p_filter)
    p_filter.add_argument("--target", required=True, help="target pairs CSV (text source)")
    p_filter.add_argument("--sources", required=True, nargs="+", help="labeled source CSVs")
    p_filter.add_argument("--report", required=True, help="filter report JSON path")
    p_filter.add_argument("--training", required=True, help="balanced training CSV path")

    p_pipe = sub.add_parser("pipeline", help="filter, build training set, fit, predict")
    add_common(p_pipe)
    p_pipe.add_argument("--target", required=True, help="target pairs CSV")
    p_pipe.add_argument("--sources", required=True, nargs="+", help="labeled source CSVs")
    p_pipe.add_argument("--outdir", required=True, help="directory for all outputs")

    p_hist = sub.add_parser("export-hist", help="extract histogram data from a report")
    p_hist.add_argument("--report", required=True, help="score report JSON")
    p_hist.add_argument("--output", required=True, help="histogram JSON path")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "export-hist":
            cmd_export_hist(args.report, args.output)
            return 0
        cfg = load_run_config(args.config, args)
        if args.command == "fit":
            cmd_fit(cfg, args.dataset, args.output)
        elif args.command == "score":
            cmd_score(cfg, args.dataset, args.params, args.no_whitening, args.output)
        elif args.command == "filter":
            cmd_filter(cfg, args.target, args.sources, args.report, args.training)
        elif args.command == "pipeline":
            cmd_pipeline(cfg, args.target, args.sources, args.outdir)
        return 0
    except IsorelError as err:
        _emit_error(err)
        return 2
    except OSError as err:
        _emit_error(err)
        return 2


def _emit_error(err: BaseException) -> None:
    sys.stderr.write(
        json.dumps({"error": {"type": type(err).__name__, "message": str(err)}}) + "\n"
    )


if __name__ == "__main__":
    sys.exit(main())
