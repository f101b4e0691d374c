"""Exporter command line: ``export`` a store or ``serve`` embeddings."""

from __future__ import annotations

import argparse
import json
import sys

from .encoders import EncoderError, make_encoder
from .export import DEFAULT_MODEL, ExportError, ExportJob, export
from .server import serve


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="embexport", description="Sentence-embedding exporter and server"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_exp = sub.add_parser("export", help="write a JSONL embedding store")
    p_exp.add_argument("--input", required=True, help="pair CSV")
    p_exp.add_argument("--output", required=True, help="JSONL store path")
    p_exp.add_argument("--model", default=DEFAULT_MODEL,
                       help="model name, or hash:<dim> for the offline encoder")
    p_exp.add_argument("--pooling", default="mean_last_layer",
                       choices=("mean_last_layer", "cls"))
    p_exp.add_argument("--batch-size", type=int, default=32)

    p_srv = sub.add_parser("serve", help="run the POST /embed service")
    p_srv.add_argument("--port", type=int, default=8899)
    p_srv.add_argument("--model", default=DEFAULT_MODEL)
    p_srv.add_argument("--pooling", default="mean_last_layer",
                       choices=("mean_last_layer", "cls"))
    p_srv.add_argument("--batch-size", type=int, default=32)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "export":
            job = ExportJob(
                input_csv=args.input,
                output_jsonl=args.output,
                model_name=args.model,
                pooling=args.pooling,
                batch_size=args.batch_size,
            )
            count = export(job)
            print(f"exported {count} unique sentences -> {args.output}")
            return 0
        encoder = make_encoder(args.model, args.pooling, args.batch_size)
        serve(args.port, encoder)
        return 0
    except (ExportError, EncoderError) as err:
        sys.stderr.write(
            json.dumps({"error": {"type": type(err).__name__, "message": str(err)}})
            + "\n"
        )
        return 2


if __name__ == "__main__":
    sys.exit(main())
