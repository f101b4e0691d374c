"""Sentence-embedding exporter.

Reads pair CSVs (``pair_id,lang,sentence_1,sentence_2,label``), encodes every
unique sentence with a frozen pretrained encoder, and writes a JSONL store
keyed by the SHA-256 of each sentence. Also serves embeddings over the
``POST /embed`` HTTP protocol.
"""

from .encoders import HashEncoder, make_encoder
from .export import ExportJob, ExportError, export
from .server import make_server

__version__ = "0.1.0"
