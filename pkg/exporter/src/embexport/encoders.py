"""Sentence encoders: a frozen transformer backend and an offline stand-in."""

from __future__ import annotations

import hashlib

import numpy as np

POOLING_MODES = ("mean_last_layer", "cls")


class EncoderError(Exception):
    pass


class HashEncoder:
    """Deterministic offline encoder for tests and dry runs.

    Each sentence maps to ``dim`` standard-normal variates drawn from a
    counter-based PRNG keyed by the sentence hash. No model weights needed;
    output is bit-reproducible across runs. Select it with the pseudo model
    name ``hash:<dim>``.
    """

    def __init__(self, dim: int):
        if dim < 1:
            raise EncoderError("hash encoder dim must be >= 1")
        self.dim = int(dim)
        self.name = f"hash:{dim}"

    def encode(self, texts) -> np.ndarray:
        texts = list(texts)
        if not texts:
            return np.zeros((0, self.dim), dtype=np.float64)
        rows = []
        for text in texts:
            digest = hashlib.sha256(text.encode("utf-8")).digest()
            key = int.from_bytes(digest[8:16], "little")
            rng = np.random.Generator(np.random.Philox(key=key))
            rows.append(rng.standard_normal(self.dim))
        return np.stack(rows)


class TransformersEncoder:
    """Frozen pretrained-encoder backend (inference only, no dropout).

    Sentence vectors come from the last hidden layer, either mean-pooled
    over non-padding tokens or taken from the first (CLS) position.
    """

    def __init__(self, model_name: str, pooling: str = "mean_last_layer", batch_size: int = 32):
        if pooling not in POOLING_MODES:
            raise EncoderError(f"pooling must be one of {POOLING_MODES}")
        try:
            import torch  # noqa: F401
            from transformers import AutoModel, AutoTokenizer
        except ImportError as err:
            raise EncoderError(f"transformers backend unavailable: {err}") from err
        try:
            self.tokenizer = AutoTokenizer.from_pretrained(model_name)
            self.model = AutoModel.from_pretrained(model_name)
        except Exception as err:
            raise EncoderError(f"could not load model {model_name!r}: {err}") from err
        self.model.eval()
        self.pooling = pooling
        self.batch_size = int(batch_size)
        self.dim = int(self.model.config.hidden_size)
        self.name = model_name

    def encode(self, texts) -> np.ndarray:
        import torch

        texts = list(texts)
        if not texts:
            return np.zeros((0, self.dim), dtype=np.float64)
        chunks = []
        with torch.no_grad():
            for start in range(0, len(texts), self.batch_size):
                batch = texts[start : start + self.batch_size]
                enc = self.tokenizer(
                    batch, padding=True, truncation=True, return_tensors="pt"
                )
                hidden = self.model(**enc).last_hidden_state
                if self.pooling == "cls":
                    vecs = hidden[:, 0, :]
                else:
                    mask = enc["attention_mask"].unsqueeze(-1).to(hidden.dtype)
                    vecs = (hidden * mask).sum(dim=1) / mask.sum(dim=1).clamp(min=1.0)
                chunks.append(vecs.cpu().numpy().astype(np.float64))
        return np.vstack(chunks)


def make_encoder(model_name: str, pooling: str = "mean_last_layer", batch_size: int = 32):
    """Build an encoder. ``hash:<dim>`` selects the offline stand-in; any
    other name loads a frozen transformer."""
    if model_name.startswith("hash:"):
        try:
            dim = int(model_name.split(":", 1)[1])
        except ValueError:
            raise EncoderError(f"bad hash encoder spec {model_name!r}") from None
        return HashEncoder(dim)
    return TransformersEncoder(model_name, pooling=pooling, batch_size=batch_size)
