"""Embedding providers: JSONL file store, deterministic toy encoder, remote service.

Every provider maps an ordered list of texts to an n-by-d float matrix whose
row order matches the input. Identical texts always yield identical rows.
"""

from __future__ import annotations

import hashlib
import json
import time
import urllib.error
import urllib.request
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import MissingEmbeddingError, TransportError, ValidationError
from .ioutil import atomic_write

PROVIDER_KINDS = ("file_store", "toy", "remote")

# Per-component offset shared by every toy vector. It pins raw toy cosines
# into a narrow high-similarity band, so whitening has observable work to do.
TOY_BIAS_PER_COMPONENT = 5.0

REMOTE_BATCH_SIZE = 64
REMOTE_MAX_RETRIES = 3
REMOTE_BASE_DELAY = 0.25

_U64_MASK = 0xFFFFFFFFFFFFFFFF


def text_key(text: str) -> str:
    """Content address of a sentence: lowercase hex SHA-256 of its UTF-8 bytes."""
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def toy_bias(dim: int, seed: int) -> np.ndarray:
    """Constant bias added to every toy vector: +-5.0 per component, signs
    drawn from a counter-based PRNG keyed by the seed alone. Norm is
    5 * sqrt(dim)."""
    rng = np.random.Generator(np.random.Philox(key=int(seed) & _U64_MASK))
    signs = rng.integers(0, 2, size=dim) * 2 - 1
    return TOY_BIAS_PER_COMPONENT * signs.astype(np.float64)


def toy_encode(text: str, dim: int, seed: int) -> np.ndarray:
    """Deterministic stand-in for a sentence encoder.

    A counter-based PRNG keyed with ``seed XOR sha256(text)[:8]`` (big-endian)
    emits ``dim`` standard-normal variates; the shared bias vector is added on
    top. The bias dominates pairwise cosines, mimicking the anisotropy of raw
    pretrained-encoder spaces.
    """
    if dim < 1:
        raise ValidationError("toy encoder dimension must be >= 1")
    digest = hashlib.sha256(text.encode("utf-8")).digest()
    key = (int(seed) ^ int.from_bytes(digest[:8], "big")) & _U64_MASK
    rng = np.random.Generator(np.random.Philox(key=key))
    return rng.standard_normal(dim) + toy_bias(dim, seed)


@dataclass(frozen=True)
class ProviderConfig:
    """Backend selection for embeddings. Exactly one backend is configured:
    ``file_store`` needs a path, ``toy`` needs a dimension, ``remote`` needs
    an endpoint and a dimension."""

    kind: str
    dim: int | None = None
    path: str | None = None
    endpoint: str | None = None
    toy_seed: int = 42

    def __post_init__(self):
        if self.kind not in PROVIDER_KINDS:
            raise ValidationError(
                f"provider kind must be one of {PROVIDER_KINDS}, got {self.kind!r}"
            )
        if self.dim is not None and self.dim < 1:
            raise ValidationError("provider dim must be >= 1")
        if self.kind == "file_store":
            if not self.path or self.endpoint:
                raise ValidationError("file_store provider needs path and no endpoint")
        elif self.kind == "toy":
            if self.path or self.endpoint:
                raise ValidationError("toy provider takes neither path nor endpoint")
            if self.dim is None:
                raise ValidationError("toy provider needs an explicit dim")
        else:  # remote
            if not self.endpoint or self.path:
                raise ValidationError("remote provider needs endpoint and no path")
            if self.dim is None:
                raise ValidationError("remote provider needs an explicit dim")


class EmbeddingProvider:
    """Interface: ordered texts in, n-by-d matrix out."""

    dim: int

    def get_embeddings(self, texts) -> np.ndarray:
        raise NotImplementedError

    def _empty(self) -> np.ndarray:
        return np.zeros((0, self.dim), dtype=np.float64)


class ToyProvider(EmbeddingProvider):
    """Offline deterministic provider built on :func:`toy_encode`."""

    def __init__(self, dim: int, seed: int = 42):
        if dim < 1:
            raise ValidationError("toy encoder dimension must be >= 1")
        self.dim = int(dim)
        self.seed = int(seed)

    def get_embeddings(self, texts) -> np.ndarray:
        texts = list(texts)
        if not texts:
            return self._empty()
        return np.stack([toy_encode(t, self.dim, self.seed) for t in texts])


class FileStoreProvider(EmbeddingProvider):
    """Content-addressed store loaded once from JSONL into an immutable map."""

    def __init__(self, path, expected_dim: int | None = None):
        self.path = Path(path)
        self.meta, self._vectors, self.dim = load_store(self.path)
        if expected_dim is not None and expected_dim != self.dim:
            raise ValidationError(
                f"store {self.path} has dim {self.dim}, expected {expected_dim}"
            )

    def get_embeddings(self, texts) -> np.ndarray:
        texts = list(texts)
        if not texts:
            return self._empty()
        keys = [text_key(t) for t in texts]
        missing = sorted({k for k in keys if k not in self._vectors})
        if missing:
            raise MissingEmbeddingError(missing)
        return np.stack([self._vectors[k] for k in keys])


class RemoteProvider(EmbeddingProvider):
    """HTTP client for the ``POST /embed`` protocol.

    Texts go out in order-preserving batches of at most 64; transient
    failures (5xx, connection errors) are retried up to 3 times per batch
    with exponential backoff starting at 250 ms.
    """

    def __init__(
        self,
        endpoint: str,
        dim: int,
        batch_size: int = REMOTE_BATCH_SIZE,
        max_retries: int = REMOTE_MAX_RETRIES,
        base_delay: float = REMOTE_BASE_DELAY,
        timeout: float = 30.0,
        sleep=time.sleep,
    ):
        if dim < 1:
            raise ValidationError("remote provider dim must be >= 1")
        base = endpoint.rstrip("/")
        self.url = base if base.endswith("/embed") else base + "/embed"
        self.dim = int(dim)
        self.batch_size = int(batch_size)
        self.max_retries = int(max_retries)
        self.base_delay = float(base_delay)
        self.timeout = float(timeout)
        self._sleep = sleep

    def get_embeddings(self, texts) -> np.ndarray:
        texts = list(texts)
        if not texts:
            return self._empty()
        chunks = [
            self._post_batch(texts[i : i + self.batch_size])
            for i in range(0, len(texts), self.batch_size)
        ]
        return np.vstack(chunks)

    def _post_batch(self, batch: list[str]) -> np.ndarray:
        payload = json.dumps({"texts": batch}).encode("utf-8")
        retries = 0
        while True:
            request = urllib.request.Request(
                self.url,
                data=payload,
                headers={"Content-Type": "application/json"},
                method="POST",
            )
            try:
                with urllib.request.urlopen(request, timeout=self.timeout) as resp:
                    body = resp.read()
                break
            except urllib.error.HTTPError as err:
                transient = err.code >= 500
                if transient and retries < self.max_retries:
                    retries += 1
                    self._sleep(self.base_delay * 2 ** (retries - 1))
                    continue
                raise TransportError(
                    f"embedding service returned HTTP {err.code} "
                    f"after {retries} retries",
                    retries=retries,
                ) from err
            except urllib.error.URLError as err:
                if retries < self.max_retries:
                    retries += 1
                    self._sleep(self.base_delay * 2 ** (retries - 1))
                    continue
                raise TransportError(
                    f"embedding service unreachable after {retries} retries: "
                    f"{err.reason}",
                    retries=retries,
                ) from err
        try:
            data = json.loads(body)
        except json.JSONDecodeError as err:
            raise ValidationError(f"embedding service sent invalid JSON: {err}") from err
        vectors = data.get("vectors")
        if not isinstance(vectors, list) or len(vectors) != len(batch):
            got = len(vectors) if isinstance(vectors, list) else "none"
            raise ValidationError(
                f"embedding service returned {got} vectors for {len(batch)} texts"
            )
        arr = np.asarray(vectors, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[1] != self.dim or data.get("dim") != self.dim:
            raise ValidationError(
                f"embedding service dim {data.get('dim')} does not match "
                f"configured dim {self.dim}"
            )
        if not np.isfinite(arr).all():
            raise ValidationError("embedding service returned non-finite values")
        return arr


def make_provider(cfg: ProviderConfig) -> EmbeddingProvider:
    if cfg.kind == "toy":
        return ToyProvider(cfg.dim, cfg.toy_seed)
    if cfg.kind == "file_store":
        return FileStoreProvider(cfg.path, expected_dim=cfg.dim)
    return RemoteProvider(cfg.endpoint, cfg.dim)


def load_store(path):
    """Read a JSONL embedding store into ``(meta, {key: vector}, dim)``.

    An optional metadata line (a JSON object whose single key is "meta") is
    accepted and returned as a dict. Every record must carry a 64-char
    lowercase hex key, a lang, and a vector whose length equals its dim
    field; all records must share one dimension.
    """
    path = Path(path)
    if not path.is_file():
        raise ValidationError(f"embedding store not found: {path}")
    meta = None
    vectors: dict[str, np.ndarray] = {}
    dim: int | None = None
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as err:
                raise ValidationError(
                    f"store {path} line {lineno}: invalid JSON ({err.msg})"
                ) from None
            if isinstance(obj, dict) and set(obj) == {"meta"}:
                meta = obj["meta"]
                if isinstance(meta, dict) and "dim" in meta:
                    if dim is not None and meta["dim"] != dim:
                        raise ValidationError(
                            f"store {path} line {lineno}: meta dim {meta['dim']} "
                            f"conflicts with record dim {dim}"
                        )
                    dim = int(meta["dim"])
                continue
            key, vec = _validated_store_record(obj, path, lineno)
            if dim is None:
                dim = vec.size
            elif vec.size != dim:
                raise ValidationError(
                    f"store {path} line {lineno}: dim {vec.size} conflicts "
                    f"with store dim {dim}"
                )
            if key in vectors:
                raise ValidationError(
                    f"store {path} line {lineno}: duplicate key {key}"
                )
            vec.setflags(write=False)
            vectors[key] = vec
    if dim is None:
        raise ValidationError(f"store {path} contains no embedding records")
    return meta, vectors, dim


def _validated_store_record(obj, path, lineno):
    if not isinstance(obj, dict):
        raise ValidationError(f"store {path} line {lineno}: record is not an object")
    for field in ("key", "lang", "dim", "vector"):
        if field not in obj:
            raise ValidationError(
                f"store {path} line {lineno}: missing field {field!r}"
            )
    key = obj["key"]
    if (
        not isinstance(key, str)
        or len(key) != 64
        or any(c not in "0123456789abcdef" for c in key)
    ):
        raise ValidationError(
            f"store {path} line {lineno}: key is not 64 lowercase hex chars"
        )
    vec = np.asarray(obj["vector"], dtype=np.float64)
    if vec.ndim != 1 or vec.size != obj["dim"]:
        raise ValidationError(
            f"store {path} line {lineno}: vector length {vec.size} does not "
            f"match dim {obj['dim']}"
        )
    if not np.isfinite(vec).all():
        raise ValidationError(
            f"store {path} line {lineno}: vector has non-finite entries"
        )
    return key, vec


def _fmt_store_float(x: float) -> str:
    # 17 significant digits: exceeds the 9-digit floor and round-trips exactly.
    return format(float(x), ".17g")


def write_store(path, entries, meta: dict | None = None) -> None:
    """Write a JSONL store from ``(text, lang, vector)`` triples (atomic).

    Keys are derived from the texts; duplicate texts must carry identical
    vectors and are written once.
    """
    lines = []
    if meta is not None:
        lines.append(json.dumps({"meta": meta}))
    seen: dict[str, np.ndarray] = {}
    for text, lang, vector in entries:
        vec = np.asarray(vector, dtype=np.float64)
        key = text_key(text)
        if key in seen:
            if not np.array_equal(seen[key], vec):
                raise ValidationError(
                    f"conflicting vectors for duplicate text {text!r}"
                )
            continue
        seen[key] = vec
        values = ",".join(_fmt_store_float(v) for v in vec)
        lines.append(
            f'{{"key":"{key}","lang":{json.dumps(lang)},"dim":{vec.size},'
            f'"vector":[{values}]}}'
        )
    atomic_write(path, "\n".join(lines) + "\n")
