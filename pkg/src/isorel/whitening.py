"""Whitening transform: map a vector set to zero mean and identity covariance.

Fit pipeline: column mean, population covariance (1/n), SVD of the covariance
matrix, then scale the retained directions by inverse square-root variance.
The transform is applied to rows as ``(x - mu) @ w`` and may truncate to the
top-k highest-variance directions.
"""

from __future__ import annotations

import hashlib
import json
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateFitError, ValidationError
from .ioutil import atomic_write

# Singular values below RANK_RTOL * largest are treated as numerically zero.
RANK_RTOL = 1e-12

PARAMS_KEYS = ("dim", "k", "fit_count", "mu", "w", "fingerprint")


def _as_matrix(x, name: str = "matrix") -> np.ndarray:
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim != 2:
        raise ValidationError(f"{name} must be 2-dimensional, got ndim={arr.ndim}")
    if not np.isfinite(arr).all():
        raise ValidationError(f"{name} has non-finite entries")
    return arr


def _fmt17(x: float) -> str:
    # 17 significant digits uniquely identify an IEEE-754 double.
    return format(float(x), ".17g")


def _canonical_payload(dim, k, fit_count, mu, w) -> str:
    mu_json = "[" + ",".join(_fmt17(v) for v in mu) + "]"
    rows = ("[" + ",".join(_fmt17(v) for v in row) + "]" for row in w)
    w_json = "[" + ",".join(rows) + "]"
    return (
        f'{{"dim":{int(dim)},"k":{int(k)},"fit_count":{int(fit_count)},'
        f'"mu":{mu_json},"w":{w_json}}}'
    )


@dataclass(frozen=True)
class WhiteningParams:
    """Fitted whitening artifact: mean ``mu``, transform ``w`` (dim x k).

    Columns of ``w`` are ordered by descending variance of the fitting set;
    on that set the transformed mean is zero and the transformed covariance
    is the k-by-k identity, within numerical tolerance.
    """

    dim: int
    k: int
    mu: np.ndarray
    w: np.ndarray
    fit_count: int
    fingerprint: str

    @classmethod
    def create(cls, dim, k, mu, w, fit_count) -> "WhiteningParams":
        mu = np.ascontiguousarray(np.asarray(mu, dtype=np.float64))
        w = np.ascontiguousarray(np.asarray(w, dtype=np.float64))
        if mu.ndim != 1 or mu.size != dim:
            raise ValidationError(f"mu must be a length-{dim} vector")
        if not 1 <= k <= dim:
            raise ValidationError(f"k={k} outside [1, dim={dim}]")
        if w.shape != (dim, k):
            raise ValidationError(f"w must be {dim}x{k}, got {w.shape}")
        if not (np.isfinite(mu).all() and np.isfinite(w).all()):
            raise ValidationError("whitening params have non-finite entries")
        if fit_count < 0:
            raise ValidationError("fit_count must be >= 0")
        mu.setflags(write=False)
        w.setflags(write=False)
        payload = _canonical_payload(dim, k, fit_count, mu, w)
        fingerprint = hashlib.sha256(payload.encode("ascii")).hexdigest()
        return cls(
            dim=int(dim),
            k=int(k),
            mu=mu,
            w=w,
            fit_count=int(fit_count),
            fingerprint=fingerprint,
        )

    @classmethod
    def identity(cls, dim: int) -> "WhiteningParams":
        """Neutral params: zero mean, identity transform, k = dim."""
        return cls.create(dim, dim, np.zeros(dim), np.eye(dim), 0)


def compute_mean(s) -> np.ndarray:
    """Column mean of the vector set: mu = (1/n) * sum of rows."""
    x = _as_matrix(s, "vector set")
    if x.shape[0] < 1:
        raise ValidationError("mean of an empty vector set is undefined")
    return x.mean(axis=0)


def compute_covariance(s, mu) -> np.ndarray:
    """Population covariance (1/n normalization) of the rows around ``mu``.

    Returned matrix is symmetric positive semidefinite.
    """
    x = _as_matrix(s, "vector set")
    if x.shape[0] < 1:
        raise ValidationError("covariance of an empty vector set is undefined")
    center = np.asarray(mu, dtype=np.float64)
    if center.ndim != 1 or center.size != x.shape[1]:
        raise ValidationError(
            f"mu length {center.size} does not match {x.shape[1]} columns"
        )
    dev = x - center
    cov = dev.T @ dev / x.shape[0]
    return (cov + cov.T) * 0.5


def fit_whitening(s, k_config: int, *, keep: str = "largest") -> WhiteningParams:
    """Fit the whitening transform on a vector set.

    Decomposes the covariance as U * diag(vals) * U^T with values sorted
    descending and sets w = U * diag(1/sqrt(vals)) restricted to k columns,
    where k = min(k_config, numerical rank). Column signs are fixed so each
    column's largest-magnitude entry is positive. ``keep`` selects whether
    the k retained directions are the largest-variance ones (default) or the
    smallest above the rank cutoff (ablation aid).
    """
    x = _as_matrix(s, "fitting set")
    n, dim = x.shape
    if n < 2:
        raise ValidationError("whitening fit needs at least 2 rows")
    if k_config < 1:
        raise ValidationError("k_config must be >= 1")
    if keep not in ("largest", "smallest"):
        raise ValidationError("keep must be 'largest' or 'smallest'")
    mu = compute_mean(x)
    cov = compute_covariance(x, mu)
    u, vals, _ = np.linalg.svd(cov, hermitian=True)
    if not np.isfinite(vals).all() or vals[0] <= 0.0:
        raise DegenerateFitError(
            "degenerate fit: covariance has no positive-variance direction"
        )
    rank = int(np.count_nonzero(vals >= RANK_RTOL * vals[0]))
    k = min(k_config, rank)
    if k_config > rank:
        warnings.warn(
            f"whitening k reduced from {k_config} to numerical rank {rank}",
            RuntimeWarning,
            stacklevel=2,
        )
    if keep == "largest":
        sel = np.arange(k)
    else:
        sel = np.arange(rank - k, rank)
    cols = u[:, sel]
    anchor = np.argmax(np.abs(cols), axis=0)
    flip = cols[anchor, np.arange(k)] < 0.0
    cols = np.where(flip, -cols, cols)
    w = cols / np.sqrt(vals[sel])
    return WhiteningParams.create(dim=dim, k=k, mu=mu, w=w, fit_count=n)


def apply_whitening(params: WhiteningParams, x) -> np.ndarray:
    """Apply the fitted transform row-wise: ``(x - mu) @ w`` (output n x k)."""
    mat = _as_matrix(x, "input set")
    if mat.shape[1] != params.dim:
        raise ValidationError(
            f"input has {mat.shape[1]} columns, params expect {params.dim}"
        )
    return (mat - params.mu) @ params.w


def params_to_json(params: WhiteningParams) -> str:
    """Canonical one-line JSON with 17-significant-digit floats."""
    payload = _canonical_payload(
        params.dim, params.k, params.fit_count, params.mu, params.w
    )
    return payload[:-1] + f',"fingerprint":"{params.fingerprint}"}}'


def save_params(path, params: WhiteningParams) -> None:
    atomic_write(path, params_to_json(params) + "\n")


def load_params(path) -> WhiteningParams:
    """Read a params file, rebuild the arrays, and verify the fingerprint."""
    try:
        with open(path, encoding="utf-8") as fh:
            obj = json.load(fh)
    except FileNotFoundError:
        raise ValidationError(f"params file not found: {path}") from None
    except json.JSONDecodeError as err:
        raise ValidationError(f"params file {path} is not valid JSON: {err}") from None
    if not isinstance(obj, dict):
        raise ValidationError(f"params file {path} must hold a JSON object")
    missing = [key for key in PARAMS_KEYS if key not in obj]
    if missing:
        raise ValidationError(f"params file {path} missing fields: {missing}")
    params = WhiteningParams.create(
        dim=obj["dim"],
        k=obj["k"],
        mu=obj["mu"],
        w=obj["w"],
        fit_count=obj["fit_count"],
    )
    if params.fingerprint != obj["fingerprint"]:
        raise ValidationError(
            f"params file {path} fingerprint mismatch: file is corrupt or edited"
        )
    return params
