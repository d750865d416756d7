"""Reduced Laplace-Beltrami eigenbasis of the pencil (W, D) and its binary cache."""

from __future__ import annotations

import logging
import struct
import zlib
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import ArpackNoConvergence, eigsh

from .errors import FormatError, InputError, NumericalError
from .laplacian import OperatorPair

log = logging.getLogger(__name__)

DEFAULT_R = 100

CACHE_MAGIC = b"SCRB"
CACHE_VERSION = 1
_HEADER = struct.Struct("<4sIQQ")


@dataclass(frozen=True)
class SpectralBasis:
    """The ``r`` eigenpairs of ``W v = lambda D v`` closest to zero.

    Eigenvalues are non-positive, sorted by increasing magnitude; eigenvectors
    are D-orthonormal columns of an (N, r) array.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    lambda_max_abs: float
    D: np.ndarray

    @property
    def N(self) -> int:
        return self.eigenvectors.shape[0]

    @property
    def r(self) -> int:
        return self.eigenvectors.shape[1]

    def truncated(self, r: int) -> "SpectralBasis":
        if not 1 <= r <= self.r:
            raise ValueError(f"cannot truncate basis of {self.r} modes to {r}")
        return SpectralBasis(self.eigenvalues[:r].copy(), np.ascontiguousarray(self.eigenvectors[:, :r]),
                             self.lambda_max_abs, self.D)


def estimate_lambda_max(op: OperatorPair) -> float:
    """Gershgorin upper bound on the largest eigenvalue magnitude of ``D^-1 W``."""
    row_abs = np.asarray(abs(op.W).sum(axis=1)).ravel()
    return float(np.max(row_abs / op.D))


def _canonical_signs(vecs: np.ndarray) -> np.ndarray:
    # largest-magnitude entry of each column positive (first one on ties)
    pivot = np.argmax(np.abs(vecs), axis=0)
    signs = np.sign(vecs[pivot, np.arange(vecs.shape[1])])
    signs[signs == 0] = 1.0
    return vecs * signs


def solve_reduced(op: OperatorPair, r: int = DEFAULT_R, *, maxiter: int | None = None,
                  lambda_max_abs: float | None = None) -> SpectralBasis:
    """Shift-invert Lanczos for the ``r`` smallest-magnitude eigenpairs.

    ``lambda_max_abs`` overrides the Gershgorin estimate stored with the basis.
    """
    n = op.N
    if not 1 <= r < n:
        raise InputError(f"number of modes r={r} must satisfy 1 <= r < N={n}")
    bound = estimate_lambda_max(op)
    K = (-op.W).tocsc()
    M = sparse.diags(op.D).tocsc()
    # shift just below zero: K is singular (constants are in its kernel)
    sigma = -1e-6 * bound
    v0 = np.random.default_rng(12345).standard_normal(n)
    try:
        vals, vecs = eigsh(K, k=r, M=M, sigma=sigma, which="LM", v0=v0, tol=0.0, maxiter=maxiter)
    except ArpackNoConvergence as exc:
        got = 0 if exc.eigenvalues is None else len(exc.eigenvalues)
        raise NumericalError(
            f"eigensolver did not converge: {got}/{r} eigenpairs after maxiter={maxiter} (N={n}, sigma={sigma:.3g})"
        ) from exc
    order = np.argsort(vals, kind="stable")
    vals = -vals[order]
    vecs = vecs[:, order]
    # D-normalise explicitly; ARPACK already returns M-orthonormal vectors up to rounding
    vecs = vecs / np.sqrt(np.einsum("ij,i,ij->j", vecs, op.D, vecs))
    vals = np.minimum(vals, 0.0)
    vecs = np.ascontiguousarray(_canonical_signs(vecs))
    lam_max = bound if lambda_max_abs is None else float(lambda_max_abs)
    if lam_max < np.abs(vals[-1]):
        raise InputError(f"lambda_max_abs={lam_max} is smaller than |lambda_r|={abs(vals[-1])}")
    log.info("solved %d eigenpairs (N=%d), |lambda_r|=%.6g, |lambda_N|<=%.6g", r, n, -vals[-1], lam_max)
    return SpectralBasis(vals, vecs, lam_max, np.array(op.D, dtype=np.float64))


def residuals(op: OperatorPair, basis: SpectralBasis) -> np.ndarray:
    """Relative residuals ``|W v - lambda D v| / (|D v| max(1, |lambda|))`` per mode."""
    V = basis.eigenvectors
    DV = op.D[:, None] * V
    R = op.W @ V - DV * basis.eigenvalues
    return np.linalg.norm(R, axis=0) / (np.linalg.norm(DV, axis=0) * np.maximum(1.0, np.abs(basis.eigenvalues)))


# ---------------------------------------------------------------------------
# binary cache: magic, u32 version, u64 N, u64 r, D[N], eigenvalues[r],
# V row-major [N*r], lambda_max_abs, then CRC-32 of everything before it


def save_cache(basis: SpectralBasis, path) -> None:
    n, r = basis.N, basis.r
    parts = [
        _HEADER.pack(CACHE_MAGIC, CACHE_VERSION, n, r),
        np.ascontiguousarray(basis.D, dtype="<f8").tobytes(),
        np.ascontiguousarray(basis.eigenvalues, dtype="<f8").tobytes(),
        np.ascontiguousarray(basis.eigenvectors, dtype="<f8").tobytes(),
        struct.pack("<d", basis.lambda_max_abs),
    ]
    payload = b"".join(parts)
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_bytes(payload + struct.pack("<I", zlib.crc32(payload)))
    tmp.replace(path)


def load_cache(path) -> SpectralBasis:
    data = Path(path).read_bytes()
    if len(data) < _HEADER.size + 4:
        raise FormatError(f"{path}: truncated spectrum cache")
    magic, version, n, r = _HEADER.unpack_from(data)
    if magic != CACHE_MAGIC:
        raise FormatError(f"{path}: bad magic {magic!r}, expected {CACHE_MAGIC!r}")
    if version != CACHE_VERSION:
        raise FormatError(f"{path}: unsupported cache version {version}")
    expected = _HEADER.size + 8 * (n + r + n * r + 1) + 4
    if len(data) != expected:
        raise FormatError(f"{path}: truncated spectrum cache ({len(data)} bytes, expected {expected})")
    payload, (crc,) = data[:-4], struct.unpack("<I", data[-4:])
    if zlib.crc32(payload) != crc:
        raise FormatError(f"{path}: checksum mismatch")
    off = _HEADER.size
    D = np.frombuffer(payload, "<f8", n, off).astype(np.float64)
    off += 8 * n
    vals = np.frombuffer(payload, "<f8", r, off).astype(np.float64)
    off += 8 * r
    V = np.frombuffer(payload, "<f8", n * r, off).astype(np.float64).reshape(n, r)
    off += 8 * n * r
    (lam_max,) = struct.unpack_from("<d", payload, off)
    return SpectralBasis(vals, V, lam_max, D)


def cache_size(n: int, r: int) -> int:
    return _HEADER.size + 8 * (n + r + n * r + 1) + 4
