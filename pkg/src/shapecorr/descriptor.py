"""Per-vertex feature descriptors from reduced-space time integration.

The descriptor of vertex ``i`` is the solution value at ``i`` of the heat or
wave equation started from a Dirac peak at ``i``. In modal coordinates the
initial state is row ``i`` of ``V_r`` and every mode evolves independently,
so ``f_i(t_k) = sum_m V[i, m]^2 g_m(t_k)`` where ``g_m`` is the response of
mode ``m`` to a unit initial coefficient under the chosen scheme.
"""

from __future__ import annotations

import struct
import zlib
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import _accel
from .errors import FormatError, InputError, NumericalError
from .integrators import (
    ModelSpec,
    SchemeSpec,
    TimeGrid,
    heat_step_factors,
    wave_step_matrices,
)
from .spectrum import SpectralBasis

DESC_MAGIC = b"SDSC"
DESC_VERSION = 1
_HEADER = struct.Struct("<4sIQQdII")

MODEL_CODES = {"heat": 0, "wave": 1, "dampedwave": 2}
SCHEME_CODES = {"implicit-euler": 0, "crank-nicolson": 1, "explicit-euler": 2, "twizell": 3, "exact": 254}
_OTHER = 255


@dataclass(frozen=True)
class Descriptor:
    samples: np.ndarray
    tau: float
    source_index: int


@dataclass
class DescriptorSet:
    """Descriptors of all vertices of one shape, rows of ``samples`` (N, M+1)."""

    samples: np.ndarray
    tau: float
    model: str
    scheme: str
    name: str = ""
    metadata: dict = field(default_factory=dict)

    @property
    def N(self) -> int:
        return self.samples.shape[0]

    @property
    def M(self) -> int:
        return self.samples.shape[1] - 1

    def __getitem__(self, i: int) -> Descriptor:
        return Descriptor(self.samples[i], self.tau, int(i))


def initial_reduced_state(basis: SpectralBasis, i: int, model: ModelSpec) -> np.ndarray:
    """Modal coordinates of the Dirac initial condition at vertex ``i``.

    Returns ``w_r(0)`` (length r) for first-order models and
    ``p_r(0) = (w_r(0), 0)`` (length 2r) for second-order models.
    """
    if not 0 <= i < basis.N:
        raise InputError(f"vertex index {i} out of range [0, {basis.N})")
    w = basis.eigenvectors[i].copy()
    if model.second_order:
        return np.concatenate([w, np.zeros_like(w)])
    return w


def exact_heat_factors(basis: SpectralBasis, grid: TimeGrid, model: ModelSpec) -> np.ndarray:
    """``exp(tau * lam / psi)`` per mode; a test oracle, not a selectable scheme."""
    return np.exp(grid.tau * basis.eigenvalues / model.psi)


def mode_responses(basis: SpectralBasis, model: ModelSpec, grid: TimeGrid, scheme: SchemeSpec,
                   factors: np.ndarray | None = None) -> np.ndarray:
    """Displacement of every mode over the grid for unit initial displacement, shape (r, M+1).

    ``factors`` replaces the scheme's per-mode heat factors (test hook).
    """
    r, M = basis.r, grid.M
    g = np.empty((r, M + 1))
    if not model.second_order:
        amp = heat_step_factors(basis.eigenvalues, grid, scheme, model) if factors is None else np.asarray(factors)
        g[:, 0] = 1.0
        for k in range(M):
            g[:, k + 1] = g[:, k] * amp
    else:
        if factors is not None:
            raise InputError("factor override is only defined for first-order models")
        S = wave_step_matrices(basis.eigenvalues, model, grid, scheme)
        w = np.ones(r)
        v = np.zeros(r)
        g[:, 0] = w
        for k in range(M):
            w, v = S[:, 0, 0] * w + S[:, 0, 1] * v, S[:, 1, 0] * w + S[:, 1, 1] * v
            g[:, k + 1] = w
    if not np.all(np.isfinite(g)):
        raise NumericalError(f"non-finite mode response with scheme {scheme.name} (step too large?)")
    return g


def integrate_reduced(basis: SpectralBasis, model: ModelSpec, grid: TimeGrid, scheme: SchemeSpec,
                      i: int) -> np.ndarray:
    """Step the full reduced state of vertex ``i`` M times; returns (M+1, r) or (M+1, 2r) states."""
    p = initial_reduced_state(basis, i, model)
    out = np.empty((grid.M + 1, len(p)))
    out[0] = p
    r = basis.r
    if model.second_order:
        S = wave_step_matrices(basis.eigenvalues, model, grid, scheme)
        for k in range(grid.M):
            w, v = p[:r], p[r:]
            p = np.concatenate([S[:, 0, 0] * w + S[:, 0, 1] * v, S[:, 1, 0] * w + S[:, 1, 1] * v])
            out[k + 1] = p
    else:
        amp = heat_step_factors(basis.eigenvalues, grid, scheme, model)
        for k in range(grid.M):
            p = p * amp
            out[k + 1] = p
    return out


def compute_descriptor(basis: SpectralBasis, model: ModelSpec, grid: TimeGrid, scheme: SchemeSpec, i: int,
                       *, factors: np.ndarray | None = None) -> Descriptor:
    if not 0 <= i < basis.N:
        raise InputError(f"vertex index {i} out of range [0, {basis.N})")
    g = mode_responses(basis, model, grid, scheme, factors)
    row = basis.eigenvectors[i : i + 1]
    return Descriptor(_accel.project(row * row, g)[0], grid.tau, int(i))


def compute_all(basis: SpectralBasis, model: ModelSpec, grid: TimeGrid, scheme: SchemeSpec, *,
                name: str = "", workers: int = 1, factors: np.ndarray | None = None,
                metadata: dict | None = None) -> DescriptorSet:
    g = mode_responses(basis, model, grid, scheme, factors)
    V = basis.eigenvectors
    samples = _accel.project(V * V, g, workers=workers)
    meta = {"r": basis.r, "M": grid.M, "c": grid.c, "t_M": grid.t_M, "t_star": grid.t_star,
            "psi": model.psi, "a": scheme.a}
    meta.update(metadata or {})
    scheme_name = "exact" if factors is not None else scheme.name
    return DescriptorSet(samples, grid.tau, model.name, scheme_name, name, meta)


# ---------------------------------------------------------------------------
# persistence


def save_descriptors(ds: DescriptorSet, path) -> None:
    """Little-endian: magic, u32 version, u64 N, u64 M+1, f64 tau, u32 model, u32 scheme,
    N*(M+1) doubles row-major, CRC-32 of the preceding bytes."""
    n, k = ds.samples.shape
    payload = _HEADER.pack(
        DESC_MAGIC, DESC_VERSION, n, k, ds.tau,
        MODEL_CODES.get(ds.model, _OTHER), SCHEME_CODES.get(ds.scheme, _OTHER),
    ) + np.ascontiguousarray(ds.samples, dtype="<f8").tobytes()
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_bytes(payload + struct.pack("<I", zlib.crc32(payload)))
    tmp.replace(path)


def load_descriptors(path, name: str = "") -> DescriptorSet:
    data = Path(path).read_bytes()
    if len(data) < _HEADER.size + 4:
        raise FormatError(f"{path}: truncated descriptor file")
    magic, version, n, k, tau, mcode, scode = _HEADER.unpack_from(data)
    if magic != DESC_MAGIC:
        raise FormatError(f"{path}: bad magic {magic!r}, expected {DESC_MAGIC!r}")
    if version != DESC_VERSION:
        raise FormatError(f"{path}: unsupported descriptor version {version}")
    if len(data) != _HEADER.size + 8 * n * k + 4:
        raise FormatError(f"{path}: truncated descriptor file")
    payload, (crc,) = data[:-4], struct.unpack("<I", data[-4:])
    if zlib.crc32(payload) != crc:
        raise FormatError(f"{path}: checksum mismatch")
    samples = np.frombuffer(payload, "<f8", n * k, _HEADER.size).astype(np.float64).reshape(n, k)
    model = {v: key for key, v in MODEL_CODES.items()}.get(mcode, "other")
    scheme = {v: key for key, v in SCHEME_CODES.items()}.get(scode, "other")
    return DescriptorSet(samples, tau, model, scheme, name or Path(path).stem)


def write_csv(ds: DescriptorSet, path, rows=None, header: str = "") -> None:
    """One vertex per row: ``vertex,f(t_0),...,f(t_M)``."""
    idx = range(ds.N) if rows is None else rows
    with open(path, "w") as fh:
        if header:
            fh.write(header)
        fh.write("vertex," + ",".join(f"t{k}" for k in range(ds.M + 1)) + "\n")
        for i in idx:
            fh.write(f"{i}," + ",".join(f"{x:.17g}" for x in ds.samples[i]) + "\n")


def write_curve_csv(ds: DescriptorSet, i: int, path, header: str = "") -> None:
    """``t,f`` pairs for one vertex."""
    if not 0 <= i < ds.N:
        raise InputError(f"vertex index {i} out of range [0, {ds.N})")
    with open(path, "w") as fh:
        if header:
            fh.write(header)
        fh.write("t,f\n")
        for k, x in enumerate(ds.samples[i]):
            fh.write(f"{ds.tau * k:.17g},{x:.17g}\n")
