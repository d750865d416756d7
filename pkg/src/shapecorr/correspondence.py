"""Trapezoidal L1 descriptor distance and nearest-neighbour matching."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _accel
from .descriptor import Descriptor, DescriptorSet
from .errors import InputError, FormatError


@dataclass(frozen=True)
class Matching:
    matches: np.ndarray
    distances: np.ndarray

    def __len__(self) -> int:
        return len(self.matches)


def descriptor_distance(f, g, tau: float | None = None) -> float:
    """``tau * (|d_0|/2 + |d_1| + ... + |d_{M-1}| + |d_M|/2)`` with ``d = f - g``.

    ``f`` and ``g`` may be Descriptor objects or raw arrays; ``tau`` defaults to the
    first descriptor's step.
    """
    if isinstance(f, Descriptor):
        tau = f.tau if tau is None else tau
        f = f.samples
    if isinstance(g, Descriptor):
        g = g.samples
    if tau is None:
        raise InputError("tau is required for raw sample arrays")
    f = np.asarray(f, dtype=np.float64)
    g = np.asarray(g, dtype=np.float64)
    if f.shape != g.shape or f.ndim != 1:
        raise InputError(f"descriptor length mismatch: {f.shape} vs {g.shape}")
    last = len(f) - 1
    s = 0.5 * abs(f[0] - g[0])
    for k in range(1, last):
        s = s + abs(f[k] - g[k])
    if last > 0:
        s = s + 0.5 * abs(f[last] - g[last])
    return float(tau * s)


def match_bruteforce(query: DescriptorSet, target: DescriptorSet) -> Matching:
    """Reference O(N * N' * M) matcher: Python loop over every pair."""
    _check_compatible(query, target)
    n = query.N
    idx = np.empty(n, dtype=np.int64)
    dist = np.empty(n)
    for i in range(n):
        best, bj = np.inf, -1
        for j in range(target.N):
            d = descriptor_distance(query.samples[i], target.samples[j], query.tau)
            if d < best:
                best, bj = d, j
        idx[i], dist[i] = bj, best
    return Matching(idx, dist)


def match(query: DescriptorSet, target: DescriptorSet, *, workers: int = 1,
          use_numba: bool | None = None) -> Matching:
    """Nearest target descriptor for every query vertex; ties go to the lowest target index."""
    _check_compatible(query, target)
    idx, dist = _accel.nearest_l1(query.samples, target.samples, query.tau,
                                  workers=workers, use_numba=use_numba)
    return Matching(idx, dist)


def _check_compatible(query: DescriptorSet, target: DescriptorSet) -> None:
    if query.samples.shape[1] != target.samples.shape[1]:
        raise InputError(f"sample count mismatch: query M={query.M}, target M={target.M}")
    if query.model != target.model:
        raise InputError(f"model mismatch: {query.model} vs {target.model}")


def write_matching_csv(m: Matching, path, header: str = "") -> None:
    with open(path, "w") as fh:
        if header:
            fh.write(header)
        fh.write("query_index,target_index,distance\n")
        for i, (j, d) in enumerate(zip(m.matches.tolist(), m.distances.tolist())):
            fh.write(f"{i},{j},{d:.17g}\n")


def read_matching_csv(path) -> Matching:
    rows = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            s = line.strip()
            if not s or s.startswith("#") or s.startswith("query_index"):
                continue
            parts = s.split(",")
            try:
                q, t, d = int(parts[0]), int(parts[1]), float(parts[2])
            except (ValueError, IndexError):
                raise FormatError(f"{path}:{lineno}: malformed matching line {s!r}") from None
            if q != len(rows):
                raise FormatError(f"{path}:{lineno}: expected query index {len(rows)}, got {q}")
            rows.append((t, d))
    if not rows:
        raise FormatError(f"{path}: empty matching file")
    arr = np.array(rows)
    return Matching(arr[:, 0].astype(np.int64), arr[:, 1])
