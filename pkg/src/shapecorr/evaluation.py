"""Princeton-protocol scoring: normalised geodesic error and hit rate."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import sparse
from scipy.sparse.csgraph import dijkstra

from .correspondence import Matching
from .errors import InputError
from .mesh import CellAreas, TriangleMesh

DEFAULT_THRESHOLD = 0.25
CURVE_STEP = 0.005


@dataclass
class EvaluationReport:
    hit_rate_percent: float
    errors: np.ndarray
    curve: np.ndarray  # (K, 2): threshold, fraction of errors <= threshold
    threshold: float = DEFAULT_THRESHOLD
    query_indices: np.ndarray | None = None

    @property
    def mean_error(self) -> float:
        return float(np.mean(self.errors))


def edge_graph(mesh: TriangleMesh) -> sparse.csr_matrix:
    """Symmetric sparse graph of mesh edges weighted by Euclidean length."""
    e = mesh.edges()
    length = np.linalg.norm(mesh.vertices[e[:, 0]] - mesh.vertices[e[:, 1]], axis=1)
    n = mesh.n_vertices
    g = sparse.coo_matrix((length, (e[:, 0], e[:, 1])), shape=(n, n))
    return (g + g.T).tocsr()


def geodesic_distances(mesh: TriangleMesh, source, graph: sparse.csr_matrix | None = None) -> np.ndarray:
    """Dijkstra distances along mesh edges; ``inf`` marks unreachable vertices."""
    if graph is None:
        graph = edge_graph(mesh)
    src = np.atleast_1d(np.asarray(source, dtype=np.int64))
    if np.any((src < 0) | (src >= mesh.n_vertices)):
        raise InputError(f"source vertex out of range [0, {mesh.n_vertices})")
    d = dijkstra(graph, directed=False, indices=src)
    return d[0] if np.ndim(source) == 0 else d


def error_curve(errors: np.ndarray, step: float = CURVE_STEP, upper: float = 1.0) -> np.ndarray:
    thresholds = np.round(np.arange(0.0, upper + step / 2, step), 10)
    srt = np.sort(errors)
    frac = np.searchsorted(srt, thresholds, side="right") / len(errors)
    return np.column_stack([thresholds, frac])


def evaluate(matching: Matching, truth: np.ndarray, mesh: TriangleMesh, areas: CellAreas,
             threshold: float = DEFAULT_THRESHOLD, *, query_indices: np.ndarray | None = None) -> EvaluationReport:
    """Score ``matching`` against ground-truth targets on ``mesh``.

    ``truth[i]`` is the correct target vertex of query vertex ``i``. With
    ``query_indices`` only those query rows are scored. Every query gets a
    match, so the hit rate is the fraction of errors at or below the threshold.
    """
    truth = np.asarray(truth, dtype=np.int64)
    if len(truth) != len(matching):
        raise InputError(f"ground truth has {len(truth)} entries, matching has {len(matching)}")
    if not threshold >= 0:
        raise InputError(f"threshold must be non-negative, got {threshold}")
    rows = np.arange(len(matching)) if query_indices is None else np.asarray(query_indices, dtype=np.int64)
    pred = matching.matches[rows]
    gt = truth[rows]
    n = mesh.n_vertices
    if np.any((pred < 0) | (pred >= n)) or np.any((gt < 0) | (gt >= n)):
        raise InputError(f"match or ground-truth index outside target mesh [0, {n})")
    geo = np.zeros(len(rows))
    wrong = np.flatnonzero(pred != gt)
    if wrong.size:
        graph = edge_graph(mesh)
        sources, inverse = np.unique(gt[wrong], return_inverse=True)
        # bounded batches keep the dense distance block small
        for lo in range(0, len(sources), 256):
            block = dijkstra(graph, directed=False, indices=sources[lo : lo + 256])
            sel = np.flatnonzero((inverse >= lo) & (inverse < lo + 256))
            geo[wrong[sel]] = block[inverse[sel] - lo, pred[wrong[sel]]]
    if not np.all(np.isfinite(geo)):
        bad = rows[np.flatnonzero(~np.isfinite(geo))[0]]
        raise InputError(f"ground-truth vertex {truth[bad]} unreachable from match {matching.matches[bad]} (query {bad})")
    errors = geo / np.sqrt(areas.total_area)
    hits = int(np.count_nonzero(errors <= threshold))
    return EvaluationReport(100.0 * hits / len(errors), errors, error_curve(errors), float(threshold), rows)


def identity_truth(n: int) -> np.ndarray:
    return np.arange(n, dtype=np.int64)


def read_truth(path, n_query: int | None = None) -> np.ndarray:
    """One zero-based target index per line; line ``i`` (ignoring ``#`` comments) belongs to query ``i``."""
    out = []
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        s = line.split("#", 1)[0].strip()
        if not s:
            continue
        try:
            v = int(s)
        except ValueError:
            raise InputError(f"{path}:{lineno}: malformed ground-truth line {line!r}") from None
        if v < 0:
            raise InputError(f"{path}:{lineno}: negative ground-truth index {v}")
        out.append(v)
    if n_query is not None and len(out) != n_query:
        raise InputError(f"{path}: {len(out)} ground-truth entries for {n_query} query vertices")
    return np.array(out, dtype=np.int64)


def write_report(report: EvaluationReport, stem, header: str = "") -> tuple[Path, Path, Path]:
    """Write ``<stem>_errors.csv``, ``<stem>_curve.csv`` and ``<stem>_summary.txt``."""
    stem = Path(stem)
    errors_path = stem.with_name(stem.name + "_errors.csv")
    curve_path = stem.with_name(stem.name + "_curve.csv")
    summary_path = stem.with_name(stem.name + "_summary.txt")
    with open(errors_path, "w") as fh:
        fh.write(header + "query_index,error\n")
        rows = range(len(report.errors)) if report.query_indices is None else report.query_indices.tolist()
        fh.writelines(f"{i},{e:.17g}\n" for i, e in zip(rows, report.errors.tolist()))
    with open(curve_path, "w") as fh:
        fh.write(header + "threshold,fraction\n")
        fh.writelines(f"{t:.3f},{f:.17g}\n" for t, f in report.curve.tolist())
    summary_path.write_text(header + summary_line(report) + "\n")
    return errors_path, curve_path, summary_path


def summary_line(report: EvaluationReport) -> str:
    return (f"hit_rate={report.hit_rate_percent:.4f}% mean_error={report.mean_error:.6g} "
            f"threshold={report.threshold:g} n={len(report.errors)}")
