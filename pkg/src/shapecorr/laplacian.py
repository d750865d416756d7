"""Cotangent stiffness matrix and barycentric mass matrix."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy import sparse

from .errors import MeshError
from .mesh import CellAreas, TriangleMesh

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class OperatorPair:
    """Stiffness ``W`` (negative semidefinite, symmetric) and mass diagonal ``D``.

    The Laplace-Beltrami operator is ``L = D^-1 W``.
    """

    W: sparse.csr_matrix
    D: np.ndarray

    @property
    def N(self) -> int:
        return len(self.D)

    def apply_L(self, u: np.ndarray) -> np.ndarray:
        return (self.W @ u) / (self.D if np.ndim(u) == 1 else self.D[:, None])


def cotangents(mesh: TriangleMesh) -> np.ndarray:
    """Cotangent of the angle at each triangle corner, shape (F, 3)."""
    p = mesh.vertices[mesh.triangles]
    cots = np.empty((mesh.n_triangles, 3))
    for c in range(3):
        u = p[:, (c + 1) % 3] - p[:, c]
        v = p[:, (c + 2) % 3] - p[:, c]
        sin2 = np.linalg.norm(np.cross(u, v), axis=1)
        with np.errstate(divide="ignore", invalid="ignore"):
            cots[:, c] = np.einsum("ij,ij->i", u, v) / sin2
    bad = np.flatnonzero(~np.all(np.isfinite(cots), axis=1))
    if bad.size:
        raise MeshError(f"triangle {bad[0]} has a non-finite cotangent (collinear vertices)")
    return cots


def assemble(mesh: TriangleMesh, areas: CellAreas) -> OperatorPair:
    """Assemble ``W_ij = (cot a_ij + cot b_ij) / 2`` and ``D = diag(vertex areas)``.

    Boundary edges receive their single opposite angle. Negative weights from
    obtuse triangles are kept.
    """
    n = mesh.n_vertices
    t = mesh.triangles
    cots = cotangents(mesh)
    # corner c is opposite the edge (c+1, c+2)
    rows, cols, vals = [], [], []
    for c in range(3):
        i = t[:, (c + 1) % 3]
        j = t[:, (c + 2) % 3]
        w = 0.5 * cots[:, c]
        rows += [i, j]
        cols += [j, i]
        vals += [w, w]
    rows = np.concatenate(rows)
    cols = np.concatenate(cols)
    vals = np.concatenate(vals)
    off = sparse.coo_matrix((vals, (rows, cols)), shape=(n, n)).tocsr()
    off.sum_duplicates()
    diag = -np.asarray(off.sum(axis=1)).ravel()
    W = (off + sparse.diags(diag)).tocsr()
    W.sort_indices()
    n_neg = int(np.count_nonzero(off.data < 0))
    if n_neg:
        log.debug("%s: %d negative cotangent weights (obtuse triangles)", mesh.name or "mesh", n_neg // 2)
    return OperatorPair(W, np.array(areas.vertex_areas, dtype=np.float64))


def negative_weight_count(op: OperatorPair) -> int:
    """Number of undirected edges with a negative cotangent weight."""
    off = sparse.triu(op.W, k=1)
    return int(np.count_nonzero(off.data < 0))


def export_matrix_market(op: OperatorPair, stem) -> None:
    """Write ``<stem>_W.mtx`` and ``<stem>_D.mtx`` (coordinate format)."""
    from scipy.io import mmwrite

    mmwrite(f"{stem}_W.mtx", op.W, symmetry="symmetric")
    mmwrite(f"{stem}_D.mtx", sparse.diags(op.D).tocoo(), symmetry="symmetric")
