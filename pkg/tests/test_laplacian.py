import numpy as np
import pytest

from shapecorr import synthetic
from shapecorr.errors import MeshError
from shapecorr.laplacian import assemble, export_matrix_market, negative_weight_count
from shapecorr.mesh import TriangleMesh, compute_areas


def op_of(mesh):
    return assemble(mesh, compute_areas(mesh))


def test_unit_square_weights():
    W = op_of(synthetic.unit_square()).W.toarray()
    # diagonal edge 0-2: both opposite angles are right angles
    assert W[0, 2] == pytest.approx(0.0, abs=1e-15)
    for i, j in [(0, 1), (1, 2), (2, 3), (3, 0)]:
        assert W[i, j] == pytest.approx(0.5, abs=1e-15)
    assert W[1, 3] == 0.0


def test_regular_tetrahedron_weights_equal():
    v = np.array([[1, 1, 1], [1, -1, -1], [-1, 1, -1], [-1, -1, 1]], dtype=float)
    mesh = TriangleMesh(v, [[0, 1, 2], [0, 3, 1], [0, 2, 3], [1, 3, 2]])
    W = op_of(mesh).W.toarray()
    off = W[~np.eye(4, dtype=bool)]
    # each edge sees two 60 degree angles: (cot 60 + cot 60) / 2
    np.testing.assert_allclose(off, 1 / np.sqrt(3), rtol=1e-14)


def test_row_sums_and_symmetry(small_torus_op):
    W = small_torus_op.W
    row_norm = np.asarray(abs(W).sum(axis=1)).ravel()
    assert np.all(np.abs(W @ np.ones(W.shape[0])) <= 1e-10 * row_norm)
    asym = abs(W - W.T).max()
    assert asym <= 1e-12 * abs(W).max()


def test_sparsity_matches_adjacency(small_torus, small_torus_op):
    W = small_torus_op.W.tocoo()
    pattern = {(i, j) for i, j in zip(W.row.tolist(), W.col.tolist()) if i != j}
    edges = {tuple(e) for e in small_torus.edges().tolist()}
    assert pattern == edges | {(j, i) for i, j in edges}


def test_negative_semidefinite(small_torus_op, rng):
    W = small_torus_op.W
    for _ in range(20):
        u = rng.normal(size=W.shape[0])
        assert u @ (W @ u) <= 1e-12 * np.abs(u) @ (abs(W) @ np.abs(u))


def test_scaling(small_torus):
    s = 3.7
    op0 = op_of(small_torus)
    op1 = op_of(TriangleMesh(s * small_torus.vertices, small_torus.triangles))
    np.testing.assert_allclose(op1.W.toarray(), op0.W.toarray(), rtol=1e-12, atol=1e-13)
    np.testing.assert_allclose(op1.D, s * s * op0.D, rtol=1e-12)


def test_planar_interior_vertex_is_harmonic():
    mesh = synthetic.grid(4, 4)
    rng = np.random.default_rng(1)
    v = mesh.vertices.copy()
    interior = np.flatnonzero((v[:, 0] > 0) & (v[:, 0] < 4) & (v[:, 1] > 0) & (v[:, 1] < 4))
    v[interior, :2] += rng.uniform(-0.2, 0.2, size=(len(interior), 2))
    op = op_of(TriangleMesh(v, mesh.triangles))
    scale = np.asarray(abs(op.W).sum(axis=1)).ravel()
    for axis in range(3):
        Lx = op.W @ v[:, axis]
        assert np.all(np.abs(Lx[interior]) <= 1e-8 * scale[interior])


def test_obtuse_weights_kept():
    # a very flat triangle pair produces a negative weight across the shared edge
    mesh = TriangleMesh([[0, 0, 0], [4, 0, 0], [2, 0.3, 0], [2, -0.3, 0]], [[0, 1, 2], [1, 0, 3]])
    op = op_of(mesh)
    assert op.W[0, 1] < 0
    assert negative_weight_count(op) == 1


def test_collinear_triangle_rejected():
    from shapecorr.laplacian import cotangents

    mesh = TriangleMesh([[0, 0, 0], [1, 0, 0], [2, 0, 0], [0, 1, 0]], [[0, 1, 3], [0, 1, 2]])
    with pytest.raises(MeshError, match="triangle 1"):
        cotangents(mesh)


def test_matrix_market_export(tmp_path, small_torus_op):
    from scipy.io import mmread

    export_matrix_market(small_torus_op, tmp_path / "op")
    W = mmread(tmp_path / "op_W.mtx").toarray()
    D = mmread(tmp_path / "op_D.mtx").toarray()
    np.testing.assert_allclose(W, small_torus_op.W.toarray(), rtol=1e-15)
    np.testing.assert_allclose(np.diag(D), small_torus_op.D, rtol=1e-15)
