import numpy as np
import pytest

from shapecorr import synthetic
from shapecorr.correspondence import Matching
from shapecorr.errors import InputError
from shapecorr.evaluation import (
    error_curve,
    evaluate,
    geodesic_distances,
    identity_truth,
    read_truth,
    write_report,
)
from shapecorr.mesh import TriangleMesh, compute_areas


def strip(n):
    """Triangle strip whose bottom row is a unit-spaced path along x."""
    bottom = [[k, 0.0, 0.0] for k in range(n)]
    top = [[k, 1.0, 0.0] for k in range(n)]
    tris = []
    for k in range(n - 1):
        tris += [[k, k + 1, n + k + 1], [k, n + k + 1, n + k]]
    return TriangleMesh(bottom + top, tris)


def test_path_distances():
    d = geodesic_distances(strip(6), 0)
    np.testing.assert_allclose(d[:6], np.arange(6.0))
    assert d[0] == 0


def test_graph_distance_bounds_chord():
    mesh = synthetic.icosahedron()
    for s in range(12):
        d = geodesic_distances(mesh, s)
        chord = np.linalg.norm(mesh.vertices - mesh.vertices[s], axis=1)
        assert np.all(d >= chord - 1e-12)


def test_disconnected_is_infinite():
    mesh = TriangleMesh([[0, 0, 0], [1, 0, 0], [0, 1, 0], [5, 0, 0], [6, 0, 0], [5, 1, 0]], [[0, 1, 2], [3, 4, 5]])
    d = geodesic_distances(mesh, 0)
    assert np.all(np.isinf(d[3:]))
    with pytest.raises(InputError, match="unreachable"):
        evaluate(Matching(np.array([3]), np.zeros(1)), np.array([0]), mesh, compute_areas(mesh))


def test_perfect_matching(small_torus):
    n = small_torus.n_vertices
    rep = evaluate(Matching(np.arange(n), np.zeros(n)), identity_truth(n), small_torus, compute_areas(small_torus))
    assert rep.hit_rate_percent == 100.0
    assert np.all(rep.errors == 0)


def test_three_of_four():
    mesh = strip(40)
    areas = compute_areas(mesh)
    truth = np.array([0, 1, 2, 3])
    pred = np.array([0, 1, 2, 39])
    rep = evaluate(Matching(pred, np.zeros(4)), truth, mesh, areas)
    assert rep.hit_rate_percent == 75.0
    assert rep.errors[3] == pytest.approx(36.0 / np.sqrt(39.0))


def test_hit_rate_monotone_in_threshold(small_torus, rng):
    n = small_torus.n_vertices
    areas = compute_areas(small_torus)
    m = Matching(rng.integers(0, n, n), np.zeros(n))
    rates = [evaluate(m, identity_truth(n), small_torus, areas, t).hit_rate_percent for t in np.linspace(0, 1, 21)]
    assert np.all(np.diff(rates) >= 0)
    curve = evaluate(m, identity_truth(n), small_torus, areas).curve
    assert np.all(np.diff(curve[:, 1]) >= 0) and curve[-1, 1] <= 1
    assert curve[1, 0] == pytest.approx(0.005)


def test_scale_invariance(small_torus, rng):
    n = small_torus.n_vertices
    m = Matching(rng.integers(0, n, n), np.zeros(n))
    big = TriangleMesh(4.0 * small_torus.vertices, small_torus.triangles)
    e0 = evaluate(m, identity_truth(n), small_torus, compute_areas(small_torus)).errors
    e1 = evaluate(m, identity_truth(n), big, compute_areas(big)).errors
    np.testing.assert_allclose(e1, e0, rtol=1e-12)


def test_query_subset(small_torus):
    n = small_torus.n_vertices
    m = Matching(np.roll(np.arange(n), 1), np.zeros(n))
    rows = np.arange(0, n, 7)
    rep = evaluate(m, identity_truth(n), small_torus, compute_areas(small_torus), query_indices=rows)
    assert len(rep.errors) == len(rows)


def test_length_mismatch(small_torus):
    with pytest.raises(InputError):
        evaluate(Matching(np.arange(3), np.zeros(3)), np.arange(4), small_torus, compute_areas(small_torus))


def test_error_curve_values():
    curve = error_curve(np.array([0.0, 0.1, 0.3, 2.0]))
    lookup = dict(zip(np.round(curve[:, 0], 3), curve[:, 1]))
    assert lookup[0.0] == 0.25 and lookup[0.1] == 0.5 and lookup[0.25] == 0.5 and lookup[1.0] == 0.75


def test_read_truth(tmp_path):
    (tmp_path / "gt.txt").write_text("# header\n2\n0\n1\n")
    assert read_truth(tmp_path / "gt.txt", 3).tolist() == [2, 0, 1]
    (tmp_path / "bad.txt").write_text("2\nx\n1\n")
    with pytest.raises(InputError, match=r"bad.txt:2"):
        read_truth(tmp_path / "bad.txt")
    with pytest.raises(InputError, match="4 query"):
        read_truth(tmp_path / "gt.txt", 4)
