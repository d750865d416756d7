"""Small procedural meshes used by the tests and the benchmark."""

from __future__ import annotations

import numpy as np

from .mesh import TriangleMesh


def icosahedron(radius: float = 1.0) -> TriangleMesh:
    g = (1.0 + 5.0**0.5) / 2.0
    v = np.array(
        [
            [-1, g, 0], [1, g, 0], [-1, -g, 0], [1, -g, 0],
            [0, -1, g], [0, 1, g], [0, -1, -g], [0, 1, -g],
            [g, 0, -1], [g, 0, 1], [-g, 0, -1], [-g, 0, 1],
        ],
        dtype=float,
    )
    v *= radius / np.linalg.norm(v[0])
    f = np.array(
        [
            [0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
            [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
            [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
            [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1],
        ]
    )
    return TriangleMesh(v, f, "icosahedron")


def icosphere(subdivisions: int = 2, radius: float = 1.0) -> TriangleMesh:
    base = icosahedron()
    v = [tuple(x) for x in base.vertices]
    faces = base.triangles.tolist()
    for _ in range(subdivisions):
        cache: dict[tuple[int, int], int] = {}

        def mid(a: int, b: int) -> int:
            key = (a, b) if a < b else (b, a)
            if key not in cache:
                p = (np.asarray(v[a]) + np.asarray(v[b])) / 2.0
                v.append(tuple(p / np.linalg.norm(p)))
                cache[key] = len(v) - 1
            return cache[key]

        new = []
        for a, b, c in faces:
            ab, bc, ca = mid(a, b), mid(b, c), mid(c, a)
            new += [[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]
        faces = new
    return TriangleMesh(radius * np.array(v), np.array(faces), f"icosphere{subdivisions}")


def torus(n_major: int = 24, n_minor: int = 12, R: float = 1.0, r: float = 0.35,
          noise: float = 0.0, seed: int = 0) -> TriangleMesh:
    """Closed torus grid; ``noise`` jitters the tube radius to break symmetry."""
    rng = np.random.default_rng(seed)
    u = 2 * np.pi * np.arange(n_major) / n_major
    w = 2 * np.pi * np.arange(n_minor) / n_minor
    uu, ww = np.meshgrid(u, w, indexing="ij")
    rad = r * (1.0 + noise * rng.uniform(-1.0, 1.0, size=uu.shape))
    # slow bulge so the shape has no exact rotational symmetry even without noise
    rad = rad * (1.0 + 0.25 * np.cos(uu) + 0.1 * np.sin(2 * uu))
    x = (R + rad * np.cos(ww)) * np.cos(uu)
    y = (R + rad * np.cos(ww)) * np.sin(uu)
    z = rad * np.sin(ww)
    verts = np.stack([x, y, z], axis=-1).reshape(-1, 3)
    idx = np.arange(n_major * n_minor).reshape(n_major, n_minor)
    a = idx
    b = np.roll(idx, -1, axis=0)
    c = np.roll(idx, -1, axis=1)
    d = np.roll(np.roll(idx, -1, axis=0), -1, axis=1)
    tris = np.concatenate(
        [np.stack([a, b, d], -1).reshape(-1, 3), np.stack([a, d, c], -1).reshape(-1, 3)]
    )
    return TriangleMesh(verts, tris, f"torus{n_major}x{n_minor}")


def grid(nx: int = 4, ny: int = 4, spacing: float = 1.0) -> TriangleMesh:
    """Flat open grid in the z=0 plane, each cell split along one diagonal."""
    xs, ys = np.meshgrid(np.arange(nx + 1), np.arange(ny + 1), indexing="ij")
    verts = spacing * np.stack([xs, ys, np.zeros_like(xs)], axis=-1).reshape(-1, 3).astype(float)
    idx = np.arange((nx + 1) * (ny + 1)).reshape(nx + 1, ny + 1)
    a, b = idx[:-1, :-1], idx[1:, :-1]
    c, d = idx[:-1, 1:], idx[1:, 1:]
    tris = np.concatenate(
        [np.stack([a, b, d], -1).reshape(-1, 3), np.stack([a, d, c], -1).reshape(-1, 3)]
    )
    return TriangleMesh(verts, tris, f"grid{nx}x{ny}")


def unit_square() -> TriangleMesh:
    v = [[0, 0, 0], [1, 0, 0], [1, 1, 0], [0, 1, 0]]
    return TriangleMesh(v, [[0, 1, 2], [0, 2, 3]], "square")
