"""Triangle meshes: loading, validation and barycentric cell areas."""

from __future__ import annotations

import hashlib
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import MeshError

log = logging.getLogger(__name__)

# 2*area / longest_edge**2 below this is treated as a collinear triangle
_DEGENERACY_RTOL = 1e-14


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class TriangleMesh:
    """Discrete shape: vertex coordinates plus zero-based triangle index triples."""

    vertices: np.ndarray
    triangles: np.ndarray
    name: str = ""

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=np.float64)
        t = np.asarray(self.triangles)
        if v.ndim != 2 or v.shape[1] != 3:
            raise MeshError(f"vertices must have shape (N, 3), got {v.shape}")
        if t.ndim != 2 or t.shape[1] != 3:
            raise MeshError(f"triangles must have shape (F, 3), got {t.shape}")
        if len(v) < 3:
            raise MeshError(f"need at least 3 vertices, got {len(v)}")
        if len(t) < 1:
            raise MeshError("mesh has no triangles")
        if not np.all(np.isfinite(v)):
            raise MeshError("non-finite vertex coordinate")
        if t.dtype.kind not in "iu":
            if not np.all(np.equal(np.mod(t, 1), 0)):
                raise MeshError("triangle indices must be integers")
        t = t.astype(np.int64)
        bad = np.flatnonzero(np.any((t < 0) | (t >= len(v)), axis=1))
        if bad.size:
            raise MeshError(f"triangle {bad[0]} has index out of range [0, {len(v)}): {t[bad[0]].tolist()}")
        rep = np.flatnonzero((t[:, 0] == t[:, 1]) | (t[:, 1] == t[:, 2]) | (t[:, 0] == t[:, 2]))
        if rep.size:
            raise MeshError(f"triangle {rep[0]} repeats a vertex: {t[rep[0]].tolist()}")
        object.__setattr__(self, "vertices", _frozen(v))
        object.__setattr__(self, "triangles", _frozen(t))

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_triangles(self) -> int:
        return len(self.triangles)

    def edges(self) -> np.ndarray:
        """Unique undirected edges as an (E, 2) array with ``i < j``."""
        t = self.triangles
        e = np.concatenate([t[:, [0, 1]], t[:, [1, 2]], t[:, [2, 0]]])
        e.sort(axis=1)
        return np.unique(e, axis=0)

    def content_hash(self) -> str:
        h = hashlib.sha256()
        h.update(np.ascontiguousarray(self.vertices, dtype="<f8").tobytes())
        h.update(np.ascontiguousarray(self.triangles, dtype="<i8").tobytes())
        return h.hexdigest()


@dataclass(frozen=True)
class CellAreas:
    triangle_areas: np.ndarray
    vertex_areas: np.ndarray
    total_area: float = field(default=0.0)


def _triangle_geometry(mesh: TriangleMesh) -> tuple[np.ndarray, np.ndarray]:
    p = mesh.vertices[mesh.triangles]
    cross = np.cross(p[:, 1] - p[:, 0], p[:, 2] - p[:, 0])
    area = 0.5 * np.linalg.norm(cross, axis=1)
    longest = np.max(
        np.stack(
            [
                np.sum((p[:, 1] - p[:, 0]) ** 2, axis=1),
                np.sum((p[:, 2] - p[:, 1]) ** 2, axis=1),
                np.sum((p[:, 0] - p[:, 2]) ** 2, axis=1),
            ]
        ),
        axis=0,
    )
    return area, longest


def degenerate_triangles(mesh: TriangleMesh) -> np.ndarray:
    """Indices of triangles with (numerically) zero area."""
    area, longest = _triangle_geometry(mesh)
    return np.flatnonzero(~(2.0 * area > _DEGENERACY_RTOL * longest))


def compute_areas(mesh: TriangleMesh) -> CellAreas:
    """Triangle areas and barycentric (equal-thirds) vertex areas."""
    area, longest = _triangle_geometry(mesh)
    bad = np.flatnonzero(~(2.0 * area > _DEGENERACY_RTOL * longest))
    if bad.size:
        raise MeshError(f"degenerate (zero-area) triangle {bad[0]}: {mesh.triangles[bad[0]].tolist()}")
    vertex_areas = np.zeros(mesh.n_vertices)
    for c in range(3):
        np.add.at(vertex_areas, mesh.triangles[:, c], area / 3.0)
    orphan = np.flatnonzero(vertex_areas <= 0.0)
    if orphan.size:
        raise MeshError(f"vertex {orphan[0]} is not referenced by any triangle")
    return CellAreas(_frozen(area), _frozen(vertex_areas), float(np.sum(area)))


def validate(mesh: TriangleMesh) -> TriangleMesh:
    compute_areas(mesh)
    return mesh


# ---------------------------------------------------------------------------
# file formats


def _read_rows(path: Path, width: int, kind: type, what: str) -> list[list]:
    text = Path(path).read_text()
    rows = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != width:
            raise MeshError(f"{path}:{lineno}: expected {width} values in {what} line, got {len(parts)}")
        try:
            rows.append([kind(x) for x in parts])
        except ValueError:
            raise MeshError(f"{path}:{lineno}: cannot parse {what} line {line!r}") from None
    if not rows:
        raise MeshError(f"{path}: empty {what} file")
    return rows


def load_tosca(vert_path, tri_path, name: str | None = None) -> TriangleMesh:
    """Read a TOSCA ``.vert``/``.tri`` pair. Triangle indices in the file are one-based."""
    vert_path, tri_path = Path(vert_path), Path(tri_path)
    verts = np.array(_read_rows(vert_path, 3, float, "vertex"), dtype=np.float64)
    tris = np.array(_read_rows(tri_path, 3, int, "triangle"), dtype=np.int64)
    n = len(verts)
    bad = np.flatnonzero(np.any((tris < 1) | (tris > n), axis=1))
    if bad.size:
        raise MeshError(
            f"{tri_path}: triangle {bad[0]} ({tris[bad[0]].tolist()}) out of range; "
            f".tri indices are one-based in [1, {n}]"
        )
    log.debug("converted one-based .tri indices of %s to zero-based", tri_path)
    mesh = TriangleMesh(verts, tris - 1, name or vert_path.stem)
    return validate(mesh)


def load_off(path, name: str | None = None) -> TriangleMesh:
    path = Path(path)
    lines = []
    for lineno, raw in enumerate(path.read_text().splitlines(), start=1):
        s = raw.split("#", 1)[0].strip()
        if s:
            lines.append((lineno, s))
    if not lines:
        raise MeshError(f"{path}: empty file")
    lineno, head = lines[0]
    if not head.startswith("OFF"):
        raise MeshError(f"{path}:{lineno}: missing OFF header")
    rest = head[3:].split()
    pos = 1
    if not rest:
        if len(lines) < 2:
            raise MeshError(f"{path}: missing counts line")
        lineno, counts = lines[1]
        rest = counts.split()
        pos = 2
    try:
        n, f = int(rest[0]), int(rest[1])
    except (ValueError, IndexError):
        raise MeshError(f"{path}:{lineno}: malformed counts line") from None
    if len(lines) - pos != n + f:
        raise MeshError(f"{path}: header declares {n} vertices and {f} faces, found {len(lines) - pos} data lines")
    verts = np.empty((n, 3))
    for k in range(n):
        lineno, s = lines[pos + k]
        parts = s.split()
        if len(parts) < 3:
            raise MeshError(f"{path}:{lineno}: vertex line needs 3 coordinates")
        try:
            verts[k] = [float(x) for x in parts[:3]]
        except ValueError:
            raise MeshError(f"{path}:{lineno}: cannot parse vertex line") from None
    tris = np.empty((f, 3), dtype=np.int64)
    for k in range(f):
        lineno, s = lines[pos + n + k]
        try:
            parts = [int(x) for x in s.split()]
        except ValueError:
            raise MeshError(f"{path}:{lineno}: cannot parse face line") from None
        if not parts or parts[0] != 3 or len(parts) < 4:
            raise MeshError(f"{path}:{lineno}: only triangular faces are supported, got {s!r}")
        tris[k] = parts[1:4]
    return validate(TriangleMesh(verts, tris, name or path.stem))


def save_off(mesh: TriangleMesh, path) -> None:
    out = [f"OFF\n{mesh.n_vertices} {mesh.n_triangles} 0\n"]
    out.extend(f"{x:.17g} {y:.17g} {z:.17g}\n" for x, y, z in mesh.vertices.tolist())
    out.extend(f"3 {a} {b} {c}\n" for a, b, c in mesh.triangles.tolist())
    Path(path).write_text("".join(out))


def load_mesh(path) -> TriangleMesh:
    """Load by extension: ``.off``, or ``.vert`` with a sibling ``.tri``."""
    path = Path(path)
    suffix = path.suffix.lower()
    if suffix == ".off":
        return load_off(path)
    if suffix in (".vert", ".tri"):
        return load_tosca(path.with_suffix(".vert"), path.with_suffix(".tri"))
    raise MeshError(f"{path}: unsupported mesh format (expected .off or .vert/.tri)")
