"""OFF mesh loading and area-weighted surface sampling."""

from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

from .cloud import PointCloud, as_rng
from .errors import InvalidArgumentError, InvalidInputError, ParseError


@dataclass(frozen=True, eq=False)
class TriangleMesh:
    vertices: np.ndarray
    faces: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=np.float64).reshape(-1, 3)
        f = np.asarray(self.faces, dtype=np.int64).reshape(-1, 3)
        if f.shape[0] < 1:
            raise InvalidInputError("a mesh needs at least one face")
        if f.min() < 0 or f.max() >= v.shape[0]:
            raise InvalidInputError("face index out of range")
        object.__setattr__(self, "vertices", v)
        object.__setattr__(self, "faces", f)

    def face_areas(self) -> np.ndarray:
        a, b, c = (self.vertices[self.faces[:, i]] for i in range(3))
        return 0.5 * np.linalg.norm(np.cross(b - a, c - a), axis=1)


_HEADER = re.compile(r"^(?:ST)?(?:C)?(?:N)?OFF(.*)$")


def _content_lines(text: str):
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield lineno, line


def parse_off(data) -> TriangleMesh:
    """Parse an OFF mesh; polygons with more than 3 vertices are fan-triangulated.

    Tolerates the header/count run-together seen in some ModelNet files,
    e.g. ``OFF490 518 0``.
    """
    if isinstance(data, bytes):
        data = data.decode("ascii", errors="replace")
    lines = _content_lines(data)

    def next_line(what):
        try:
            return next(lines)
        except StopIteration:
            raise ParseError(f"unexpected end of file while reading {what}") from None

    lineno, line = next_line("header")
    m = _HEADER.match(line)
    if m:
        rest = m.group(1).strip()
        if not rest:
            lineno, rest = next_line("counts")
    else:
        rest = line

    counts = rest.split()
    try:
        if len(counts) < 2:
            raise ValueError
        nv, nf = int(counts[0]), int(counts[1])
    except ValueError:
        raise ParseError(f"malformed counts {rest!r}", lineno) from None
    if nv < 0 or nf < 0:
        raise ParseError("negative element counts", lineno)

    verts = np.empty((nv, 3))
    for i in range(nv):
        lineno, line = next_line(f"vertex {i}")
        parts = line.split()
        try:
            verts[i] = [float(p) for p in parts[:3]]
            if len(parts) < 3:
                raise ValueError
        except ValueError:
            raise ParseError(f"malformed vertex {line!r}", lineno) from None

    tris = []
    for i in range(nf):
        lineno, line = next_line(f"face {i}")
        parts = line.split()
        try:
            k = int(parts[0])
            idx = [int(p) for p in parts[1 : 1 + k]]
        except (ValueError, IndexError):
            raise ParseError(f"malformed face {line!r}", lineno) from None
        if k < 3 or len(idx) != k:
            raise ParseError(f"face needs at least 3 indices, got {line!r}", lineno)
        if min(idx) < 0 or max(idx) >= nv:
            raise ParseError(f"face index out of range in {line!r}", lineno)
        for t in range(1, k - 1):
            tris.append((idx[0], idx[t], idx[t + 1]))

    if not tris:
        raise ParseError("mesh has no faces")
    return TriangleMesh(verts, np.array(tris, dtype=np.int64))


def read_off(path) -> TriangleMesh:
    with open(path, "rb") as f:
        return parse_off(f.read())


def sample_surface(mesh: TriangleMesh, n: int = 1024, rng=None) -> PointCloud:
    """Uniform samples on the mesh surface (faces weighted by area).

    The result is in mesh coordinates; compose with
    :func:`~pointmixup.cloud.normalize_unit_sphere` as needed.
    """
    if n < 1:
        raise InvalidArgumentError(f"need at least one sample, got {n}")
    areas = mesh.face_areas()
    cum = np.cumsum(areas)
    total = cum[-1]
    if not total > 0:
        raise InvalidInputError("mesh has zero surface area")
    rng = as_rng(rng)
    face = np.searchsorted(cum, rng.random(n) * total, side="right")
    face = np.minimum(face, len(areas) - 1)
    r1 = np.sqrt(rng.random(n))
    r2 = rng.random(n)
    u = 1.0 - r1
    v = r1 * (1.0 - r2)
    w = r1 * r2
    tri = mesh.vertices[mesh.faces[face]]
    pts = u[:, None] * tri[:, 0] + v[:, None] * tri[:, 1] + w[:, None] * tri[:, 2]
    return PointCloud(pts)
