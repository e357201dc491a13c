"""Analytic shape samplers and a small labelled dataset built from them.

Each shape is sampled uniformly by surface area.  Dataset instances get an
optional random per-axis stretch and an optional random heading about the up
(z) axis before normalisation into the unit sphere.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cloud import LabelDistribution, PointCloud, as_rng, normalize_unit_sphere, rotation_matrix
from .errors import InvalidArgumentError
from .interpolation import Sample

SHAPES = ("sphere", "cube", "cylinder", "cone")


def _sphere(n, rng):
    v = rng.normal(size=(n, 3))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def _cube(n, rng):
    # six faces of [-1, 1]^3, equal areas
    face = rng.integers(0, 6, size=n)
    pts = rng.uniform(-1.0, 1.0, size=(n, 3))
    axis = face // 2
    pts[np.arange(n), axis] = np.where(face % 2 == 0, -1.0, 1.0)
    return pts


def _disk(n, rng):
    r = np.sqrt(rng.random(n))
    t = rng.uniform(0, 2 * np.pi, n)
    return r * np.cos(t), r * np.sin(t)


def _cylinder(n, rng):
    # radius 1, z in [-1, 1]; side area 4*pi, each cap pi
    part = rng.choice(3, size=n, p=[4 / 6, 1 / 6, 1 / 6])
    pts = np.empty((n, 3))
    t = rng.uniform(0, 2 * np.pi, n)
    pts[:, 0], pts[:, 1] = np.cos(t), np.sin(t)
    pts[:, 2] = rng.uniform(-1.0, 1.0, n)
    cap = part > 0
    dx, dy = _disk(cap.sum(), rng)
    pts[cap, 0], pts[cap, 1] = dx, dy
    pts[cap, 2] = np.where(part[cap] == 1, -1.0, 1.0)
    return pts


def _cone(n, rng):
    # apex (0, 0, 1), base radius 1 at z = -1; side area pi*sqrt(5), base pi
    side = np.sqrt(5.0)
    on_side = rng.random(n) < side / (side + 1.0)
    pts = np.empty((n, 3))
    s = np.sqrt(rng.random(n))
    t = rng.uniform(0, 2 * np.pi, n)
    pts[:, 0], pts[:, 1] = s * np.cos(t), s * np.sin(t)
    pts[:, 2] = 1.0 - 2.0 * s
    base = ~on_side
    dx, dy = _disk(base.sum(), rng)
    pts[base, 0], pts[base, 1] = dx, dy
    pts[base, 2] = -1.0
    return pts


_SAMPLERS = {"sphere": _sphere, "cube": _cube, "cylinder": _cylinder, "cone": _cone}


def sample_shape(kind: str, n: int, rng=None) -> PointCloud:
    """Raw (unnormalised) surface samples of one analytic shape."""
    if kind not in _SAMPLERS:
        raise InvalidArgumentError(f"unknown shape {kind!r}; choose from {SHAPES}")
    return PointCloud(_SAMPLERS[kind](n, as_rng(rng)))


@dataclass(frozen=True, eq=False)
class Dataset:
    points: np.ndarray  # (M, N, 3)
    labels: np.ndarray  # (M,)
    class_names: tuple

    @property
    def num_classes(self) -> int:
        return len(self.class_names)

    def __len__(self):
        return self.labels.size

    def samples(self) -> list[Sample]:
        C = self.num_classes
        return [
            Sample(PointCloud(p), LabelDistribution.one_hot(int(c), C), i)
            for i, (p, c) in enumerate(zip(self.points, self.labels))
        ]


def make_synthetic_dataset(classes=SHAPES, per_class: int = 20, n_points: int = 256,
                           heading_randomization: bool = False, rng=None,
                           stretch: float = 0.0) -> Dataset:
    """Sample ``per_class`` shapes of each class, normalised into the unit sphere.

    ``stretch`` scales each axis by an independent factor drawn uniformly
    from ``[1 - stretch, 1 + stretch]``; ``heading_randomization`` applies a
    uniform random rotation about z.
    """
    if per_class < 1:
        raise InvalidArgumentError("per_class must be at least 1; the dataset would be empty")
    if not 0 <= stretch < 1:
        raise InvalidArgumentError("stretch must lie in [0, 1)")
    rng = as_rng(rng)
    classes = tuple(classes)
    points, labels = [], []
    for c, kind in enumerate(classes):
        for _ in range(per_class):
            pts = sample_shape(kind, n_points, rng).points
            if stretch > 0:
                pts = pts * rng.uniform(1 - stretch, 1 + stretch, size=3)
            if heading_randomization:
                pts = pts @ rotation_matrix("z", rng.uniform(0, 2 * np.pi)).T
            points.append(normalize_unit_sphere(pts).points)
            labels.append(c)
    return Dataset(np.stack(points), np.array(labels, dtype=np.int64), classes)
