"""Point cloud value types and per-cloud preprocessing.

All operations return new clouds; a :class:`PointCloud` never changes after
construction.  Randomised operations take an explicit ``rng`` which may be a
:class:`numpy.random.Generator`, an integer seed, or ``None``.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

from .errors import InvalidArgumentError, InvalidInputError

AXES = {"x": 0, "y": 1, "z": 2}


def as_rng(rng) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


class PointCloud:
    """An ordered, fixed-cardinality set of 3D points.

    Order is kept so that assignments can refer to point indices, but two
    clouds that differ only by a permutation describe the same set (their
    EMD is zero).
    """

    __slots__ = ("_points",)

    def __init__(self, points):
        pts = np.array(points, dtype=np.float64, copy=True)
        if pts.ndim == 1 and pts.size == 3:
            pts = pts.reshape(1, 3)
        if pts.ndim != 2 or pts.shape[1] != 3:
            raise InvalidInputError(f"expected an (N, 3) array, got shape {pts.shape}")
        if pts.shape[0] < 1:
            raise InvalidInputError("a point cloud needs at least one point")
        if not np.all(np.isfinite(pts)):
            raise InvalidInputError("point coordinates must be finite")
        pts.setflags(write=False)
        self._points = pts

    @property
    def points(self) -> np.ndarray:
        return self._points

    @property
    def n(self) -> int:
        return self._points.shape[0]

    def __len__(self):
        return self.n

    def __array__(self, dtype=None, copy=None):
        if dtype is None:
            return self._points
        return self._points.astype(dtype)

    def __repr__(self):
        return f"PointCloud(n={self.n})"

    def permuted(self, perm) -> "PointCloud":
        return PointCloud(self._points[np.asarray(perm)])


def _points(cloud) -> np.ndarray:
    if isinstance(cloud, PointCloud):
        return cloud.points
    return PointCloud(cloud).points


@dataclass(frozen=True, eq=False)
class LabelDistribution:
    """Class probability vector; entries are non-negative and sum to one."""

    probs: np.ndarray

    def __post_init__(self):
        p = np.array(self.probs, dtype=np.float64, copy=True).ravel()
        if p.size < 2:
            raise InvalidArgumentError("a label distribution needs at least 2 classes")
        if not np.all(np.isfinite(p)) or np.any(p < 0):
            raise InvalidInputError("label probabilities must be finite and non-negative")
        if abs(p.sum() - 1.0) > 1e-9:
            raise InvalidInputError(f"label probabilities sum to {p.sum()!r}, not 1")
        p.setflags(write=False)
        object.__setattr__(self, "probs", p)

    @classmethod
    def one_hot(cls, index: int, num_classes: int) -> "LabelDistribution":
        if not 0 <= index < num_classes:
            raise InvalidArgumentError(f"class index {index} outside [0, {num_classes})")
        p = np.zeros(num_classes)
        p[index] = 1.0
        return cls(p)

    @property
    def num_classes(self) -> int:
        return self.probs.size


def check_ratio(lam) -> float:
    lam = float(lam)
    if not 0.0 <= lam <= 1.0:
        raise InvalidArgumentError(f"mix ratio must lie in [0, 1], got {lam}")
    return lam


STRATEGIES = ("OA", "RA", "PS")


@dataclass(frozen=True, eq=False)
class MixedSample:
    """An interpolated cloud together with its mixed label and provenance."""

    cloud: PointCloud
    label: LabelDistribution
    lam: float
    strategy: str
    source_ids: tuple = field(default=(None, None))

    def __post_init__(self):
        check_ratio(self.lam)
        if self.strategy not in STRATEGIES:
            raise InvalidArgumentError(f"unknown strategy {self.strategy!r}")


# --------------------------------------------------------------------------
# preprocessing


def normalize_unit_sphere(cloud) -> PointCloud:
    """Center on the centroid and scale so the farthest point has norm 1.

    A cloud whose points all coincide maps to all zeros.
    """
    pts = _points(cloud)
    if np.all(pts == pts[0]):
        return PointCloud(np.zeros_like(pts))
    centered = pts - pts.mean(axis=0)
    # pre-scale by the largest component so tiny (even subnormal) spreads
    # do not overflow when divided by their radius
    out = centered / np.abs(centered).max()
    out /= np.linalg.norm(out, axis=1).max()
    # a second pass pins the centroid at the origin to rounding level
    out -= out.mean(axis=0)
    return PointCloud(out / np.linalg.norm(out, axis=1).max())


def replicate_to_cardinality(cloud, target_n: int, rng=None) -> PointCloud:
    """Pad a cloud to ``target_n`` points by duplicating random members.

    Every original point is kept once; the ``target_n - N`` extra points are
    drawn uniformly with replacement from the originals and appended.
    """
    pts = _points(cloud)
    n = pts.shape[0]
    target_n = int(target_n)
    if target_n < n:
        raise InvalidArgumentError(
            f"target cardinality {target_n} is below the cloud size {n}; "
            "replication cannot down-sample"
        )
    if target_n == n:
        return cloud if isinstance(cloud, PointCloud) else PointCloud(pts)
    extra = as_rng(rng).integers(0, n, size=target_n - n)
    return PointCloud(np.concatenate([pts, pts[extra]], axis=0))


def jitter(cloud, sigma: float = 0.02, clip: float | None = None, rng=None) -> PointCloud:
    """Add i.i.d. zero-mean Gaussian offsets to every coordinate."""
    if sigma < 0:
        raise InvalidArgumentError(f"sigma must be non-negative, got {sigma}")
    if clip is not None and clip < 0:
        raise InvalidArgumentError(f"clip must be non-negative, got {clip}")
    pts = _points(cloud)
    if sigma == 0:
        return PointCloud(pts)
    offsets = as_rng(rng).normal(0.0, sigma, size=pts.shape)
    if clip is not None:
        np.clip(offsets, -clip, clip, out=offsets)
    return PointCloud(pts + offsets)


def rotation_matrix(axis: str, angle: float) -> np.ndarray:
    """Right-handed rotation by ``angle`` radians about a coordinate axis."""
    if axis not in AXES:
        raise InvalidArgumentError(f"axis must be one of x, y, z; got {axis!r}")
    c, s = np.cos(angle), np.sin(angle)
    i = AXES[axis]
    j, k = (i + 1) % 3, (i + 2) % 3
    R = np.eye(3)
    R[j, j], R[j, k] = c, -s
    R[k, j], R[k, k] = s, c
    return R


def rotate(cloud, axis: str, angle: float) -> PointCloud:
    return PointCloud(_points(cloud) @ rotation_matrix(axis, angle).T)


@dataclass(frozen=True)
class Noise:
    sigma: float


@dataclass(frozen=True)
class Rotate:
    """Rotation about ``axis``; ``degrees`` is a fixed angle or a (lo, hi) range."""

    axis: str
    degrees: Union[float, Sequence[float]]


@dataclass(frozen=True)
class Scale:
    factor: float


@dataclass(frozen=True)
class DropPoint:
    rate: float


def perturb(cloud, transform, rng=None) -> PointCloud:
    """Apply one of the robustness perturbations (noise, rotation, scale, point drop)."""
    pts = _points(cloud)
    if isinstance(transform, Noise):
        if transform.sigma < 0:
            raise InvalidArgumentError("noise sigma must be non-negative")
        return jitter(pts, transform.sigma, rng=rng)
    if isinstance(transform, Rotate):
        deg = transform.degrees
        if np.ndim(deg) == 0:
            angle = float(deg)
        else:
            lo, hi = deg
            if lo > hi:
                raise InvalidArgumentError("rotation range must satisfy lo <= hi")
            angle = as_rng(rng).uniform(lo, hi)
        return rotate(pts, transform.axis, np.deg2rad(angle))
    if isinstance(transform, Scale):
        if not transform.factor > 0:
            raise InvalidArgumentError("scale factor must be positive")
        return PointCloud(pts * transform.factor)
    if isinstance(transform, DropPoint):
        if not 0 <= transform.rate < 1:
            raise InvalidArgumentError("drop rate must lie in [0, 1)")
        rng = as_rng(rng)
        n = pts.shape[0]
        n_drop = int(np.floor(transform.rate * n))
        if n_drop == 0:
            return PointCloud(pts)
        keep = np.sort(rng.permutation(n)[: n - n_drop])
        return replicate_to_cardinality(pts[keep], n, rng)
    raise InvalidArgumentError(f"unknown transform {transform!r}")


# --------------------------------------------------------------------------
# ASCII XYZ


def parse_xyz(text) -> PointCloud:
    """Parse ASCII XYZ text: one ``x y z`` triple per line, no header."""
    if isinstance(text, bytes):
        text = text.decode("ascii")
    rows = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        parts = line.split()
        if len(parts) != 3:
            raise InvalidInputError(f"line {lineno}: expected 3 values, got {len(parts)}")
        try:
            rows.append([float(v) for v in parts])
        except ValueError as exc:
            raise InvalidInputError(f"line {lineno}: {exc}") from None
    if not rows:
        raise InvalidInputError("XYZ input contains no points")
    return PointCloud(rows)


def read_xyz(path) -> PointCloud:
    with open(path, "rb") as f:
        return parse_xyz(f.read())


def format_xyz(cloud) -> str:
    buf = io.StringIO()
    for x, y, z in _points(cloud):
        buf.write(f"{x:.9g} {y:.9g} {z:.9g}\n")
    return buf.getvalue()


def write_xyz(cloud, path) -> None:
    with open(path, "w", newline="\n") as f:
        f.write(format_xyz(cloud))
