"""Heading alignment about the up axis before mixing unaligned clouds.

The heading of a cloud is the direction of the dominant principal axis of its
projection onto the plane orthogonal to ``up_axis``.  The 180 degree
ambiguity of an eigenvector is resolved by orienting it so that the third
central moment of the projections is positive.  Objects whose planar
covariance is nearly isotropic have no meaningful heading and are left
untouched.

This PCA realisation is a choice of this package; it is not the only way to
align symmetry axes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cloud import AXES, PointCloud, _points, rotate
from .errors import InvalidArgumentError

# standardised skewness below this is treated as "no preferred direction"
_SKEW_FLOOR = 1e-6


@dataclass(frozen=True)
class AlignmentConfig:
    up_axis: str = "z"
    symmetry_tolerance: float = 0.05

    def __post_init__(self):
        if self.up_axis not in AXES:
            raise InvalidArgumentError(f"up_axis must be x, y or z; got {self.up_axis!r}")
        if not 0 < self.symmetry_tolerance < 1:
            raise InvalidArgumentError("symmetry_tolerance must lie in (0, 1)")


def planar_axes(up_axis: str) -> tuple[int, int]:
    """Indices of the two planar coordinates, ordered so rotation about up is positive."""
    i = AXES[up_axis]
    return (i + 1) % 3, (i + 2) % 3


def estimate_heading(cloud, cfg: AlignmentConfig = AlignmentConfig()) -> tuple[float, bool]:
    """Return ``(angle, confident)``.

    ``angle`` (radians) is the rotation about the up axis that brings the
    dominant planar direction onto the first planar axis, so a box turned by
    +30 degrees yields -30 degrees.  ``confident`` is False when the relative
    eigenvalue gap is under ``cfg.symmetry_tolerance``; the angle is then 0.
    """
    pts = _points(cloud)
    if pts.shape[0] < 3:
        raise InvalidArgumentError("heading estimation needs at least 3 points")
    j, k = planar_axes(cfg.up_axis)
    planar = pts[:, [j, k]]
    planar = planar - planar.mean(axis=0)
    cov = planar.T @ planar / planar.shape[0]
    evals, evecs = np.linalg.eigh(cov)
    top = evals[1]
    if top <= 0 or (evals[1] - evals[0]) / top < cfg.symmetry_tolerance:
        return 0.0, False
    e = evecs[:, 1]
    proj = planar @ e
    skew = np.mean(proj**3) / top**1.5
    if abs(skew) > _SKEW_FLOOR:
        if skew < 0:
            e = -e
    elif e[0] < 0 or (e[0] == 0 and e[1] < 0):
        e = -e
    return -float(np.arctan2(e[1], e[0])), True


def align_cloud(cloud, cfg: AlignmentConfig = AlignmentConfig()) -> tuple[PointCloud, float]:
    """Rotate a cloud into its canonical heading; returns the cloud and the angle applied."""
    angle, confident = estimate_heading(cloud, cfg)
    if not confident:
        return cloud if isinstance(cloud, PointCloud) else PointCloud(cloud), 0.0
    return rotate(cloud, cfg.up_axis, angle), angle


def align_pair(a, b, cfg: AlignmentConfig = AlignmentConfig()) -> tuple[PointCloud, PointCloud]:
    """Canonicalise both clouds' headings independently."""
    return align_cloud(a, cfg)[0], align_cloud(b, cfg)[0]
