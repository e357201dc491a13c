"""Interpolation between point clouds and mixup sample construction.

Three strategies are available:

``OA``  optimal assignment: match points by EMD and move each point along its
        matched segment, ``u_i = (1 - lam) * a_i + lam * b_perm[i]``.
``RA``  same formula along a uniformly random bijection (a baseline that is
        not a shortest path under EMD).
``PS``  point sampling: ``N - floor(lam * N)`` points of ``a`` and
        ``floor(lam * N)`` points of ``b``, drawn without replacement.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .cloud import (
    LabelDistribution,
    MixedSample,
    PointCloud,
    _points,
    as_rng,
    check_ratio,
    replicate_to_cardinality,
)
from .emd import Assignment, EmdResult, emd
from .errors import InvalidArgumentError

Solver = Callable[[object, object], EmdResult]

# gamma values used for Beta(gamma, gamma) in the reference experiments
GAMMA_INPUT_UNALIGNED = 0.4
GAMMA_MANIFOLD_UNALIGNED = 1.5
GAMMA_INPUT_ALIGNED = 1.0
GAMMA_MANIFOLD_ALIGNED = 2.0


def _same_size(a, b):
    x, y = _points(a), _points(b)
    if x.shape[0] != y.shape[0]:
        raise InvalidArgumentError(
            f"clouds must have equal cardinality ({x.shape[0]} != {y.shape[0]}); "
            "replicate the smaller one first"
        )
    return x, y


def _lerp(x, y, lam):
    return (1.0 - lam) * x + lam * y


def mix_oa(a, b, lam, solver: Solver = emd) -> tuple[PointCloud, Assignment]:
    """Optimal-assignment interpolant and the assignment it used."""
    lam = check_ratio(lam)
    x, y = _same_size(a, b)
    res = solver(x, y)
    return PointCloud(_lerp(x, y[res.perm], lam)), res.assignment


def mix_ra(a, b, lam, rng=None) -> PointCloud:
    lam = check_ratio(lam)
    x, y = _same_size(a, b)
    perm = as_rng(rng).permutation(x.shape[0])
    return PointCloud(_lerp(x, y[perm], lam))


def mix_ps(a, b, lam, rng=None) -> PointCloud:
    """Union of random subsets; points from ``a`` come first, in their original order."""
    lam = check_ratio(lam)
    x, y = _same_size(a, b)
    rng = as_rng(rng)
    n = x.shape[0]
    k = int(np.floor(lam * n))
    from_a = np.sort(rng.choice(n, size=n - k, replace=False))
    from_b = np.sort(rng.choice(n, size=k, replace=False))
    return PointCloud(np.concatenate([x[from_a], y[from_b]], axis=0))


def mix(a, b, lam, strategy: str = "OA", rng=None, solver: Solver = emd) -> PointCloud:
    strategy = strategy.upper()
    if strategy == "OA":
        return mix_oa(a, b, lam, solver)[0]
    if strategy == "RA":
        return mix_ra(a, b, lam, rng)
    if strategy == "PS":
        return mix_ps(a, b, lam, rng)
    raise InvalidArgumentError(f"unknown strategy {strategy!r}; expected OA, RA or PS")


def mix_labels(c1, c2, lam) -> LabelDistribution:
    lam = check_ratio(lam)
    p1 = c1.probs if isinstance(c1, LabelDistribution) else np.asarray(c1, dtype=float)
    p2 = c2.probs if isinstance(c2, LabelDistribution) else np.asarray(c2, dtype=float)
    if p1.shape != p2.shape:
        raise InvalidArgumentError(f"label sizes differ: {p1.size} vs {p2.size}")
    return LabelDistribution(_lerp(p1, p2, lam))


@dataclass(frozen=True)
class BetaParams:
    gamma: float

    def __post_init__(self):
        if not self.gamma > 0:
            raise InvalidArgumentError(f"Beta shape gamma must be positive, got {self.gamma}")


def sample_lambda(params, rng=None) -> float:
    """Draw a mix ratio from the symmetric Beta(gamma, gamma)."""
    if not isinstance(params, BetaParams):
        params = BetaParams(float(params))
    return float(as_rng(rng).beta(params.gamma, params.gamma))


# --------------------------------------------------------------------------
# latent (manifold) mixing


@dataclass(frozen=True, eq=False)
class LatentCloud:
    """Per-point coordinates and feature vectors at one network layer."""

    coords: np.ndarray
    feats: np.ndarray
    layer_id: int = 0

    def __post_init__(self):
        c = np.asarray(self.coords, dtype=np.float64)
        f = np.asarray(self.feats, dtype=np.float64)
        if f.ndim == 1:
            f = f[:, None]
        if c.ndim != 2 or c.shape[1] != 3 or c.shape[0] < 1:
            raise InvalidArgumentError(f"coords must be (N, 3) with N >= 1, got {c.shape}")
        if f.ndim != 2 or f.shape[0] != c.shape[0]:
            raise InvalidArgumentError("feats must have one row per coordinate")
        object.__setattr__(self, "coords", c)
        object.__setattr__(self, "feats", f)

    @property
    def n(self) -> int:
        return self.coords.shape[0]

    @property
    def width(self) -> int:
        return self.feats.shape[1]


def mix_manifold(a: LatentCloud, b: LatentCloud, lam, solver: Solver = emd) -> LatentCloud:
    """Mix latent clouds along the EMD assignment of their *coordinates*."""
    lam = check_ratio(lam)
    if a.n != b.n:
        raise InvalidArgumentError(f"latent cardinalities differ: {a.n} vs {b.n}")
    if a.width != b.width:
        raise InvalidArgumentError(f"feature widths differ: {a.width} vs {b.width}")
    if a.layer_id != b.layer_id:
        raise InvalidArgumentError(f"layers differ: {a.layer_id} vs {b.layer_id}")
    perm = solver(a.coords, b.coords).perm
    return LatentCloud(
        _lerp(a.coords, b.coords[perm], lam),
        _lerp(a.feats, b.feats[perm], lam),
        a.layer_id,
    )


# --------------------------------------------------------------------------
# batches


@dataclass(frozen=True, eq=False)
class Sample:
    cloud: PointCloud
    label: LabelDistribution
    id: int | None = None


def mix_pair(s1: Sample, s2: Sample, lam, strategy="OA", rng=None, solver: Solver = emd,
             align=None) -> MixedSample:
    """Mix one labelled pair with a fixed ratio.

    Clouds of different size are first replicated up to the larger size.
    ``align`` (an :class:`~pointmixup.alignment.AlignmentConfig`) canonicalises
    both headings before mixing.
    """
    rng = as_rng(rng)
    a, b = s1.cloud, s2.cloud
    n = max(a.n, b.n)
    a = replicate_to_cardinality(a, n, rng)
    b = replicate_to_cardinality(b, n, rng)
    if align is not None:
        from .alignment import align_pair

        a, b = align_pair(a, b, align)
    strategy = strategy.upper()
    cloud = mix(a, b, lam, strategy, rng=rng, solver=solver)
    return MixedSample(cloud, mix_labels(s1.label, s2.label, lam), float(lam), strategy,
                       (s1.id, s2.id))


def mix_batch(pairs: Sequence[tuple[Sample, Sample]], strategy="OA", params=BetaParams(1.0),
              rng=None, solver: Solver = emd, align=None) -> list[MixedSample]:
    """Mix every pair with its own ratio drawn from Beta(gamma, gamma).

    Pair ``k`` uses a random stream derived from one batch seed and ``k``, so
    results do not depend on processing order.
    """
    if not pairs:
        return []
    if not isinstance(params, BetaParams):
        params = BetaParams(float(params))
    batch_seed = int(as_rng(rng).integers(0, 2**63))
    out = []
    for k, (s1, s2) in enumerate(pairs):
        sub = np.random.default_rng([batch_seed, k])
        lam = sample_lambda(params, sub)
        out.append(mix_pair(s1, s2, lam, strategy, sub, solver, align))
    return out
