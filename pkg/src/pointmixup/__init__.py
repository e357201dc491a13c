"""Optimal-assignment mixup for point clouds.

Core pieces: :mod:`~pointmixup.emd` (exact, brute-force and auction solvers),
:mod:`~pointmixup.interpolation` (OA / RA / PS mixing, manifold mixing),
:mod:`~pointmixup.verify` (numerical certificates for the interpolation
properties) and :mod:`~pointmixup.toy` (a small numpy PointNet for
training experiments).
"""

from .cloud import (
    LabelDistribution,
    PointCloud,
    format_xyz,
    normalize_unit_sphere,
    parse_xyz,
    read_xyz,
    replicate_to_cardinality,
    write_xyz,
)
from .emd import Assignment, EmdResult, emd_approx, emd_bruteforce, emd_distance, emd_exact
from .errors import (
    CapacityError,
    InvalidArgumentError,
    InvalidInputError,
    ParseError,
    PointMixupError,
    SolverError,
    TrainingError,
)
from .interpolation import (
    BetaParams,
    LatentCloud,
    mix,
    mix_labels,
    mix_manifold,
    mix_oa,
    mix_ps,
    mix_ra,
    sample_lambda,
)

__version__ = "0.1.0"
