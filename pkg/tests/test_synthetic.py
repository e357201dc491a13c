import numpy as np
import pytest

from pointmixup.errors import InvalidArgumentError
from pointmixup.synthetic import SHAPES, make_synthetic_dataset, sample_shape


def test_sphere_norms():
    pts = sample_shape("sphere", 500, np.random.default_rng(0)).points
    np.testing.assert_allclose(np.linalg.norm(pts, axis=1), 1.0, atol=1e-9)


@pytest.mark.parametrize("kind", SHAPES)
def test_surfaces(kind):
    p = sample_shape(kind, 4000, np.random.default_rng(1)).points
    x, y, z = p.T
    r = np.hypot(x, y)
    if kind == "cube":
        assert np.allclose(np.abs(p).max(axis=1), 1.0)
    elif kind == "cylinder":
        assert np.all((np.isclose(r, 1.0)) | (np.isclose(np.abs(z), 1.0) & (r <= 1 + 1e-12)))
        # side carries 4/6 of the area
        assert abs(np.isclose(r, 1.0).mean() - 4 / 6) < 0.03
    elif kind == "cone":
        side = np.isclose(r, (1 - z) / 2)
        assert np.all(side | (np.isclose(z, -1.0) & (r <= 1 + 1e-12)))
        assert abs(side.mean() - np.sqrt(5) / (np.sqrt(5) + 1)) < 0.03


def test_unknown_shape():
    with pytest.raises(InvalidArgumentError):
        sample_shape("torus", 10)


def test_dataset_layout():
    ds = make_synthetic_dataset(per_class=3, n_points=64, rng=0, heading_randomization=True,
                                stretch=0.3)
    assert ds.points.shape == (12, 64, 3)
    assert ds.labels.tolist() == [0, 0, 0, 1, 1, 1, 2, 2, 2, 3, 3, 3]
    assert ds.num_classes == 4 and len(ds.samples()) == 12
    np.testing.assert_allclose(np.linalg.norm(ds.points, axis=2).max(axis=1), 1.0, atol=1e-9)


def test_empty_dataset_rejected():
    with pytest.raises(InvalidArgumentError, match="empty"):
        make_synthetic_dataset(per_class=0)


def test_deterministic():
    a = make_synthetic_dataset(per_class=2, n_points=32, rng=5, heading_randomization=True)
    b = make_synthetic_dataset(per_class=2, n_points=32, rng=5, heading_randomization=True)
    assert a.points.tobytes() == b.points.tobytes()
