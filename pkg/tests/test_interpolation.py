import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from scipy import stats

from pointmixup.cloud import LabelDistribution, PointCloud
from pointmixup.emd import emd_approx, emd_bruteforce, emd_distance, emd_exact
from pointmixup.errors import InvalidArgumentError
from pointmixup.interpolation import (
    BetaParams,
    LatentCloud,
    Sample,
    mix,
    mix_batch,
    mix_labels,
    mix_manifold,
    mix_oa,
    mix_pair,
    mix_ps,
    mix_ra,
    sample_lambda,
)
from pointmixup.synthetic import sample_shape
from pointmixup.verify import PS_SLACK_TOL, make_instances

coords = st.floats(-5, 5, allow_nan=False, allow_infinity=False)
small_pairs = st.integers(2, 6).flatmap(
    lambda n: st.tuples(arrays(np.float64, (n, 3), elements=coords),
                        arrays(np.float64, (n, 3), elements=coords)))
ratios = st.floats(0, 1)


def rows(points):
    return sorted(map(tuple, np.asarray(points)))


def slack(a, b, s, d=emd_distance):
    d12 = d(a, b)
    return (d(a, s) + d(s, b) - d12) / d12


class TestOA:
    def test_endpoints(self, rng):
        a, b = rng.normal(size=(2, 40, 3))
        out0, _ = mix_oa(a, b, 0.0)
        np.testing.assert_array_equal(out0.points, a)
        out1, asg = mix_oa(a, b, 1.0)
        np.testing.assert_array_equal(out1.points, b[asg.perm])
        assert emd_distance(out1, b) <= 1e-9

    def test_formula(self, rng):
        a, b = rng.normal(size=(2, 30, 3))
        out, asg = mix_oa(a, b, 0.3)
        np.testing.assert_allclose(out.points, 0.7 * a + 0.3 * b[asg.perm], atol=1e-15)

    def test_shape_morph_is_shortest_path(self, rng):
        a = sample_shape("cube", 64, rng)
        b = sample_shape("cone", 64, rng)
        for lam in (0.2, 0.4, 0.6, 0.8):
            s, _ = mix_oa(a, b, lam)
            assert abs(slack(a, b, s)) <= 1e-9

    def test_bad_ratio_and_size(self, rng):
        a, b = rng.normal(size=(2, 4, 3))
        with pytest.raises(InvalidArgumentError):
            mix_oa(a, b, 1.5)
        with pytest.raises(InvalidArgumentError, match="replicate"):
            mix_oa(a, b[:3], 0.5)

    @given(small_pairs, ratios)
    def test_shortest_path_against_oracle(self, ab, lam):
        # brute force is an independent solver for both the mix and the distances
        a, b = ab
        d12 = emd_bruteforce(a, b).distance
        if d12 < 1e-6:
            return
        s, _ = mix_oa(a, b, lam, solver=emd_bruteforce)
        d1, d2 = emd_bruteforce(a, s).distance, emd_bruteforce(s, b).distance
        assert abs(d1 + d2 - d12) <= 1e-9 * d12
        assert abs(d1 - lam * d12) <= 1e-9 * d12

    @given(small_pairs, ratios, ratios)
    def test_assignment_invariance_and_linearity(self, ab, l1, l2):
        a, b = ab
        l1, l2 = sorted((l1, l2))
        d12 = emd_exact(a, b).distance
        if d12 < 1e-6:
            return
        s1, _ = mix_oa(a, b, l1)
        s2, _ = mix_oa(a, b, l2)
        identity_cost = np.linalg.norm(s1.points - s2.points, axis=1).mean()
        opt = emd_bruteforce(s1, s2).distance
        assert abs(identity_cost - opt) <= 1e-9 * d12
        assert abs(opt - (l2 - l1) * d12) <= 1e-9 * d12


class TestRA:
    def test_endpoint(self, rng):
        a, b = rng.normal(size=(2, 10, 3))
        np.testing.assert_array_equal(mix_ra(a, b, 0.0, rng).points, a)

    def test_reproducible(self, rng):
        a, b = rng.normal(size=(2, 50, 3))
        x = mix_ra(a, b, 0.5, np.random.default_rng(3)).points
        y = mix_ra(a, b, 0.5, np.random.default_rng(3)).points
        assert x.tobytes() == y.tobytes()

    def test_positive_slack_cross_class(self, rng):
        a = sample_shape("sphere", 1024, rng)
        b = sample_shape("cube", 1024, rng)
        s = mix_ra(a, b, 0.5, rng)
        assert slack(a, b, s) > 0


class TestPS:
    def test_endpoint(self, rng):
        a, b = rng.normal(size=(2, 10, 3))
        assert rows(mix_ps(a, b, 0.0, rng).points) == rows(a)

    def test_counts(self, rng):
        a = rng.normal(size=(1024, 3))
        b = rng.normal(size=(1024, 3)) + 100.0
        out = mix_ps(a, b, 0.5, rng).points
        assert out.shape == (1024, 3)
        assert (out[:, 0] > 50).sum() == 512
        assert np.all(out[:512, 0] < 50)

    @given(st.integers(1, 50), ratios)
    def test_floor_arithmetic(self, n, lam):
        a = np.zeros((n, 3))
        b = np.ones((n, 3))
        out = mix_ps(a, b, lam, np.random.default_rng(0)).points
        assert out.shape == (n, 3)
        assert int(out[:, 0].sum()) == int(np.floor(lam * n))

    def test_approximate_shortest_path(self, rng):
        for a, b in make_instances(3, 1024, "shapes", seed=11):
            s = mix_ps(a, b, 0.5, rng)
            assert 0 < slack(a, b, s, d=lambda x, y: emd_approx(x, y).distance) <= PS_SLACK_TOL


class TestDispatch:
    def test_strategy_names(self, rng):
        a, b = rng.normal(size=(2, 8, 3))
        for s in ("oa", "RA", "Ps"):
            assert mix(a, b, 0.5, s, rng).n == 8
        with pytest.raises(InvalidArgumentError):
            mix(a, b, 0.5, "XX")


class TestLabels:
    def test_endpoint(self):
        c1, c2 = LabelDistribution.one_hot(0, 3), LabelDistribution.one_hot(2, 3)
        assert mix_labels(c1, c2, 0.0).probs.tolist() == c1.probs.tolist()

    def test_three_and_seven(self):
        p = mix_labels(LabelDistribution.one_hot(3, 10), LabelDistribution.one_hot(7, 10), 0.25).probs
        assert p[3] == 0.75 and p[7] == 0.25 and p.sum() == 1.0

    @given(st.integers(2, 8).flatmap(lambda c: arrays(np.float64, c, elements=st.floats(0.01, 1))),
           ratios)
    def test_same_label(self, raw, lam):
        c = LabelDistribution(raw / raw.sum())
        np.testing.assert_allclose(mix_labels(c, c, lam).probs, c.probs, atol=1e-12)

    def test_mismatch(self):
        with pytest.raises(InvalidArgumentError):
            mix_labels(LabelDistribution.one_hot(0, 3), LabelDistribution.one_hot(0, 4), 0.5)


class TestBeta:
    def test_uniform(self, rng):
        draws = np.array([sample_lambda(BetaParams(1.0), rng) for _ in range(100_000)])
        assert abs(draws.mean() - 0.5) <= 0.01
        assert draws.min() >= 0 and draws.max() <= 1

    def test_gamma_04(self, rng):
        draws = np.array([sample_lambda(0.4, rng) for _ in range(100_000)])
        assert abs(draws.mean() - 0.5) <= 0.01
        assert abs(draws.var() - 1 / (4 * (2 * 0.4 + 1))) <= 0.005

    def test_gamma_2_concentrated(self, rng):
        draws = np.array([sample_lambda(2.0, rng) for _ in range(100_000)])
        inside = np.mean((draws > 0.2) & (draws < 0.8))
        oracle = stats.beta(2, 2).cdf(0.8) - stats.beta(2, 2).cdf(0.2)
        assert inside > 0.75 and abs(inside - oracle) < 0.01

    @pytest.mark.parametrize("g", [0.0, -1.0])
    def test_invalid(self, g):
        with pytest.raises(InvalidArgumentError):
            BetaParams(g)


class TestManifold:
    def test_endpoint(self, rng):
        a = LatentCloud(rng.normal(size=(20, 3)), rng.normal(size=(20, 5)), 1)
        b = LatentCloud(rng.normal(size=(20, 3)), rng.normal(size=(20, 5)), 1)
        out = mix_manifold(a, b, 0.0)
        np.testing.assert_array_equal(out.coords, a.coords)
        np.testing.assert_array_equal(out.feats, a.feats)

    def test_features_follow_coordinate_matching(self, rng):
        f = lambda c: (c ** 2).sum(axis=1) + 3 * c[:, 0]
        ca, cb = rng.normal(size=(2, 25, 3))
        a, b = LatentCloud(ca, f(ca)), LatentCloud(cb, f(cb))
        out = mix_manifold(a, b, 0.4)
        perm = emd_exact(ca, cb).perm
        np.testing.assert_allclose(out.feats[:, 0], 0.6 * f(ca) + 0.4 * f(cb[perm]), atol=1e-12)

    def test_identical_coords_zero_cost(self, rng):
        c = rng.normal(size=(15, 3))
        a = LatentCloud(c, rng.normal(size=(15, 4)))
        b = LatentCloud(c, rng.normal(size=(15, 4)))
        out = mix_manifold(a, b, 0.5)
        np.testing.assert_allclose(out.coords, c, atol=1e-15)
        np.testing.assert_allclose(out.feats, 0.5 * (a.feats + b.feats), atol=1e-12)

    def test_mismatches(self, rng):
        a = LatentCloud(np.zeros((4, 3)), np.zeros((4, 2)), 0)
        with pytest.raises(InvalidArgumentError):
            mix_manifold(a, LatentCloud(np.zeros((4, 3)), np.zeros((4, 3)), 0), 0.5)
        with pytest.raises(InvalidArgumentError):
            mix_manifold(a, LatentCloud(np.zeros((5, 3)), np.zeros((5, 2)), 0), 0.5)
        with pytest.raises(InvalidArgumentError):
            mix_manifold(a, LatentCloud(np.zeros((4, 3)), np.zeros((4, 2)), 1), 0.5)


def _sample(rng, n, c, i):
    return Sample(PointCloud(rng.normal(size=(n, 3))), LabelDistribution.one_hot(c, 4), i)


class TestBatch:
    def test_empty(self):
        assert mix_batch([]) == []

    def test_identical_pair(self, rng):
        s = _sample(rng, 32, 1, 0)
        for m in mix_batch([(s, s)] * 4, "OA", 1.0, rng):
            np.testing.assert_allclose(m.cloud.points, s.cloud.points, atol=1e-12)
            np.testing.assert_allclose(m.label.probs, s.label.probs, atol=1e-15)

    def test_label_uses_same_lambda(self, rng):
        a, b = _sample(rng, 16, 0, 0), _sample(rng, 16, 3, 1)
        m = mix_batch([(a, b)], "OA", 0.4, rng)[0]
        assert m.label.probs[3] == pytest.approx(m.lam, abs=1e-15)
        assert m.source_ids == (0, 1) and m.strategy == "OA"

    def test_unequal_sizes_replicated(self, rng):
        m = mix_pair(_sample(rng, 10, 0, 0), _sample(rng, 14, 1, 1), 0.5, "OA", rng)
        assert m.cloud.n == 14

    @pytest.mark.parametrize("strategy", ["OA", "RA", "PS"])
    def test_determinism(self, rng, strategy):
        pairs = [(_sample(rng, 24, k % 4, k), _sample(rng, 24, (k + 1) % 4, k + 1))
                 for k in range(16)]
        x = mix_batch(pairs, strategy, 0.4, np.random.default_rng(5))
        y = mix_batch(pairs, strategy, 0.4, np.random.default_rng(5))
        assert all(p.cloud.points.tobytes() == q.cloud.points.tobytes() and p.lam == q.lam
                   for p, q in zip(x, y))

    def test_order_independent_substreams(self, rng):
        pairs = [(_sample(rng, 12, 0, k), _sample(rng, 12, 1, k)) for k in range(6)]
        full = mix_batch(pairs, "RA", 1.0, np.random.default_rng(9))
        assert len({m.lam for m in full}) == 6
