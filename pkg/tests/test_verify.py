import json

import numpy as np
import pytest

from pointmixup.errors import CapacityError, InvalidArgumentError
from pointmixup.verify import (
    PS_SLACK_TOL,
    CertificateReport,
    VerifyConfig,
    certify_assignment_invariance,
    certify_linearity,
    certify_shortest_path,
    make_instances,
    run_all,
)

REPORT_KEYS = {"name", "n", "instances", "max_residual", "tolerance", "pass", "seed"}


class TestCertificates:
    def test_shortest_path_passes(self):
        r = certify_shortest_path(20, n=32, seed=1)
        assert r.passed and r.ok and r.max_residual <= 1e-9 and r.solver == "exact"

    def test_shapes_population(self):
        r = certify_shortest_path(5, n=48, seed=2, population="shapes")
        assert r.passed and r.population == "shapes"

    def test_degenerate_skipped(self, rng):
        x = rng.normal(size=(10, 3))
        r = certify_shortest_path([(x, x), (x, x[::-1] + 1.0)], seed=0)
        assert r.skipped == 1 and r.instances == 2 and r.passed

    def test_ra_negative_control(self):
        r = certify_shortest_path(10, n=64, seed=3, interpolant="RA")
        assert not r.passed and r.ok and not r.expect_pass
        assert r.frac_positive == 1.0

    def test_assignment_invariance(self):
        assert certify_assignment_invariance(20, n=32, seed=4).passed

    def test_equal_ratios_trivial(self):
        r = certify_assignment_invariance(5, n=16, lambda_pairs=((0.4, 0.4),), seed=5)
        assert r.max_residual == 0.0

    def test_assignment_invariance_ra_fails(self):
        r = certify_assignment_invariance(10, n=32, seed=6, interpolant="RA")
        assert not r.passed and r.ok

    def test_linearity(self):
        assert certify_linearity(20, n=32, seed=7).passed

    def test_linearity_endpoints(self):
        r = certify_linearity(5, n=16, lambda_pairs=((0.0, 1.0),), seed=8)
        assert r.max_residual <= 1e-12

    def test_linearity_ra_fails(self):
        assert not certify_linearity(10, n=32, seed=9, interpolant="RA").passed

    def test_capacity(self):
        with pytest.raises(CapacityError):
            certify_shortest_path(1, n=600, seed=0)

    def test_approx_allowed(self):
        r = certify_shortest_path(1, n=600, seed=0, tol=5e-2, approx_ok=True, lambda_grid=(0.5,))
        assert r.solver == "auction" and r.passed

    def test_ps_linearity_approximate(self):
        r = certify_linearity(3, n=1024, seed=10, interpolant="PS", population="shapes",
                              lambda_pairs=((0.25, 0.75),), approx_ok=True, tol=PS_SLACK_TOL)
        assert r.passed

    def test_instance_validation(self):
        with pytest.raises(InvalidArgumentError):
            make_instances(0, 8)
        with pytest.raises(InvalidArgumentError):
            make_instances(1, 8, population="cats")
        with pytest.raises(InvalidArgumentError):
            certify_linearity([], n=8)

    def test_instances_normalised(self):
        for x, y in make_instances(3, 40, "shapes", seed=1):
            for c in (x, y):
                assert abs(np.linalg.norm(c, axis=1).max() - 1) < 1e-9


class TestReport:
    def test_json_keys(self):
        rep = CertificateReport(0, [certify_linearity(2, n=8, seed=0)])
        doc = json.loads(rep.to_json())
        assert REPORT_KEYS <= set(doc["checks"][0])
        assert doc["ok"] is True

    def test_empty_report_not_ok(self):
        assert not CertificateReport(0).ok

    def test_pass_flag_matches_tolerance(self):
        r = certify_shortest_path(3, n=16, seed=0, interpolant="RA")
        assert r.passed == (r.max_residual <= r.tolerance)

    def test_config_validation(self):
        with pytest.raises(InvalidArgumentError):
            VerifyConfig(suite="p9")
        with pytest.raises(InvalidArgumentError):
            VerifyConfig(instances=0)

    def test_rerun_identical(self, tmp_path):
        cfg = VerifyConfig(seed=3, instances=3, control_instances=2, control_n=128)
        run_all(cfg, tmp_path / "a.json")
        run_all(cfg, tmp_path / "b.json")
        assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()
        assert (tmp_path / "a.json.txt").read_bytes() == (tmp_path / "b.json.txt").read_bytes()

    def test_suite_selection(self):
        rep = run_all(VerifyConfig(suite="p2", instances=2))
        assert {r.name.split("[")[0] for r in rep.records} == {"assignment_invariance"}
        assert rep.ok

    def test_default_config_passes(self):
        rep = run_all(VerifyConfig())
        assert rep.ok, rep.table()
        names = [r.name for r in rep.records]
        assert "ps_shortest_path[shapes]" in names and "ra_shortest_path[shapes]" in names
