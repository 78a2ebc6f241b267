import numpy as np
import pytest

from bornlab.rigidity import SCAN_LAMBDAS, certify_identity, derived_bound, scan_gaps
from bornlab.rules import PhiRule
from bornlab.signaling import jensen_gap


def brute_force_max_gap(rule, grid_step):
    """Independent slow oracle: plain loops over every grid triple."""
    n = int(round(1.0 / grid_step))
    grid = [i * grid_step for i in range(n + 1)]
    best, witness = -1.0, None
    for i, p1 in enumerate(grid):
        for p2 in grid[i + 1 :]:
            for lam in SCAN_LAMBDAS:
                gap = abs(jensen_gap(rule, p1, p2, lam))
                if gap > best:
                    best, witness = gap, (p1, p2, lam)
    return best, witness


class TestScanGaps:
    def test_identity_is_flat(self):
        report = scan_gaps(PhiRule.identity(), 0.01)
        assert report.max_gap <= 1e-12
        assert report.max_identity_deviation <= 1e-12
        assert report.affine_residual <= 1e-12
        assert report.convexity_intervals == ()

    def test_power_two_profile(self):
        report = scan_gaps(PhiRule.power(2.0), 0.01)
        assert report.max_gap == pytest.approx(0.25, abs=1e-10)
        assert report.max_gap_witness == (0.0, 1.0, 0.5)
        assert report.convexity_intervals == ((0.0, 1.0, "+"),)

    def test_piecewise_bulge_profile(self):
        rule = PhiRule.piecewise_affine([(0.0, 0.0), (0.5, 0.7), (1.0, 1.0)])
        report = scan_gaps(rule, 0.01)
        assert report.max_gap == pytest.approx(0.2, abs=1e-10)
        assert report.max_gap_witness == (0.0, 1.0, 0.5)
        # affine except for the concave kink at the middle knot
        assert len(report.convexity_intervals) == 1
        lo, hi, sign = report.convexity_intervals[0]
        assert sign == "-"
        assert lo <= 0.5 <= hi
        assert report.max_identity_deviation == pytest.approx(0.2, abs=1e-12)

    @pytest.mark.parametrize(
        "rule",
        [PhiRule.power(2.0), PhiRule.power(0.5), PhiRule.piecewise_affine([(0.0, 0.0), (0.5, 0.7), (1.0, 1.0)])],
    )
    def test_matches_brute_force_oracle(self, rule):
        report = scan_gaps(rule, 0.05)
        oracle_gap, oracle_witness = brute_force_max_gap(rule, 0.05)
        assert report.max_gap == pytest.approx(oracle_gap, abs=1e-12)
        assert report.max_gap_witness == pytest.approx(oracle_witness, abs=1e-12)

    def test_grid_step_validation(self):
        with pytest.raises(ValueError):
            scan_gaps(PhiRule.identity(), 0.5)

    def test_affine_residual_equals_identity_deviation_for_pinned_endpoints(self):
        for rule in (PhiRule.power(1.3), PhiRule.piecewise_affine([(0.0, 0.0), (0.3, 0.5), (1.0, 1.0)])):
            report = scan_gaps(rule, 0.02)
            assert report.affine_residual == pytest.approx(report.max_identity_deviation, abs=1e-12)


class TestMidpointGapBound:
    @pytest.mark.parametrize("rule", [PhiRule.power(2.0), PhiRule.power(0.5), PhiRule.power(1.2)])
    def test_second_differences_are_bounded_by_max_gap(self, rule):
        grid_step = 0.01
        report = scan_gaps(rule, grid_step)
        grid = np.linspace(0.0, 1.0, 101)
        values = np.asarray(rule.eval(grid), dtype=float)
        midpoint_residual = np.abs(0.5 * values[:-2] + 0.5 * values[2:] - values[1:-1])
        assert np.max(midpoint_residual) <= report.max_gap + 1e-15


class TestCertification:
    @pytest.mark.parametrize("grid_step", [0.01, 0.02, 0.05])
    def test_identity_certifies_at_tight_tolerance(self, grid_step):
        result = certify_identity(PhiRule.identity(), gap_tolerance=1e-10, grid_step=grid_step)
        assert result.certified
        assert result.witness is None
        assert result.max_identity_deviation <= result.deviation_bound

    def test_piecewise_identity_certifies(self):
        rule = PhiRule.piecewise_affine([(0.0, 0.0), (0.25, 0.25), (0.75, 0.75), (1.0, 1.0)])
        assert certify_identity(rule).certified

    def test_small_power_distortion_is_rejected_with_witness(self):
        result = certify_identity(PhiRule.power(1.05))
        assert not result.certified
        assert result.witness == (0.0, 1.0, 0.5)
        # gap value verified against the off-grid formula
        assert result.max_gap == pytest.approx(0.5 - 0.5**1.05, abs=1e-12)

    @pytest.mark.parametrize("alpha", [0.5, 0.8, 0.95, 1.05, 1.2, 2.0, 3.0])
    def test_power_family_rejections(self, alpha):
        result = certify_identity(PhiRule.power(alpha))
        assert not result.certified
        assert isinstance(result.witness, tuple)
        p1, p2, lam = result.witness
        assert 0.0 <= p1 < p2 <= 1.0 and lam in SCAN_LAMBDAS
        # the witness is an executable signaling scenario: its gap exceeds
        # the tolerance by construction
        assert abs(jensen_gap(PhiRule.power(alpha), p1, p2, lam)) > result.gap_tolerance

    def test_derived_bound_value_and_validation(self):
        assert derived_bound(1e-10, 0.01) == pytest.approx(2.5e-7)
        assert derived_bound(1e-10, 0.02) == pytest.approx(1e-10 * 50 * 50 / 4)
        with pytest.raises(ValueError):
            derived_bound(-1.0, 0.01)

    def test_report_serialization_is_json_friendly(self):
        result = certify_identity(PhiRule.power(2.0))
        doc = result.to_dict()
        assert doc["certified"] is False
        assert doc["witness"] == [0.0, 1.0, 0.5]
        assert doc["report"]["rule_id"] == "power(2)"
