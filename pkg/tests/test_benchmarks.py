"""Benchmark problems: closed-form risks against independent constants."""

import math

import numpy as np
import pytest

from riskfield.benchmarks import (
    BellProblem,
    QuadricProblem,
    SineProblem,
    brute_force_risk,
    evaluate,
    reference_problems,
    relative_error_stats,
    theoretical_risk,
)
from riskfield.errors import InvalidParametersError, OutOfBoxError

# Reference values computed once from the defining volume integrals with
# 50-digit arithmetic and frozen here.
QUADRIC_RISK = 0.10081751444411764
SINE_RISK = 0.20483276469913342
BELL_RISK = 0.004347682476356125


class TestExactRisks:
    def test_reference_configurations(self):
        quadric, sine, bell = reference_problems()
        np.testing.assert_allclose(theoretical_risk(quadric), QUADRIC_RISK, rtol=1e-12)
        np.testing.assert_allclose(theoretical_risk(sine), SINE_RISK, rtol=1e-12)
        np.testing.assert_allclose(theoretical_risk(bell), BELL_RISK, rtol=1e-12)

    def test_sine_risk_antisymmetry(self):
        for m in (0.0, 0.25, 0.8, 1.0):
            above = SineProblem((1, 2), m).theoretical_risk()
            below = SineProblem((1, 2), -m).theoretical_risk()
            assert abs(above + below - 1.0) <= 1e-15
        assert SineProblem((1,), 0.0).theoretical_risk() == 0.5
        assert SineProblem((1,), 1.0).theoretical_risk() == 0.0

    def test_quadric_risk_is_ellipsoid_volume_fraction(self):
        # D = 2, a = (9, 16), m = 2: ellipse semi-axes 2/3 and 1/2,
        # volume pi/3 over a box of area 4.
        problem = QuadricProblem((9.0, 16.0), 2.0)
        np.testing.assert_allclose(
            problem.theoretical_risk(), math.pi / 12.0, rtol=1e-14
        )

    def test_bell_risk_matches_direct_counting(self):
        """The ball-volume formula and brute-force counting must agree on an
        independent two-bump configuration."""
        problem = BellProblem(
            centers=((0.3, 0.3), (0.75, 0.75)), widths=(0.05, 0.04), threshold=0.1
        )
        exact = problem.theoretical_risk()
        estimate = brute_force_risk(problem, count=2**17)
        assert abs(estimate - exact) <= 5e-3


class TestEvaluation:
    def test_quadric_values(self):
        problem = QuadricProblem((4.0, 9.0), 1.5)
        assert evaluate(problem, np.array([0.0, 0.0])) == 0.0
        np.testing.assert_allclose(
            evaluate(problem, np.array([1.0, 1.0])), math.sqrt(13.0), rtol=1e-15
        )
        batch = problem.evaluate_many(np.array([[0.5, 0.0], [0.0, -1.0]]))
        np.testing.assert_allclose(batch, [1.0, 3.0], rtol=1e-15)

    def test_sine_values(self):
        problem = SineProblem((1, -1, 2), 0.8)
        assert evaluate(problem, np.zeros(3)) == 0.0
        np.testing.assert_allclose(
            evaluate(problem, np.array([0.125, 0.0, 0.0])),
            math.sin(math.pi / 4.0),
            rtol=1e-15,
        )

    def test_bell_peak_at_center(self):
        problem = BellProblem(
            centers=((0.3, 0.3), (0.75, 0.75)), widths=(0.05, 0.04), threshold=0.1
        )
        for center, sigma in zip(problem.centers, problem.widths):
            peak = (2.0 * math.pi) ** (-1.0) * sigma ** (-2.0)
            value = evaluate(problem, center)
            assert value >= peak  # the max includes the bump's own summit
            assert value > problem.threshold

    def test_out_of_box_rejection(self):
        problem = SineProblem((1, 2), 0.5)
        with pytest.raises(OutOfBoxError):
            evaluate(problem, np.array([0.5, 1.2]))
        with pytest.raises(OutOfBoxError):
            problem.evaluate_many(np.array([[0.5, 0.5, 0.5]]))


class TestConstructionGuards:
    def test_quadric_needs_room_for_the_ellipsoid(self):
        with pytest.raises(InvalidParametersError):
            QuadricProblem((3.0, 4.0), 2.0)  # 3 <= 2^2
        with pytest.raises(InvalidParametersError):
            QuadricProblem((4.0,), -1.0)

    def test_sine_integer_coefficients(self):
        with pytest.raises(InvalidParametersError):
            SineProblem((1.5,), 0.5)
        with pytest.raises(InvalidParametersError):
            SineProblem((1, 0), 0.5)
        with pytest.raises(InvalidParametersError):
            SineProblem((1,), 1.5)

    def test_bell_width_cap(self):
        # Excursion sets are empty once sigma reaches (2 pi)^{-1/2} m^{-1/d}.
        cap = (2.0 * math.pi) ** (-0.5) * 0.1 ** (-0.5)
        with pytest.raises(InvalidParametersError):
            BellProblem(((0.5, 0.5),), (cap,), 0.1)

    def test_bell_ball_must_fit_in_box(self):
        with pytest.raises(InvalidParametersError):
            BellProblem(((0.05, 0.5),), (0.05,), 0.1)

    def test_bell_balls_must_be_disjoint(self):
        with pytest.raises(InvalidParametersError):
            BellProblem(((0.35, 0.5), (0.65, 0.5)), (0.1, 0.1), 0.1)

    def test_bell_width_count_mismatch(self):
        with pytest.raises(InvalidParametersError):
            BellProblem(((0.3, 0.3), (0.7, 0.7)), (0.05,), 0.1)


class TestRiskTask:
    def test_orientation_reproduces_defect_rule(self):
        """For every problem the upper-tail task must satisfy
        {g > threshold} == {defective} pointwise."""
        rng = np.random.default_rng(5)
        for problem in reference_problems():
            response, fail = problem.risk_task()
            box = problem.box
            points = rng.uniform(
                box[:, 0], box[:, 1], size=(400, problem.dimension)
            )
            np.testing.assert_array_equal(
                response(points) > fail.threshold, problem.defective(points)
            )

    def test_quadric_task_negates(self):
        problem = reference_problems()[0]
        response, fail = problem.risk_task()
        assert fail.threshold == -problem.threshold
        x = np.full((1, 5), 0.5)
        np.testing.assert_allclose(
            response(x), -problem.evaluate_many(x), rtol=1e-15
        )


class TestBruteForce:
    def test_deterministic(self):
        problem = reference_problems()[1]
        assert brute_force_risk(problem, 4096) == brute_force_risk(problem, 4096)

    def test_converges_on_sine(self):
        problem = reference_problems()[1]
        estimate = brute_force_risk(problem, 2**16)
        assert abs(estimate - SINE_RISK) <= 5e-3


class PerfectPosterior:
    """Stub surrogate that reproduces the task response exactly."""

    def __init__(self, problem):
        self.response, _ = problem.risk_task()

    def predict_many(self, points):
        values = self.response(points)
        return values, np.zeros_like(values)


class TestRelativeErrorStats:
    def test_perfect_surrogate_has_zero_error(self):
        problem = reference_problems()[1]
        stats = relative_error_stats(
            PerfectPosterior(problem), problem, probes=500, seed=3
        )
        assert stats.mean == 0.0
        assert np.all(stats.ccdf == 0.0)
        assert stats.probes == 500

    def test_ccdf_is_monotone_nonincreasing(self):
        problem = reference_problems()[0]

        class Biased(PerfectPosterior):
            def predict_many(self, points):
                values, scales = super().predict_many(points)
                return values * 1.05 + 0.01, scales

        stats = relative_error_stats(Biased(problem), problem, probes=800, seed=1)
        assert stats.mean > 0.0
        assert np.all(np.diff(stats.ccdf) <= 0.0)
        assert np.all(np.diff(stats.thresholds) > 0.0)


class TestReferenceList:
    def test_names_and_dimensions(self):
        problems = reference_problems()
        assert [p.name for p in problems] == ["quadric", "sine", "bell"]
        assert [p.dimension for p in problems] == [5, 3, 5]
        for p in problems:
            assert p.box.shape == (p.dimension, 2)
