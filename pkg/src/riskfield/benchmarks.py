"""Closed-form benchmark problems with exact theoretical risks.

Three families over a factor box with uniform factor distribution:

* quadric: y(x) = sqrt(sum a_i x_i^2) on [-1, 1]^D. A part is defective
  when the response falls below the threshold m; the defective set is the
  inscribed ellipsoid with semi-axes m / sqrt(a_i), whose volume fraction
  is the exact risk.
* sine: y(x) = sin(2 pi sum a_i x_i) on [0, 1]^D with integer a_i;
  defective when y > m, risk 1/2 - arcsin(m)/pi.
* bell: y(x) = max of R Gaussian bumps on [0, 1]^D; defective when y > m.
  Under the three validity conditions checked at construction the failure
  set is a disjoint union of balls of radii r_i, so the risk is the sum of
  their volumes.

Each problem also exposes the upper-tail risk task used by the surrogate
pipeline: a response function g and a threshold such that defects are
exactly {g > threshold} (the quadric negates its response for this).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidParametersError, OutOfBoxError
from .risk import FailureSpec
from .sobol import scale_to_box, sobol_points

VANISHING_RESPONSE = 1e-12


class BenchmarkProblem:
    """Shared surface: evaluation, defect rule, exact risk, risk task."""

    name: str
    dimension: int
    box: np.ndarray
    threshold: float
    defect_side: str  # "above" or "below"

    def _raw(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def evaluate_many(self, x: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(x, dtype=float))
        if pts.shape[1] != self.dimension:
            raise OutOfBoxError(
                f"points have dimension {pts.shape[1]}, problem is "
                f"{self.dimension}-dimensional"
            )
        if np.any(pts < self.box[:, 0]) or np.any(pts > self.box[:, 1]):
            raise OutOfBoxError("evaluation point outside the factor box")
        return self._raw(pts)

    def evaluate(self, x: np.ndarray) -> float:
        values = self.evaluate_many(np.atleast_1d(np.asarray(x, float))[None, :])
        return float(values[0])

    def defective(self, x: np.ndarray) -> np.ndarray:
        """Boolean defect indicator at each row of x."""
        y = self.evaluate_many(x)
        if self.defect_side == "above":
            return y > self.threshold
        return y < self.threshold

    def theoretical_risk(self) -> float:
        raise NotImplementedError

    def risk_task(self) -> tuple["TaskResponse", FailureSpec]:
        """Upper-orientation reformulation: defect iff g(x) > threshold."""
        if self.defect_side == "above":
            return TaskResponse(self, 1.0), FailureSpec(self.threshold)
        return TaskResponse(self, -1.0), FailureSpec(-self.threshold)


@dataclass(frozen=True, eq=False)
class TaskResponse:
    """Signed view of a benchmark response; callable on point batches."""

    problem: BenchmarkProblem
    sign: float

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return self.sign * self.problem.evaluate_many(x)


class QuadricProblem(BenchmarkProblem):
    """Ellipsoidal norm response on [-1, 1]^D; defective below threshold."""

    name = "quadric"
    defect_side = "below"

    def __init__(self, coefficients, threshold: float):
        a = np.atleast_1d(np.asarray(coefficients, dtype=float))
        if a.ndim != 1 or a.size == 0:
            raise InvalidParametersError("quadric needs a coefficient vector")
        if not threshold > 0.0:
            raise InvalidParametersError("quadric threshold must be positive")
        if np.any(a <= threshold**2):
            raise InvalidParametersError(
                "quadric requires every coefficient above threshold^2 "
                f"(= {threshold**2:g}) so the defective ellipsoid stays in the box"
            )
        self.coefficients = a
        self.threshold = float(threshold)
        self.dimension = a.size
        self.box = np.column_stack([-np.ones(a.size), np.ones(a.size)])

    def _raw(self, x: np.ndarray) -> np.ndarray:
        return np.sqrt((self.coefficients * x**2).sum(axis=1))

    def theoretical_risk(self) -> float:
        d = self.dimension
        ball = math.pi ** (d / 2.0) / math.gamma(d / 2.0 + 1.0)
        return (
            ball
            * self.threshold**d
            / (2.0**d * math.sqrt(float(np.prod(self.coefficients))))
        )


class SineProblem(BenchmarkProblem):
    """Sinusoidal response on [0, 1]^D; defective above threshold."""

    name = "sine"
    defect_side = "above"

    def __init__(self, coefficients, threshold: float):
        a = np.atleast_1d(np.asarray(coefficients))
        if a.ndim != 1 or a.size == 0:
            raise InvalidParametersError("sine needs a coefficient vector")
        if np.any(a != np.round(a)) or np.any(a == 0):
            raise InvalidParametersError("sine coefficients must be non-zero integers")
        if not -1.0 <= threshold <= 1.0:
            raise InvalidParametersError("sine threshold must lie in [-1, 1]")
        self.coefficients = a.astype(float)
        self.threshold = float(threshold)
        self.dimension = a.size
        self.box = np.column_stack([np.zeros(a.size), np.ones(a.size)])

    def _raw(self, x: np.ndarray) -> np.ndarray:
        return np.sin(2.0 * math.pi * (self.coefficients * x).sum(axis=1))

    def theoretical_risk(self) -> float:
        return 0.5 - math.asin(self.threshold) / math.pi


class BellProblem(BenchmarkProblem):
    """Max of R Gaussian bumps on [0, 1]^D; defective above threshold.

    Construction enforces the three conditions that make the risk exact:
    each bump exceeds the threshold on a non-empty ball (radius r_i), every
    ball lies inside the box, and the balls are pairwise disjoint.
    """

    name = "bell"
    defect_side = "above"

    def __init__(self, centers, widths, threshold: float):
        mu = np.atleast_2d(np.asarray(centers, dtype=float))
        sigma = np.atleast_1d(np.asarray(widths, dtype=float))
        if mu.shape[0] != sigma.size or mu.shape[0] == 0:
            raise InvalidParametersError("one width is required per center")
        if not threshold > 0.0:
            raise InvalidParametersError("bell threshold must be positive")
        d = mu.shape[1]
        sigma_cap = (2.0 * math.pi) ** (-0.5) * threshold ** (-1.0 / d)
        if np.any(sigma <= 0.0) or np.any(sigma >= sigma_cap):
            raise InvalidParametersError(
                f"bell widths must lie in (0, {sigma_cap:.6g}) for the "
                "threshold excursion sets to be non-empty"
            )
        radii = np.sqrt(
            -2.0
            * sigma**2
            * np.log(threshold * (2.0 * math.pi) ** (d / 2.0) * sigma**d)
        )
        if np.any(mu - radii[:, None] < 0.0) or np.any(mu + radii[:, None] > 1.0):
            raise InvalidParametersError(
                "bell excursion balls must lie inside the unit box"
            )
        for i in range(mu.shape[0]):
            for j in range(i + 1, mu.shape[0]):
                gap = float(np.linalg.norm(mu[i] - mu[j]))
                if gap <= radii[i] + radii[j]:
                    raise InvalidParametersError(
                        f"bell excursion balls {i} and {j} overlap "
                        f"(center distance {gap:.6g} <= r_i + r_j = "
                        f"{radii[i] + radii[j]:.6g})"
                    )
        self.centers = mu
        self.widths = sigma
        self.radii = radii
        self.threshold = float(threshold)
        self.dimension = d
        self.box = np.column_stack([np.zeros(d), np.ones(d)])

    def _raw(self, x: np.ndarray) -> np.ndarray:
        d = self.dimension
        best = np.full(x.shape[0], -np.inf)
        for center, sigma in zip(self.centers, self.widths):
            sq = ((x - center) ** 2).sum(axis=1)
            peak = (2.0 * math.pi) ** (-d / 2.0) * sigma ** (-float(d))
            np.maximum(best, peak * np.exp(-sq / (2.0 * sigma**2)), out=best)
        return best

    def theoretical_risk(self) -> float:
        d = self.dimension
        ball = math.pi ** (d / 2.0) / math.gamma(d / 2.0 + 1.0)
        return ball * math.fsum(float(r) ** d for r in self.radii)


def evaluate(problem: BenchmarkProblem, x: np.ndarray) -> float:
    """Closed-form response at one point inside the factor box."""
    return problem.evaluate(x)


def theoretical_risk(problem: BenchmarkProblem) -> float:
    """Exact probability of the defect event under the uniform factor law."""
    return problem.theoretical_risk()


def brute_force_risk(problem: BenchmarkProblem, count: int = 200_000) -> float:
    """Sobol estimate of the defect probability from true-function calls."""
    points = scale_to_box(sobol_points(problem.dimension, count), problem.box)
    return float(np.count_nonzero(problem.defective(points))) / count


# Reference bell configuration: 10 bumps in dimension 5, centers and
# widths stated to 4 significant digits. These literals define the
# problem; its exact risk follows from them.
_BELL_CENTERS = (
    (0.4889, 0.6241, 0.6791, 0.3955, 0.3674),
    (0.5870, 0.4139, 0.3091, 0.2638, 0.7588),
    (0.7637, 0.5588, 0.1838, 0.4980, 0.5179),
    (0.2318, 0.3963, 0.7051, 0.5586, 0.7566),
    (0.5806, 0.2989, 0.7137, 0.3605, 0.7185),
    (0.3805, 0.3022, 0.2945, 0.2598, 0.4635),
    (0.1684, 0.7401, 0.8728, 0.3555, 0.1788),
    (0.7885, 0.5891, 0.4363, 0.5497, 0.3530),
    (0.8601, 0.3204, 0.6636, 0.9056, 0.6854),
    (0.2995, 0.8727, 0.3751, 0.7984, 0.8168),
)
_BELL_WIDTHS = (
    0.6259, 0.6297, 0.6292, 0.6299, 0.6298,
    0.6258, 0.6304, 0.6318, 0.6318, 0.6300,
)


def reference_problems() -> list[BenchmarkProblem]:
    """The three reference configurations used throughout the test suite."""
    return [
        QuadricProblem(coefficients=(4.0, 4.2, 4.4, 4.6, 4.8), threshold=1.9),
        SineProblem(coefficients=(1, -1, 2), threshold=0.8),
        BellProblem(centers=_BELL_CENTERS, widths=_BELL_WIDTHS, threshold=0.1),
    ]


@dataclass(frozen=True)
class RelativeErrorStats:
    """Mean relative prediction error and its complementary CDF."""

    mean: float
    thresholds: np.ndarray
    ccdf: np.ndarray
    probes: int


def relative_error_stats(
    posterior,
    problem: BenchmarkProblem,
    probes: int = 10_000,
    seed: int = 0,
    thresholds: np.ndarray | None = None,
) -> RelativeErrorStats:
    """Relative error |(location - g) / g| over uniform probe points.

    ``g`` is the risk-task response the posterior was trained on; the ratio
    is unchanged by the task's sign convention. Probe points where the
    response vanishes (|g| < 1e-12) are resampled, since the metric is
    undefined there.
    """
    if thresholds is None:
        thresholds = np.logspace(-4.0, 0.0, 41)
    response, _ = problem.risk_task()
    rng = np.random.default_rng(seed)
    box = problem.box
    points = rng.uniform(box[:, 0], box[:, 1], size=(probes, problem.dimension))
    values = response(points)
    for _ in range(64):
        bad = np.abs(values) < VANISHING_RESPONSE
        if not bad.any():
            break
        points[bad] = rng.uniform(
            box[:, 0], box[:, 1], size=(int(bad.sum()), problem.dimension)
        )
        values[bad] = response(points[bad])
    locations, _ = posterior.predict_many(points)
    errors = np.abs((locations - values) / values)
    ccdf = np.array([float(np.mean(errors > t)) for t in thresholds])
    return RelativeErrorStats(
        mean=float(np.mean(errors)), thresholds=np.asarray(thresholds, float),
        ccdf=ccdf, probes=probes,
    )
