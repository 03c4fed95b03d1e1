"""Closed-form conditional fields.

Three conditionings of the same correlation structure:

* a Gaussian field with known constant mean and variance (``condition_gaussian``),
* the Gaussian limit obtained when the constant mean is an improper uniform
  random variable (``condition_mixture_mean``), whose predictive variance
  gains a mean-estimation term,
* the Student field obtained when both the mean and the standard deviation
  are improper uniform random variables (``condition_student``), whose every
  marginal is a location-scale Student-t with n - 2 degrees of freedom.

All three share the generalized-least-squares location
``mu_hat + k(x) Sigma^{-1} (y - mu_hat 1)`` with
``mu_hat = y Sigma^{-1} 1 / (1 Sigma^{-1} 1)`` (the first uses the supplied
mean instead of mu_hat).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import betainc, gammaln, ndtr, ndtri, stdtrit

from . import linalg
from .errors import (
    DegenerateDataError,
    DimensionMismatchError,
    NumericalBreakdownError,
    TooFewPointsError,
)
from .kernels import KernelSpec, TrainingSet, correlation_matrix, cross_correlation

# Variance brackets are clamped to zero down to this value; anything more
# negative signals real numerical damage rather than cancellation noise.
# The bracket is O(1), and near-singular fits (length scales at the search
# boundary on smooth data) routinely cancel down to 1e-8 of noise.
BRACKET_TOL = -1e-6


@dataclass(frozen=True)
class PointPrediction:
    """Marginal posterior at one point.

    ``dof`` is the Student degrees of freedom, or None for a Gaussian
    marginal. ``scale`` is the Student scale parameter, or the standard
    deviation in the Gaussian case; it is exactly 0 at training points,
    where the marginal degenerates to a Dirac mass at the observed value.
    """

    location: float
    scale: float
    dof: int | None = None


def _clamp_bracket(bracket: np.ndarray) -> np.ndarray:
    """Zero out cancellation noise; reject genuinely negative variances."""
    b = np.atleast_1d(np.asarray(bracket, dtype=float))
    low = float(b.min()) if b.size else 0.0
    if low < BRACKET_TOL:
        raise NumericalBreakdownError(
            f"variance bracket fell to {low:.3e}, below the {BRACKET_TOL:g} clamp"
        )
    return np.maximum(b, 0.0)


class GaussianPosterior:
    """Gaussian conditional field with constant prior mean and variance.

    When ``mean_estimated`` is True the prior mean was the GLS estimate and
    the predictive variance includes the extra non-negative term
    ``(1 - 1 Sigma^{-1} k)^2 / (1 Sigma^{-1} 1)``.
    """

    def __init__(
        self,
        train: TrainingSet,
        spec: KernelSpec,
        mean: float | None,
        variance: float,
        mean_estimated: bool = False,
    ):
        if variance <= 0.0:
            raise DegenerateDataError(f"prior variance must be positive, got {variance}")
        self.train = train
        self.spec = spec
        self.variance = float(variance)
        self.mean_estimated = bool(mean_estimated)
        self._fact = linalg.factor(correlation_matrix(spec, train), spec.jitter)
        ones = np.ones(train.size)
        self._z1 = linalg.solve(self._fact, ones)
        self._ones_qform = float(ones @ self._z1)
        if self.mean_estimated and self._ones_qform <= 0.0:
            raise DegenerateDataError("1' Sigma^{-1} 1 is not positive")
        if mean is None:
            mean = float(train.responses @ self._z1) / self._ones_qform
        self.mean = float(mean)
        self._weights = linalg.solve(self._fact, train.responses - self.mean)

    @property
    def dof(self) -> None:
        return None

    def predict_many(self, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Locations and standard deviations at each row of ``x``."""
        k = cross_correlation(self.spec, self.train, x)
        locations = self.mean + k.T @ self._weights
        w = linalg.half_solve(self._fact, k)
        bracket = 1.0 - np.einsum("ij,ij->j", w, w)
        if self.mean_estimated:
            ones_cross = 1.0 - self._z1 @ k
            bracket = bracket + ones_cross**2 / self._ones_qform
        variances = self.variance * _clamp_bracket(bracket)
        return locations, np.sqrt(variances)

    def predict(self, x: np.ndarray) -> PointPrediction:
        locations, scales = self.predict_many(np.atleast_1d(np.asarray(x, float))[None, :])
        return PointPrediction(float(locations[0]), float(scales[0]), None)


class StudentPosterior:
    """Student conditional field: every marginal is location-scale t(nu).

    Attributes
    ----------
    dof : int
        Degrees of freedom nu = n - 2.
    mean : float
        GLS constant mu_hat = y Sigma^{-1} 1 / (1 Sigma^{-1} 1).
    dispersion : float
        s^2 = (y - mu_hat 1) Sigma^{-1} (y - mu_hat 1)', the residual
        quadratic form; the squared scale at x is s^2 / nu times the
        variance bracket. The GLS orthogonality makes this equal to
        (y - mu_hat 1) Sigma^{-1} y'.
    """

    def __init__(self, train: TrainingSet, spec: KernelSpec):
        if train.size < 3:
            raise TooFewPointsError(
                f"the Student posterior needs n >= 3 observations, got {train.size}"
            )
        y = train.responses
        if float(np.ptp(y)) == 0.0:
            raise DegenerateDataError("constant responses leave the scale unidentified")
        self.train = train
        self.spec = spec
        self.dof = train.size - 2
        self._fact = linalg.factor(correlation_matrix(spec, train), spec.jitter)
        ones = np.ones(train.size)
        self._z1 = linalg.solve(self._fact, ones)
        self._ones_qform = float(ones @ self._z1)
        if self._ones_qform <= 0.0:
            raise DegenerateDataError("1' Sigma^{-1} 1 is not positive")
        zy = linalg.solve(self._fact, y)
        self.mean = float(y @ self._z1) / self._ones_qform
        residual = y - self.mean
        self._weights = zy - self.mean * self._z1
        self.dispersion = float(residual @ self._weights)
        if not self.dispersion > 0.0:
            raise DegenerateDataError(
                f"residual quadratic form s^2 = {self.dispersion:.3e} is not positive"
            )

    def predict_many(self, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Locations and Student scales at each row of ``x``."""
        k = cross_correlation(self.spec, self.train, x)
        locations = self.mean + k.T @ self._weights
        w = linalg.half_solve(self._fact, k)
        ones_cross = 1.0 - self._z1 @ k
        bracket = 1.0 - np.einsum("ij,ij->j", w, w) + ones_cross**2 / self._ones_qform
        scales = np.sqrt(self.dispersion / self.dof * _clamp_bracket(bracket))
        return locations, scales

    def predict(self, x: np.ndarray) -> PointPrediction:
        locations, scales = self.predict_many(np.atleast_1d(np.asarray(x, float))[None, :])
        return PointPrediction(float(locations[0]), float(scales[0]), self.dof)


def condition_gaussian(
    train: TrainingSet, spec: KernelSpec, mean: float, variance: float
) -> GaussianPosterior:
    """Condition a Gaussian field with known constant mean and variance."""
    return GaussianPosterior(train, spec, mean, variance, mean_estimated=False)


def condition_mixture_mean(
    train: TrainingSet, spec: KernelSpec, variance: float
) -> GaussianPosterior:
    """Condition the improper-uniform-mean Gaussian limit.

    The location uses the GLS constant and the variance carries the
    mean-estimation term, so it dominates the known-mean variance
    everywhere.
    """
    return GaussianPosterior(train, spec, None, variance, mean_estimated=True)


def condition_student(train: TrainingSet, spec: KernelSpec) -> StudentPosterior:
    """Condition the Student field (improper uniform mean and deviation)."""
    return StudentPosterior(train, spec)


def predict(posterior, x: np.ndarray) -> PointPrediction:
    """Marginal posterior at a single point."""
    return posterior.predict(x)


def student_pdf(p: PointPrediction, t: float) -> float:
    """Density of the marginal at ``t``; Dirac conventions at scale 0."""
    if p.scale == 0.0:
        return math.inf if t == p.location else 0.0
    z = (t - p.location) / p.scale
    if p.dof is None:
        return float(np.exp(-0.5 * z * z) / (math.sqrt(2.0 * math.pi) * p.scale))
    nu = p.dof
    log_norm = (
        gammaln((nu + 1) / 2.0)
        - gammaln(nu / 2.0)
        - 0.5 * math.log(nu * math.pi)
        - math.log(p.scale)
    )
    return float(np.exp(log_norm - (nu + 1) / 2.0 * np.log1p(z * z / nu)))


def _t_upper(nu: int, z: np.ndarray) -> np.ndarray:
    """Upper tail P(T > z) of the standard Student-t via incomplete beta."""
    z = np.asarray(z, dtype=float)
    w = nu / (nu + z * z)
    half_tail = 0.5 * betainc(nu / 2.0, 0.5, w)
    return np.where(z >= 0.0, half_tail, 1.0 - half_tail)


def student_cdf_upper(p: PointPrediction, m: float) -> float:
    """P(Y > m) for the marginal; 1 or 0 at scale 0 (Dirac limit)."""
    if p.scale == 0.0:
        return 1.0 if p.location > m else 0.0
    z = (m - p.location) / p.scale
    if p.dof is None:
        return float(ndtr(-z))
    return float(_t_upper(p.dof, np.asarray(z)))


def upper_tail_many(
    locations: np.ndarray, scales: np.ndarray, dof: int | None, m: float
) -> np.ndarray:
    """Vectorized P(Y > m) with the same Dirac convention as the scalar form."""
    locations = np.asarray(locations, dtype=float)
    scales = np.asarray(scales, dtype=float)
    out = np.empty_like(locations)
    dirac = scales == 0.0
    out[dirac] = (locations[dirac] > m).astype(float)
    live = ~dirac
    if np.any(live):
        z = (m - locations[live]) / scales[live]
        out[live] = ndtr(-z) if dof is None else _t_upper(dof, z)
    return out


def mvt_logpdf(
    location: np.ndarray, scale_matrix: np.ndarray, dof: int, t: np.ndarray
) -> float:
    """Log-density of a p-variate Student distribution.

    The density is
    ``(pi nu)^(-p/2) |S|^(-1/2) Gamma((nu+p)/2) / Gamma(nu/2)
    (1 + (t-mu)' S^{-1} (t-mu) / nu)^(-(nu+p)/2)``.
    """
    mu = np.atleast_1d(np.asarray(location, dtype=float))
    tv = np.atleast_1d(np.asarray(t, dtype=float))
    if tv.shape != mu.shape:
        raise DimensionMismatchError(
            f"point shape {tv.shape} does not match location shape {mu.shape}"
        )
    p = mu.size
    fact = linalg.factor(np.atleast_2d(np.asarray(scale_matrix, dtype=float)))
    if fact.order != p:
        raise DimensionMismatchError(
            f"scale matrix order {fact.order} does not match dimension {p}"
        )
    half = linalg.half_solve(fact, tv - mu)
    qform = float(half @ half)
    return float(
        gammaln((dof + p) / 2.0)
        - gammaln(dof / 2.0)
        - 0.5 * p * math.log(dof * math.pi)
        - 0.5 * fact.log_det
        - 0.5 * (dof + p) * math.log1p(qform / dof)
    )


def credible_band(posterior, x: np.ndarray, level: float = 0.9):
    """Central credible band (lo, hi) at each row of ``x``."""
    locations, scales = posterior.predict_many(x)
    tail = 0.5 * (1.0 + level)
    q = ndtri(tail) if posterior.dof is None else stdtrit(posterior.dof, tail)
    return locations - q * scales, locations + q * scales
