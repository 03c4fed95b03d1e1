"""Gamma-exponential correlation functions and training-set containers."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from .errors import (
    DegenerateDataError,
    DimensionMismatchError,
    InvalidParametersError,
    OutOfBoxError,
    TooFewPointsError,
)


@dataclass(frozen=True, eq=False)
class KernelSpec:
    """Anisotropic gamma-exponential correlation.

    corr(a, b) = exp(-(sum_i ((a_i - b_i) / l_i)^2)^(gamma / 2))

    with gamma in (0, 2] and positive length-scales l_i. ``jitter`` is the
    initial diagonal inflation handed to the factorizer. Other correlation
    families can be added by implementing the same three-operation surface
    (scalar, matrix, cross), but only this family ships.
    """

    gamma: float
    length_scales: np.ndarray
    jitter: float = 0.0

    def __post_init__(self):
        ls = np.atleast_1d(np.asarray(self.length_scales, dtype=float))
        object.__setattr__(self, "length_scales", ls)
        object.__setattr__(self, "gamma", float(self.gamma))
        object.__setattr__(self, "jitter", float(self.jitter))
        if not 0.0 < self.gamma <= 2.0:
            raise InvalidParametersError(f"gamma must be in (0, 2], got {self.gamma}")
        if ls.ndim != 1 or ls.size == 0 or not np.all(ls > 0.0):
            raise InvalidParametersError("length scales must be positive reals")
        if not np.all(np.isfinite(ls)):
            raise InvalidParametersError("length scales must be finite")
        if self.jitter < 0.0:
            raise InvalidParametersError("jitter must be non-negative")

    @property
    def dimension(self) -> int:
        return self.length_scales.size


@dataclass(frozen=True, eq=False)
class TrainingSet:
    """Scattered observations of a scalar response over a factor box.

    Rows are stored sorted lexicographically so that equivalent designs
    (same points in any order) produce bit-identical downstream numerics.

    Attributes
    ----------
    points : ndarray, shape (n, D)
        Observation locations, each inside the factor box.
    responses : ndarray, shape (n,)
        Observed values y_i.
    box : ndarray, shape (D, 2)
        Per-dimension [min, max] intervals of the factor box.
    """

    points: np.ndarray
    responses: np.ndarray
    box: np.ndarray

    def __post_init__(self):
        pts = np.atleast_2d(np.asarray(self.points, dtype=float))
        y = np.atleast_1d(np.asarray(self.responses, dtype=float))
        box = np.atleast_2d(np.asarray(self.box, dtype=float))
        if box.shape != (pts.shape[1], 2):
            raise DimensionMismatchError(
                f"box shape {box.shape} does not match dimension {pts.shape[1]}"
            )
        if y.shape[0] != pts.shape[0]:
            raise DimensionMismatchError(
                f"{pts.shape[0]} points but {y.shape[0]} responses"
            )
        if pts.shape[0] < 2:
            raise TooFewPointsError("a training set needs at least 2 points")
        if not np.all(box[:, 0] < box[:, 1]):
            raise InvalidParametersError("box intervals must satisfy min < max")
        if np.any(pts < box[:, 0]) or np.any(pts > box[:, 1]):
            raise OutOfBoxError("training points must lie inside the factor box")
        if not (np.all(np.isfinite(pts)) and np.all(np.isfinite(y))):
            raise InvalidParametersError("points and responses must be finite")

        # Canonical row order; duplicates are adjacent after the sort.
        order = np.lexsort(pts.T[::-1])
        pts = pts[order]
        if np.any(np.all(pts[1:] == pts[:-1], axis=1)):
            raise DegenerateDataError(
                "duplicate points make the correlation matrix singular"
            )
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "responses", y[order])
        object.__setattr__(self, "box", box)

    @property
    def size(self) -> int:
        return self.points.shape[0]

    @property
    def dimension(self) -> int:
        return self.points.shape[1]

    @property
    def box_diagonal(self) -> float:
        return float(np.linalg.norm(self.box[:, 1] - self.box[:, 0]))

    def extended(self, new_points: np.ndarray, new_responses: np.ndarray) -> "TrainingSet":
        """New training set with extra observations appended."""
        return TrainingSet(
            np.vstack([self.points, np.atleast_2d(new_points)]),
            np.concatenate([self.responses, np.atleast_1d(new_responses)]),
            self.box,
        )


def correlation(spec: KernelSpec, a: np.ndarray, b: np.ndarray) -> float:
    """Correlation between two locations; exactly 1 when a equals b."""
    av = np.atleast_1d(np.asarray(a, dtype=float))
    bv = np.atleast_1d(np.asarray(b, dtype=float))
    if av.shape != bv.shape or av.size != spec.dimension:
        raise DimensionMismatchError(
            f"expected two vectors of length {spec.dimension}, "
            f"got shapes {av.shape} and {bv.shape}"
        )
    d2 = float(np.sum(((av - bv) / spec.length_scales) ** 2))
    return float(np.exp(-(d2 ** (spec.gamma / 2.0))))


def _scaled(spec: KernelSpec, pts: np.ndarray) -> np.ndarray:
    return np.asarray(pts, dtype=float) / spec.length_scales


def correlation_matrix(spec: KernelSpec, train: TrainingSet) -> np.ndarray:
    """Symmetric unit-diagonal matrix of pairwise correlations."""
    if spec.dimension != train.dimension:
        raise DimensionMismatchError(
            f"kernel is {spec.dimension}-dimensional, training set is "
            f"{train.dimension}-dimensional"
        )
    u = _scaled(spec, train.points)
    d2 = cdist(u, u, metric="sqeuclidean")
    return np.exp(-(d2 ** (spec.gamma / 2.0)))


def cross_correlation(spec: KernelSpec, train: TrainingSet, x: np.ndarray) -> np.ndarray:
    """Correlations between the n training points and m query points.

    Returns an (n, m) matrix; column j is the correlation vector k(x_j).
    """
    q = np.atleast_2d(np.asarray(x, dtype=float))
    if q.shape[1] != train.dimension or spec.dimension != train.dimension:
        raise DimensionMismatchError(
            f"query dimension {q.shape[1]} does not match training dimension "
            f"{train.dimension}"
        )
    d2 = cdist(_scaled(spec, train.points), _scaled(spec, q), metric="sqeuclidean")
    return np.exp(-(d2 ** (spec.gamma / 2.0)))


def correlation_vector(spec: KernelSpec, train: TrainingSet, x: np.ndarray) -> np.ndarray:
    """Vector of correlations between one query point and all training points."""
    xv = np.atleast_1d(np.asarray(x, dtype=float))
    if xv.ndim != 1 or xv.size != train.dimension:
        raise DimensionMismatchError(
            f"expected a vector of length {train.dimension}, got shape {xv.shape}"
        )
    return cross_correlation(spec, train, xv[None, :])[:, 0]
