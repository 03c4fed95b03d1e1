"""Maximum-likelihood calibration of kernel parameters.

Two concentrated negative log-likelihood objectives over the kernel
parameters theta = (gamma, l_1..l_D), both with the constant mean and the
variance profiled out in closed form:

* Gaussian model:  n log(sigma2_theta) + log|Sigma_theta|
* Student model:   n log(sigma2_theta) + log|Sigma_theta|
                   + 2 log(1 Sigma_theta^{-1} 1' / sigma2_theta)

with mu_theta = y Sigma^{-1} 1' / (1 Sigma^{-1} 1') and
sigma2_theta = (y - mu_theta 1) Sigma^{-1} (y - mu_theta 1)' / n.

The search is multi-start Nelder-Mead over log length-scales and a
logit-mapped gamma, deterministic for a given seed.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Literal

import numpy as np
from scipy.optimize import minimize
from scipy.special import expit

from . import linalg
from .errors import (
    AllRestartsFailedError,
    DegenerateDataError,
    InvalidParametersError,
    NotPositiveDefiniteError,
    TooFewPointsError,
)
from .kernels import KernelSpec, TrainingSet, correlation_matrix
from .sobol import MAX_DIMENSION, sobol_points

ModelKind = Literal["gaussian", "student"]


@dataclass(frozen=True)
class SearchConfig:
    """Calibration search controls.

    ``gamma=None`` searches gamma jointly with the length-scales over
    ``gamma_bounds``; a float pins it. ``length_scale_bounds=None`` derives
    [1e-3, 10] times the box diagonal. ``threads`` > 1 runs restarts in a
    thread pool; results are identical regardless of worker count.
    """

    restarts: int = 8
    seed: int = 0
    gamma: float | None = None
    gamma_bounds: tuple[float, float] = (0.5, 2.0)
    length_scale_bounds: tuple[float, float] | None = None
    jitter: float = 0.0
    max_iterations: int | None = None
    xatol: float = 1e-3
    fatol: float = 1e-7
    threads: int = 1


@dataclass(frozen=True, eq=False)
class RestartRecord:
    start: KernelSpec
    spec: KernelSpec
    objective: float


@dataclass(frozen=True, eq=False)
class MleResult:
    kind: str
    spec: KernelSpec
    objective: float
    trace: tuple[RestartRecord, ...]


def _profiled_parts(train: TrainingSet, spec: KernelSpec):
    """(log|Sigma|, ones quadratic form, mu_theta, sigma2_theta)."""
    if train.size < 3:
        raise TooFewPointsError(
            f"likelihood objectives need n >= 3 observations, got {train.size}"
        )
    y = train.responses
    if float(np.ptp(y)) == 0.0:
        raise DegenerateDataError("constant responses leave the variance unidentified")
    fact = linalg.factor(correlation_matrix(spec, train), spec.jitter)
    ones = np.ones(train.size)
    z1 = linalg.solve(fact, ones)
    qform = float(ones @ z1)
    if qform <= 0.0:
        raise DegenerateDataError("1' Sigma^{-1} 1 is not positive")
    mu = float(y @ z1) / qform
    residual = y - mu
    half = linalg.half_solve(fact, residual)
    sigma2 = float(half @ half) / train.size
    if not (math.isfinite(sigma2) and sigma2 > 0.0):
        raise DegenerateDataError(f"profiled variance {sigma2:.3e} is not positive")
    return fact.log_det, qform, mu, sigma2


def student_objective(train: TrainingSet, spec: KernelSpec) -> float:
    """Concentrated Student negative log-likelihood (smaller is better)."""
    log_det, qform, _, sigma2 = _profiled_parts(train, spec)
    n = train.size
    return n * math.log(sigma2) + log_det + 2.0 * math.log(qform / sigma2)


def gaussian_objective(train: TrainingSet, spec: KernelSpec) -> float:
    """Concentrated Gaussian negative log-likelihood (smaller is better)."""
    log_det, _, _, sigma2 = _profiled_parts(train, spec)
    return train.size * math.log(sigma2) + log_det


def gaussian_mle_constants(train: TrainingSet, spec: KernelSpec) -> tuple[float, float]:
    """Closed-form MLE of the constant mean and variance for a fixed kernel.

    Returns (mu, sigma2) with mu the GLS constant and sigma2 the profiled
    variance. Constant responses give sigma2 = 0, which downstream
    conditioning rejects.
    """
    if train.size < 2:
        raise TooFewPointsError("mean and variance estimation needs n >= 2")
    fact = linalg.factor(correlation_matrix(spec, train), spec.jitter)
    ones = np.ones(train.size)
    z1 = linalg.solve(fact, ones)
    qform = float(ones @ z1)
    if qform <= 0.0:
        raise DegenerateDataError("1' Sigma^{-1} 1 is not positive")
    mu = float(train.responses @ z1) / qform
    half = linalg.half_solve(fact, train.responses - mu)
    sigma2 = float(half @ half) / train.size
    return mu, sigma2


def _length_scale_bounds(train: TrainingSet, search: SearchConfig) -> tuple[float, float]:
    if search.length_scale_bounds is not None:
        lo, hi = search.length_scale_bounds
    else:
        diag = train.box_diagonal
        lo, hi = 1e-3 * diag, 10.0 * diag
    if not 0.0 < lo < hi:
        raise InvalidParametersError(f"bad length-scale bounds ({lo}, {hi})")
    return float(lo), float(hi)


def calibrate(train: TrainingSet, kind: ModelKind, search: SearchConfig) -> MleResult:
    """Multi-start Nelder-Mead calibration of the kernel parameters.

    Start points come from a seeded Cranley-Patterson rotation of a Sobol
    grid over the log length-scale box. Degenerate proposals (non-PD
    correlation after the jitter cap, vanishing profiled variance, bounds
    violations) score +inf instead of aborting the search. The best restart
    wins; ties break by restart index.
    """
    if kind not in ("gaussian", "student"):
        raise InvalidParametersError(f"model kind must be gaussian or student, got {kind!r}")
    if search.restarts < 1:
        raise InvalidParametersError("at least one restart is required")
    objective_fn = student_objective if kind == "student" else gaussian_objective
    dim = train.dimension
    if train.size < 5 * dim:
        warnings.warn(
            f"only n={train.size} observations for D={dim} factors; "
            "maximum-likelihood calibration can be unstable with scarce data",
            stacklevel=2,
        )

    l_lo, l_hi = _length_scale_bounds(train, search)
    g_lo, g_hi = search.gamma_bounds
    if not 0.0 < g_lo <= g_hi <= 2.0:
        raise InvalidParametersError(f"gamma bounds must sit inside (0, 2], got {search.gamma_bounds}")
    pinned = search.gamma is not None
    if pinned and not g_lo <= search.gamma <= g_hi:
        raise InvalidParametersError(
            f"pinned gamma {search.gamma} is outside bounds {search.gamma_bounds}"
        )
    n_vars = dim + (0 if pinned else 1)

    def unpack(u: np.ndarray) -> KernelSpec:
        scales = np.clip(np.exp(u[:dim]), l_lo, l_hi)
        gamma = search.gamma if pinned else g_lo + (g_hi - g_lo) * float(expit(u[dim]))
        return KernelSpec(gamma=gamma, length_scales=scales, jitter=search.jitter)

    def penalized(u: np.ndarray) -> float:
        scales = np.exp(u[:dim])
        if np.any(scales < l_lo) or np.any(scales > l_hi):
            return math.inf
        try:
            return objective_fn(train, unpack(u))
        except (NotPositiveDefiniteError, DegenerateDataError):
            return math.inf

    rng = np.random.default_rng(search.seed)
    shift = rng.uniform(size=n_vars)
    if n_vars <= MAX_DIMENSION:
        grid = (sobol_points(n_vars, search.restarts) + shift) % 1.0
    else:
        grid = rng.uniform(size=(search.restarts, n_vars))
    starts = np.empty((search.restarts, n_vars))
    starts[:, :dim] = math.log(l_lo) + grid[:, :dim] * (math.log(l_hi) - math.log(l_lo))
    if not pinned:
        starts[:, dim] = 4.0 * grid[:, dim] - 2.0

    options: dict = {"xatol": search.xatol, "fatol": search.fatol}
    if search.max_iterations is not None:
        options["maxiter"] = search.max_iterations

    def run_restart(index: int) -> RestartRecord:
        x0 = starts[index]
        result = minimize(penalized, x0, method="Nelder-Mead", options=options)
        end_objective = float(result.fun)
        if math.isnan(end_objective):
            end_objective = math.inf
        return RestartRecord(
            start=unpack(x0), spec=unpack(result.x), objective=end_objective
        )

    indices = range(search.restarts)
    if search.threads == 1:
        records = [run_restart(i) for i in indices]
    else:
        workers = search.threads if search.threads > 0 else None
        with ThreadPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(run_restart, indices))

    best_index = min(
        range(len(records)),
        key=lambda i: (records[i].objective, i),
    )
    best = records[best_index]
    if not math.isfinite(best.objective):
        raise AllRestartsFailedError(
            f"all {search.restarts} calibration restarts ended degenerate"
        )
    return MleResult(
        kind=kind, spec=best.spec, objective=best.objective, trace=tuple(records)
    )
