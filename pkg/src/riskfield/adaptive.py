"""Entropy-driven enrichment of the training design.

The acquisition criterion is the differential entropy of the posterior
marginal. For a location-scale Student-t with nu degrees of freedom it has
the closed form

    h = log(scale) + (nu+1)/2 * (psi((nu+1)/2) - psi(nu/2))
      + log(sqrt(nu) * B(nu/2, 1/2))

so it is driven entirely by the predictive scale at fixed nu. Training
points have scale 0 and report a -inf sentinel, which keeps proposals away
from existing observations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize
from scipy.special import betaln, digamma

from .errors import InvalidParametersError
from .kernels import TrainingSet
from .mle import SearchConfig, calibrate
from .posterior import StudentPosterior, condition_student
from .risk import (
    BetaMixtureSummary,
    FailureSpec,
    UniformBoxSampler,
    beta_mixture_stats,
    risk_distribution_mc,
)
from .sobol import sobol_points, scale_to_box


def standard_student_entropy(dof: int) -> float:
    """Entropy of the standard Student-t with ``dof`` degrees of freedom."""
    half = dof / 2.0
    return float(
        (dof + 1.0) / 2.0 * (digamma(half + 0.5) - digamma(half))
        + math.log(math.sqrt(dof))
        + betaln(half, 0.5)
    )


def pointwise_entropy(posterior: StudentPosterior, x: np.ndarray) -> float:
    """Differential entropy of the posterior marginal at ``x``.

    Returns -inf at points of zero predictive scale (Dirac marginals,
    in particular every training point).
    """
    p = posterior.predict(x)
    if p.scale <= 0.0:
        return -math.inf
    return math.log(p.scale) + standard_student_entropy(p.dof)


@dataclass(frozen=True)
class AscentConfig:
    """Multi-start controls for the entropy ascent."""

    starts: int = 24
    max_iterations: int = 120


@dataclass(frozen=True, eq=False)
class DesignProposal:
    """Proposed observation points, sorted by descending entropy.

    ``complete`` is False when fewer than the requested number of
    sufficiently separated entropy maxima exist.
    """

    points: np.ndarray
    entropies: np.ndarray
    round_index: int = 0
    complete: bool = True


def propose_points(
    posterior: StudentPosterior,
    count: int,
    search: AscentConfig = AscentConfig(),
    min_separation: float | None = None,
    round_index: int = 0,
) -> DesignProposal:
    """Entropy maxima of the posterior, greedily separated.

    Nelder-Mead ascents start from a Sobol grid over the factor box; the
    candidates are then filtered so that every kept point stays at least
    ``min_separation`` (default 1% of the box diagonal) away from both the
    kept set and the training points.
    """
    if count < 1:
        raise InvalidParametersError("at least one proposal must be requested")
    train = posterior.train
    box = train.box
    if min_separation is None:
        min_separation = 0.01 * train.box_diagonal
    ent_const = standard_student_entropy(posterior.dof)
    lo, hi = box[:, 0], box[:, 1]

    def negative_entropy(x: np.ndarray) -> float:
        if np.any(x < lo) or np.any(x > hi):
            return math.inf
        _, scales = posterior.predict_many(x[None, :])
        scale = float(scales[0])
        if scale <= 0.0:
            return math.inf
        return -(math.log(scale) + ent_const)

    starts = scale_to_box(sobol_points(train.dimension, search.starts), box)
    candidates = []
    for index in range(search.starts):
        result = minimize(
            negative_entropy,
            starts[index],
            method="Nelder-Mead",
            options={"maxiter": search.max_iterations, "xatol": 1e-4, "fatol": 1e-8},
        )
        if math.isfinite(result.fun):
            candidates.append((float(-result.fun), index, np.asarray(result.x)))

    candidates.sort(key=lambda c: (-c[0], c[1]))
    kept_points: list[np.ndarray] = []
    kept_entropy: list[float] = []
    for entropy, _, point in candidates:
        if len(kept_points) == count:
            break
        blockers = np.vstack([train.points] + [p[None, :] for p in kept_points])
        gap = float(np.min(np.linalg.norm(blockers - point, axis=1)))
        if gap < min_separation:
            continue
        kept_points.append(point)
        kept_entropy.append(entropy)

    complete = len(kept_points) == count
    points = np.vstack(kept_points) if kept_points else np.empty((0, train.dimension))
    return DesignProposal(
        points=points,
        entropies=np.asarray(kept_entropy),
        round_index=round_index,
        complete=complete,
    )


@dataclass(frozen=True, eq=False)
class EnrichmentRecord:
    """One row of the enrichment convergence log."""

    round_index: int
    size: int
    mean: float
    lo90: float
    hi90: float
    width: float
    max_entropy: float


@dataclass(frozen=True, eq=False)
class EnrichmentResult:
    records: tuple[EnrichmentRecord, ...]
    train: TrainingSet
    summary: BetaMixtureSummary


def enrichment_loop(
    problem,
    initial: int,
    rounds: int,
    batch: int,
    width_target: float,
    seed: int = 0,
    search: SearchConfig | None = None,
    ascent: AscentConfig = AscentConfig(),
    memberships: int = 1000,
    mixture_draws: int = 20_000,
    min_separation: float | None = None,
) -> EnrichmentResult:
    """Alternate calibrate / condition / risk / propose until converged.

    Stops as soon as the 90% smallest-interval width reaches
    ``width_target`` or after ``rounds`` enrichment rounds. Each round adds
    at most ``batch`` new true-function evaluations at entropy maxima.
    """
    if initial < 3:
        raise InvalidParametersError("the initial design needs at least 3 points")
    if rounds < 0 or batch < 1:
        raise InvalidParametersError("rounds must be >= 0 and batch >= 1")
    response, fail = problem.risk_task()
    search = search if search is not None else SearchConfig(seed=seed)
    points = UniformBoxSampler(problem.box, seed).sample(initial)
    train = TrainingSet(points, response(points), problem.box)

    records: list[EnrichmentRecord] = []
    posterior = None
    summary = None
    for round_index in range(rounds + 1):
        result = calibrate(train, "student", search)
        posterior = condition_student(train, result.spec)
        sampler = UniformBoxSampler(problem.box, seed + 1 + round_index)
        dist = risk_distribution_mc(posterior, fail, sampler, memberships)
        summary = beta_mixture_stats(
            dist, levels=(0.9,), draws=mixture_draws, seed=seed + round_index
        )
        lo, hi = summary.interval(0.9)

        proposal = propose_points(
            posterior,
            batch,
            search=ascent,
            min_separation=min_separation,
            round_index=round_index,
        )
        max_entropy = float(proposal.entropies[0]) if proposal.entropies.size else -math.inf
        records.append(
            EnrichmentRecord(
                round_index=round_index,
                size=train.size,
                mean=summary.mean,
                lo90=lo,
                hi90=hi,
                width=hi - lo,
                max_entropy=max_entropy,
            )
        )
        if hi - lo <= width_target or round_index == rounds:
            break
        if proposal.points.shape[0] == 0:
            break
        train = train.extended(proposal.points, response(proposal.points))

    return EnrichmentResult(records=tuple(records), train=train, summary=summary)
