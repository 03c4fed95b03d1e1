"""Command-line orchestration: fit, risk, convergence, benchmarks, adaptive.

Configuration is a TOML file; results are CSV tables and JSON summaries
written with canonical formatting, so identical configs and seeds always
produce identical bytes and every emitted file re-serializes to itself.

Exit codes: 0 success, 2 configuration error, 3 numerical failure, 4 IO.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from dataclasses import dataclass, replace

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from . import benchmarks as bm
from .adaptive import AscentConfig, enrichment_loop
from .errors import ConfigError, RiskfieldError, TooFewPointsError
from .kernels import TrainingSet
from .mle import SearchConfig, calibrate, gaussian_mle_constants
from .posterior import condition_gaussian, condition_student
from .risk import (
    FailureSpec,
    UniformBoxSampler,
    beta_mixture_stats,
    bmc_baseline,
    risk_distribution_mc,
)

BRUTE_FORCE_COUNT = 200_000


# ---------------------------------------------------------------- config


@dataclass(frozen=True)
class McConfig:
    budgets: tuple[int, ...] = (30, 60, 100, 200, 400, 600)
    memberships: int = 1000
    mixture_draws: int = 20_000
    levels: tuple[float, ...] = (0.9,)


@dataclass(frozen=True)
class AdaptiveConfig:
    initial: int = 30
    rounds: int = 10
    batch: int = 10
    width_target: float = 0.05
    starts: int = 24
    ascent_iterations: int = 120


@dataclass(frozen=True)
class RiskConfig:
    """Failure event for CSV-trained runs: response above/below ``threshold``."""

    threshold: float | None = None
    side: str = "above"


@dataclass(frozen=True, eq=False)
class ExperimentConfig:
    problem: bm.BenchmarkProblem | None
    model: str
    seed: int
    out: str
    train_n: int | None
    train_csv: str | None
    train_box: np.ndarray | None
    search: SearchConfig
    mc: McConfig
    adaptive: AdaptiveConfig
    risk: RiskConfig


def _expect(table: dict, field: str, kinds, where: str, default=None, required=False):
    if field not in table:
        if required:
            raise ConfigError(f"[{where}] is missing required field {field!r}")
        return default
    value = table[field]
    allowed = kinds if isinstance(kinds, tuple) else (kinds,)
    # bool is a subclass of int; only accept it when asked for explicitly.
    bad_bool = isinstance(value, bool) and bool not in allowed
    if bad_bool or not isinstance(value, allowed):
        raise ConfigError(f"[{where}] field {field!r} has the wrong type")
    return value


def _build_problem(raw: dict) -> bm.BenchmarkProblem | None:
    experiment = raw.get("experiment", {})
    name = experiment.get("benchmark")
    block = raw.get("problem")
    if name is not None and block is not None:
        raise ConfigError("[experiment] benchmark and [problem] are mutually exclusive")
    if name is not None:
        known = {p.name: p for p in bm.reference_problems()}
        if name not in known:
            raise ConfigError(
                f"[experiment] benchmark must be one of {sorted(known)}, got {name!r}"
            )
        return known[name]
    if block is None:
        return None
    kind = _expect(block, "kind", str, "problem", required=True)
    try:
        if kind == "quadric":
            return bm.QuadricProblem(
                coefficients=_expect(block, "coefficients", list, "problem", required=True),
                threshold=_expect(block, "threshold", (int, float), "problem", required=True),
            )
        if kind == "sine":
            return bm.SineProblem(
                coefficients=_expect(block, "coefficients", list, "problem", required=True),
                threshold=_expect(block, "threshold", (int, float), "problem", required=True),
            )
        if kind == "bell":
            return bm.BellProblem(
                centers=_expect(block, "centers", list, "problem", required=True),
                widths=_expect(block, "widths", list, "problem", required=True),
                threshold=_expect(block, "threshold", (int, float), "problem", required=True),
            )
    except RiskfieldError as exc:
        raise ConfigError(f"[problem] invalid parameters: {exc}") from exc
    raise ConfigError(f"[problem] kind must be quadric, sine or bell, got {kind!r}")


def load_config(path: str) -> ExperimentConfig:
    try:
        with open(path, "rb") as handle:
            raw = tomllib.load(handle)
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"config file is not valid TOML: {exc}") from exc

    experiment = raw.get("experiment", {})
    model = _expect(experiment, "model", str, "experiment", default="student")
    if model not in ("student", "gaussian-mle"):
        raise ConfigError(
            f"[experiment] model must be student or gaussian-mle, got {model!r}"
        )
    seed = _expect(experiment, "seed", int, "experiment", required=True)
    if seed < 0:
        raise ConfigError("[experiment] seed must be a non-negative integer")
    out = _expect(experiment, "out", str, "experiment", default="results")

    train = raw.get("train", {})
    train_n = _expect(train, "n", int, "train")
    train_csv = _expect(train, "csv", str, "train")
    box_raw = _expect(train, "box", list, "train")
    train_box = np.asarray(box_raw, dtype=float) if box_raw is not None else None
    if train_n is not None and train_n < 2:
        raise ConfigError("[train] n must be at least 2")

    search_raw = raw.get("search", {})
    search = SearchConfig(
        restarts=_expect(search_raw, "restarts", int, "search", default=8),
        seed=seed,
        gamma=_expect(search_raw, "gamma", (int, float), "search"),
        jitter=_expect(search_raw, "jitter", (int, float), "search", default=0.0),
        max_iterations=_expect(search_raw, "max_iterations", int, "search"),
        xatol=_expect(search_raw, "xatol", (int, float), "search", default=1e-3),
        fatol=_expect(search_raw, "fatol", (int, float), "search", default=1e-7),
    )
    if search.restarts < 1:
        raise ConfigError("[search] restarts must be positive")

    mc_raw = raw.get("mc", {})
    budgets = _expect(mc_raw, "budgets", list, "mc", default=list(McConfig.budgets))
    if not budgets or any(not isinstance(b, int) or b < 1 for b in budgets):
        raise ConfigError("[mc] budgets must be a non-empty list of positive integers")
    mc = McConfig(
        budgets=tuple(budgets),
        memberships=_expect(mc_raw, "memberships", int, "mc", default=1000),
        mixture_draws=_expect(mc_raw, "mixture_draws", int, "mc", default=20_000),
        levels=tuple(
            float(v)
            for v in _expect(mc_raw, "levels", list, "mc", default=[0.9])
        ),
    )
    if mc.memberships < 1 or mc.mixture_draws < 1:
        raise ConfigError("[mc] memberships and mixture_draws must be positive")

    adaptive_raw = raw.get("adaptive", {})
    adaptive = AdaptiveConfig(
        initial=_expect(adaptive_raw, "initial", int, "adaptive", default=30),
        rounds=_expect(adaptive_raw, "rounds", int, "adaptive", default=10),
        batch=_expect(adaptive_raw, "batch", int, "adaptive", default=10),
        width_target=_expect(
            adaptive_raw, "width_target", (int, float), "adaptive", default=0.05
        ),
        starts=_expect(adaptive_raw, "starts", int, "adaptive", default=24),
        ascent_iterations=_expect(
            adaptive_raw, "ascent_iterations", int, "adaptive", default=120
        ),
    )

    risk_raw = raw.get("risk", {})
    side = _expect(risk_raw, "side", str, "risk", default="above")
    if side not in ("above", "below"):
        raise ConfigError(f"[risk] side must be above or below, got {side!r}")
    risk = RiskConfig(
        threshold=_expect(risk_raw, "threshold", (int, float), "risk"), side=side
    )

    problem = _build_problem(raw)
    if problem is not None and train_csv is not None:
        raise ConfigError(
            "[train] csv cannot be combined with a benchmark or [problem] block"
        )

    return ExperimentConfig(
        problem=problem,
        model=model,
        seed=seed,
        out=out,
        train_n=train_n,
        train_csv=train_csv,
        train_box=train_box,
        search=search,
        mc=mc,
        adaptive=adaptive,
        risk=risk,
    )


# ----------------------------------------------------- canonical serialization


def format_cell(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def parse_cell(text: str):
    if text == "true":
        return True
    if text == "false":
        return False
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text


def write_table(path: str, header: list[str], rows: list[list]) -> None:
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_cell(cell) for cell in row])


def read_table(path: str) -> tuple[list[str], list[list]]:
    with open(path, newline="") as handle:
        reader = csv.reader(handle)
        header = next(reader)
        rows = [[parse_cell(cell) for cell in row] for row in reader]
    return header, rows


def _jsonable(value):
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating, float)):
        v = float(value)
        return v if math.isfinite(v) else None
    if isinstance(value, np.ndarray):
        return [_jsonable(v) for v in value.tolist()]
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    return value


def json_bytes(payload: dict) -> bytes:
    return (json.dumps(_jsonable(payload), sort_keys=True, indent=2) + "\n").encode()


def write_json(path: str, payload: dict) -> None:
    with open(path, "wb") as handle:
        handle.write(json_bytes(payload))


# ------------------------------------------------------------ shared steps


def _load_csv_training(path: str, box: np.ndarray | None) -> TrainingSet:
    with open(path, newline="") as handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        rows = list(reader)
    if header is None:
        raise ConfigError(f"training file {path} is empty")
    dim = len(header) - 1
    expected = [f"x{i + 1}" for i in range(dim)] + ["y"]
    if dim < 1 or header != expected:
        raise ConfigError(
            f"training file {path} must have header x1,...,xD,y; got {header}"
        )
    try:
        data = np.array([[float(cell) for cell in row] for row in rows])
    except ValueError as exc:
        raise ConfigError(f"training file {path} has a non-numeric cell: {exc}") from exc
    if data.size == 0:
        raise TooFewPointsError(f"training file {path} contains no observations")
    points, responses = data[:, :dim], data[:, dim]
    if box is None:
        raise ConfigError("[train] box is required when training from a CSV file")
    if box.shape != (dim, 2):
        raise ConfigError(
            f"[train] box must have shape ({dim}, 2) for {dim}-dimensional data"
        )
    return TrainingSet(points, responses, box)


def _task_training(config: ExperimentConfig):
    """Training data in task coordinates (defects in the upper tail).

    CSV runs with [risk] side = "below" negate the responses and the
    threshold, matching the convention the below-side benchmarks use; the
    failure probability is unchanged. The FailureSpec is None for CSV runs
    without a threshold, which is enough for ``fit`` but not for ``risk``.
    """
    if config.train_csv is not None:
        train = _load_csv_training(config.train_csv, config.train_box)
        if config.risk.threshold is None:
            return train, None
        threshold = float(config.risk.threshold)
        if config.risk.side == "below":
            train = TrainingSet(train.points, -train.responses, train.box)
            threshold = -threshold
        return train, FailureSpec(threshold)
    if config.problem is None:
        raise ConfigError("configure [train] csv, [experiment] benchmark, or [problem]")
    if config.train_n is None:
        raise ConfigError("[train] n is required when sampling a benchmark")
    response, fail = config.problem.risk_task()
    points = UniformBoxSampler(config.problem.box, config.seed).sample(config.train_n)
    return TrainingSet(points, response(points), config.problem.box), fail


def _fit_model(config: ExperimentConfig, train: TrainingSet):
    if config.model == "student":
        result = calibrate(train, "student", config.search)
        posterior = condition_student(train, result.spec)
    else:
        result = calibrate(train, "gaussian", config.search)
        mean, variance = gaussian_mle_constants(train, result.spec)
        posterior = condition_gaussian(train, result.spec, mean, variance)
    return result, posterior


def _interpolation_report(posterior, train: TrainingSet) -> dict:
    locations, scales = posterior.predict_many(train.points)
    return {
        "max_location_error": float(np.max(np.abs(locations - train.responses))),
        "max_scale": float(np.max(scales)),
    }


def _fit_payload(config: ExperimentConfig, train, result, posterior) -> dict:
    return {
        "model": config.model,
        "n": train.size,
        "dimension": train.dimension,
        "seed": config.seed,
        "kernel": {
            "gamma": result.spec.gamma,
            "length_scales": result.spec.length_scales,
            "jitter": result.spec.jitter,
        },
        "objective": result.objective,
        "restarts": len(result.trace),
        "interpolation": _interpolation_report(posterior, train),
    }


# ---------------------------------------------------------------- commands


def cmd_fit(config: ExperimentConfig) -> int:
    train, _ = _task_training(config)
    result, posterior = _fit_model(config, train)
    os.makedirs(config.out, exist_ok=True)
    write_json(
        os.path.join(config.out, "fit.json"),
        _fit_payload(config, train, result, posterior),
    )
    print(f"fit: n={train.size} D={train.dimension} objective={result.objective:.6g}")
    return 0


def cmd_risk(config: ExperimentConfig) -> int:
    train, fail = _task_training(config)
    if fail is None:
        raise ConfigError("risk needs [risk] threshold or a benchmark problem")
    result, posterior = _fit_model(config, train)
    sampler = UniformBoxSampler(train.box, config.seed + 1)
    dist = risk_distribution_mc(posterior, fail, sampler, config.mc.memberships)
    summary = beta_mixture_stats(
        dist, levels=config.mc.levels, draws=config.mc.mixture_draws, seed=config.seed
    )
    os.makedirs(config.out, exist_ok=True)
    payload = {
        "fit": _fit_payload(config, train, result, posterior),
        "memberships": dist.size,
        "risk": {
            "mean": summary.mean,
            "sample_mean": summary.sample_mean,
            "std": summary.std,
            "intervals": {format_cell(k): list(v) for k, v in summary.intervals.items()},
            "draws": summary.draws,
        },
    }
    if config.problem is not None:
        r_t = config.problem.theoretical_risk()
        lo, hi = summary.interval(config.mc.levels[0])
        payload["theoretical_risk"] = r_t
        payload["covered"] = bool(lo <= r_t <= hi)
    write_json(os.path.join(config.out, "risk.json"), payload)
    tail = dist.tail()
    write_table(
        os.path.join(config.out, "tail.csv"),
        ["alpha", "risk"],
        [[float(a), float(v)] for a, v in zip(tail.knots[:-1], tail.values)],
    )
    print(f"risk: mean={summary.mean:.6g} interval90={summary.interval(0.9)}")
    return 0


def cmd_convergence(config: ExperimentConfig) -> int:
    if config.problem is None:
        raise ConfigError("convergence needs a benchmark or [problem] block")
    problem = config.problem
    response, fail = problem.risk_task()
    r_t = problem.theoretical_risk()
    level = config.mc.levels[0]
    master = UniformBoxSampler(problem.box, config.seed).sample(max(config.mc.budgets))

    rows: list[list] = []
    for budget in config.mc.budgets:
        points = master[:budget]
        train = TrainingSet(points, response(points), problem.box)
        _, posterior = _fit_model(config, train)
        sampler = UniformBoxSampler(problem.box, config.seed + budget)
        dist = risk_distribution_mc(posterior, fail, sampler, config.mc.memberships)
        summary = beta_mixture_stats(
            dist,
            levels=config.mc.levels,
            draws=config.mc.mixture_draws,
            seed=config.seed + budget + 1,
        )
        lo, hi = summary.interval(level)
        rows.append(
            ["mmc", budget, summary.mean, summary.std, lo, hi, r_t, lo <= r_t <= hi]
        )
    for budget in config.mc.budgets:
        baseline = bmc_baseline(problem, budget, levels=config.mc.levels)
        lo, hi = baseline.interval(level)
        rows.append(
            ["bmc", budget, baseline.mean, baseline.std, lo, hi, r_t, lo <= r_t <= hi]
        )

    os.makedirs(config.out, exist_ok=True)
    write_table(
        os.path.join(config.out, "convergence.csv"),
        ["method", "M", "mean", "std", "lo90", "hi90", "r_t", "covered"],
        rows,
    )
    coverage = {
        method: sum(1 for row in rows if row[0] == method and row[7])
        for method in ("mmc", "bmc")
    }
    write_json(
        os.path.join(config.out, "convergence.json"),
        {
            "problem": problem.name,
            "theoretical_risk": r_t,
            "budgets": list(config.mc.budgets),
            "covered": coverage,
            "level": level,
        },
    )
    for row in rows:
        print(
            f"{row[0]} M={row[1]:>5} mean={row[2]:.5f} "
            f"interval=[{row[4]:.5f}, {row[5]:.5f}] covered={row[7]}"
        )
    return 0


def cmd_benchmarks(out: str | None) -> int:
    rows = []
    for problem in bm.reference_problems():
        r_t = problem.theoretical_risk()
        estimate = bm.brute_force_risk(problem, BRUTE_FORCE_COUNT)
        rows.append(
            [problem.name, problem.dimension, r_t, estimate, abs(estimate - r_t)]
        )
    print(f"{'problem':<10}{'D':>3}{'theoretical':>16}{'sobol':>12}{'abs err':>12}")
    for name, dim, r_t, estimate, err in rows:
        print(f"{name:<10}{dim:>3}{r_t:>16.6e}{estimate:>12.6f}{err:>12.2e}")
    if out:
        os.makedirs(out, exist_ok=True)
        write_table(
            os.path.join(out, "benchmarks.csv"),
            ["problem", "D", "theoretical_risk", "sobol_estimate", "abs_error"],
            rows,
        )
    return 0


def cmd_adaptive(config: ExperimentConfig) -> int:
    if config.problem is None:
        raise ConfigError("adaptive needs a benchmark or [problem] block")
    result = enrichment_loop(
        config.problem,
        initial=config.adaptive.initial,
        rounds=config.adaptive.rounds,
        batch=config.adaptive.batch,
        width_target=config.adaptive.width_target,
        seed=config.seed,
        search=config.search,
        ascent=AscentConfig(
            starts=config.adaptive.starts,
            max_iterations=config.adaptive.ascent_iterations,
        ),
        memberships=config.mc.memberships,
        mixture_draws=config.mc.mixture_draws,
    )
    os.makedirs(config.out, exist_ok=True)
    write_table(
        os.path.join(config.out, "adaptive.csv"),
        ["round", "n", "mean", "lo90", "hi90", "width", "max_entropy"],
        [
            [r.round_index, r.size, r.mean, r.lo90, r.hi90, r.width, r.max_entropy]
            for r in result.records
        ],
    )
    last = result.records[-1]
    payload = {
        "problem": config.problem.name,
        "rounds_run": len(result.records) - 1,
        "final_n": result.train.size,
        "final_mean": last.mean,
        "final_interval": [last.lo90, last.hi90],
        "width_target": config.adaptive.width_target,
        "reached_target": bool(last.width <= config.adaptive.width_target),
        "theoretical_risk": config.problem.theoretical_risk(),
    }
    write_json(os.path.join(config.out, "adaptive.json"), payload)
    for r in result.records:
        print(
            f"round {r.round_index:>2} n={r.size:>4} mean={r.mean:.5f} "
            f"width={r.width:.5f}"
        )
    return 0


# -------------------------------------------------------------------- main


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="riskfield",
        description="Student-field surrogates and failure-risk distributions.",
    )
    parser.add_argument("--config", help="TOML experiment configuration")
    parser.add_argument("--seed", type=int, help="override the config seed")
    parser.add_argument("--out", help="override the output directory")
    parser.add_argument(
        "--threads", type=int, default=1, help="calibration worker threads (0 = auto)"
    )
    parser.add_argument(
        "command",
        choices=["fit", "risk", "convergence", "benchmarks", "adaptive"],
    )
    return parser


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    try:
        if args.command == "benchmarks":
            return cmd_benchmarks(args.out)
        if args.config is None:
            raise ConfigError(f"{args.command} requires --config")
        config = load_config(args.config)
        if args.seed is not None:
            if args.seed < 0:
                raise ConfigError("--seed must be non-negative")
            config = replace(
                config,
                seed=args.seed,
                search=replace(config.search, seed=args.seed),
            )
        if args.out is not None:
            config = replace(config, out=args.out)
        if args.threads != 1:
            config = replace(config, search=replace(config.search, threads=args.threads))
        dispatch = {
            "fit": cmd_fit,
            "risk": cmd_risk,
            "convergence": cmd_convergence,
            "adaptive": cmd_adaptive,
        }
        return dispatch[args.command](config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except RiskfieldError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
