"""End-to-end acceptance checks.

Each test covers one numbered claim about the library, with the tolerance
stated next to the assertion and a single PASS line printed once the claim
holds, so a run with output capture disabled reads as a checklist. The
slowest item is the convergence study (number 8), which fits surrogates at
six budgets and must finish inside five minutes single-threaded.
"""

import math
import time

import numpy as np
from scipy.integrate import quad
from scipy.stats import t as student_t

from riskfield import cli
from riskfield.adaptive import AscentConfig, propose_points, standard_student_entropy
from riskfield.benchmarks import brute_force_risk, reference_problems
from riskfield.kernels import KernelSpec, TrainingSet, correlation_matrix
from riskfield.mle import (
    SearchConfig,
    calibrate,
    gaussian_mle_constants,
    student_objective,
)
from riskfield.posterior import (
    condition_gaussian,
    condition_mixture_mean,
    condition_student,
    credible_band,
)
from riskfield.risk import (
    MembershipSample,
    RiskDistribution,
    apply_L_eta,
    beta_count_summary,
    beta_mixture_stats,
    first_moment,
)

# Exact failure risks of the three reference problems, computed once from
# the defining volume integrals with 50-digit arithmetic and frozen here.
QUADRIC_RISK = 0.10081751444411764
SINE_RISK = 0.20483276469913342
BELL_RISK = 0.004347682476356125

# Dense Sobol count (2^23 true-function calls) of the bell defect set,
# frozen as independent evidence for the bell value's third digit.
BELL_DENSE_COUNT = 0.00434565544128418

FIVE_X = np.array([[-4.0], [-3.0], [-1.0], [0.0], [2.0]])
FIVE_Y = np.array([-2.0, 0.0, 1.0, 2.0, -1.0])
FIVE_BOX = np.array([[-4.0, 2.0]])
FIVE_SPEC = KernelSpec(gamma=2.0, length_scales=(0.1,))


def report(tag: str, detail: str = "") -> None:
    suffix = f" ({detail})" if detail else ""
    print(f"PASS {tag}{suffix}")


def seeded_set(seed: int, dim: int) -> TrainingSet:
    """Well-separated random design with a smooth response surface."""
    n = {1: 9, 3: 14, 5: 18}[dim]
    rng = np.random.default_rng(seed)
    kept: list[np.ndarray] = []
    tries = 0
    while len(kept) < n:
        tries += 1
        assert tries < 100_000
        candidate = rng.uniform(size=dim)
        if all(np.linalg.norm(candidate - p) >= 0.08 for p in kept):
            kept.append(candidate)
    points = np.asarray(kept)
    responses = np.sin(2.0 * np.pi * points.sum(axis=1)) + 0.3 * np.cos(
        3.0 * np.pi * points[:, 0]
    )
    box = np.column_stack([np.zeros(dim), np.ones(dim)])
    return TrainingSet(points, responses, box)


def seeded_spec(seed: int, dim: int) -> KernelSpec:
    scale = 0.25 + 0.1 * (seed % 3)
    return KernelSpec(gamma=1.5, length_scales=(scale,) * dim)


def gp_sample(seed: int, spec: KernelSpec, n: int = 40) -> TrainingSet:
    """Draw one exact field realization with the given kernel.

    The container sorts its rows, so the correlation matrix is built over
    the stored point order and the draw is paired with those same points.
    """
    rng = np.random.default_rng(seed)
    points = rng.uniform(size=(n, 1))
    box = np.array([[0.0, 1.0]])
    sorted_points = TrainingSet(points, np.zeros(n), box).points
    sigma = correlation_matrix(spec, TrainingSet(sorted_points, np.zeros(n), box))
    responses = np.linalg.cholesky(sigma + 1e-12 * np.eye(n)) @ rng.normal(size=n)
    return TrainingSet(sorted_points, responses, box)


def test_01_exact_benchmark_risks():
    """The three closed-form risks agree with the frozen references to
    better than three significant figures, in under a second."""
    start = time.monotonic()
    quadric, sine, bell = (p.theoretical_risk() for p in reference_problems())
    # quadric and sine round to the reference decimals 1.008e-1 and 2.048e-1
    assert abs(quadric - 1.008e-1) <= 5e-5
    assert abs(sine - 2.048e-1) <= 5e-5
    np.testing.assert_allclose(quadric, QUADRIC_RISK, rtol=1e-12)
    np.testing.assert_allclose(sine, SINE_RISK, rtol=1e-12)
    # The bell risk rounds to 4.348e-3. A circulating rounding of this
    # configuration, 4.341e-3, is consistent with neither the ball-volume
    # formula nor the frozen dense count, which sits 2.0e-6 from the
    # closed form but 4.7e-6 from that rounding; the direct computations
    # win the tiebreak.
    np.testing.assert_allclose(bell, BELL_RISK, rtol=1e-12)
    assert abs(bell - BELL_DENSE_COUNT) <= 3e-6
    assert abs(bell - 4.348e-3) <= 5e-7
    elapsed = time.monotonic() - start
    assert elapsed < 1.0
    report("1 exact-benchmark-risks", f"{elapsed:.3f}s")


def test_02_brute_force_matches_theory():
    """Sobol counting with 2e5 true-function calls lands within 3 binomial
    standard errors of each exact risk (5 for the rare bell event)."""
    start = time.monotonic()
    multipliers = {"quadric": 3.0, "sine": 3.0, "bell": 5.0}
    count = 200_000
    worst = 0.0
    for problem in reference_problems():
        exact = problem.theoretical_risk()
        estimate = brute_force_risk(problem, count)
        standard_error = math.sqrt(exact * (1.0 - exact) / count)
        margin = multipliers[problem.name] * standard_error
        deviation = abs(estimate - exact)
        assert deviation <= margin, (
            f"{problem.name}: |{estimate} - {exact}| = {deviation} > {margin}"
        )
        worst = max(worst, deviation / standard_error)
    elapsed = time.monotonic() - start
    assert elapsed < 30.0
    report("2 brute-force-agreement", f"worst {worst:.2f} SE, {elapsed:.1f}s")


def test_03_interpolation_suite():
    """Over 50 seeded designs in dimensions 1, 3 and 5, both posteriors
    reproduce every observation: |location - y_i| < 1e-6 and scale < 1e-6
    at each training point."""
    worst_location = 0.0
    worst_scale = 0.0
    for seed in range(50):
        dim = (1, 3, 5)[seed % 3]
        train = seeded_set(seed, dim)
        spec = seeded_spec(seed, dim)
        mu, variance = gaussian_mle_constants(train, spec)
        for posterior in (
            condition_student(train, spec),
            condition_gaussian(train, spec, mu, variance),
        ):
            locations, scales = posterior.predict_many(train.points)
            worst_location = max(
                worst_location, float(np.max(np.abs(locations - train.responses)))
            )
            worst_scale = max(worst_scale, float(np.max(scales)))
    assert worst_location < 1e-6
    assert worst_scale < 1e-6
    report(
        "3 interpolation-suite",
        f"max |loc-y| {worst_location:.1e}, max scale {worst_scale:.1e}",
    )


def test_04_location_sharing_and_scale_dominance():
    """Student and mixture-mean locations agree to 1e-8 at 1000 probes per
    seeded set, and the Student 90% half-width is never smaller than the
    Gaussian-MLE one."""
    worst_gap = 0.0
    for seed in range(12):
        dim = (1, 3, 5)[seed % 3]
        train = seeded_set(seed, dim)
        spec = seeded_spec(seed, dim)
        probes = np.random.default_rng(1000 + seed).uniform(size=(1000, dim))

        student = condition_student(train, spec)
        mixture = condition_mixture_mean(train, spec, variance=1.0)
        student_loc, _ = student.predict_many(probes)
        mixture_loc, _ = mixture.predict_many(probes)
        worst_gap = max(worst_gap, float(np.max(np.abs(student_loc - mixture_loc))))

        mu, variance = gaussian_mle_constants(train, spec)
        gauss = condition_gaussian(train, spec, mu, variance)
        s_lo, s_hi = credible_band(student, probes, 0.9)
        g_lo, g_hi = credible_band(gauss, probes, 0.9)
        assert np.all((s_hi - s_lo) >= (g_hi - g_lo) - 1e-15)
    assert worst_gap <= 1e-8
    report("4 shared-locations-wider-student", f"max location gap {worst_gap:.1e}")


def test_05_five_point_band_containment(tmp_path):
    """On the five-point dataset with correlation exp(-100 |x-x'|^2), the
    emitted band table shows the Student 90% band strictly containing the
    Gaussian-MLE band off the data and both bands collapsing (width <
    1e-6) on the data."""
    train = TrainingSet(FIVE_X, FIVE_Y, FIVE_BOX)
    student = condition_student(train, FIVE_SPEC)
    mu, variance = gaussian_mle_constants(train, FIVE_SPEC)
    gauss = condition_gaussian(train, FIVE_SPEC, mu, variance)

    grid = np.linspace(-4.0, 2.0, 601)[:, None]
    s_lo, s_hi = credible_band(student, grid, 0.9)
    g_lo, g_hi = credible_band(gauss, grid, 0.9)
    locations, _ = student.predict_many(grid)

    path = tmp_path / "band.csv"
    header = ["x", "student_lo", "student_hi", "gauss_lo", "gauss_hi", "location"]
    cli.write_table(
        str(path),
        header,
        [
            [float(a), float(b), float(c), float(d), float(e), float(f)]
            for a, b, c, d, e, f in zip(
                grid[:, 0], s_lo, s_hi, g_lo, g_hi, locations
            )
        ],
    )
    got_header, rows = cli.read_table(str(path))
    assert got_header == header
    assert len(rows) == 601

    data_rows = 0
    for x, slo, shi, glo, ghi, loc in rows:
        gap = float(np.min(np.abs(FIVE_X[:, 0] - x)))
        if gap < 1e-9:
            data_rows += 1
            y = float(FIVE_Y[np.argmin(np.abs(FIVE_X[:, 0] - x))])
            assert shi - slo < 1e-6 and ghi - glo < 1e-6
            assert abs(loc - y) < 1e-6
        else:
            assert slo < glo and shi > ghi, f"containment fails at x={x}"
    assert data_rows == 5
    report("5 five-point-band-containment", "601 grid points, 5 on data")


def test_06_uniform_threshold_operator():
    """On step tails the uniform threshold operator is bitwise self-inverse
    and first-moment-preserving to 1e-12; pushed through an empirical
    uniform tail with 1e5 memberships it stays within Kolmogorov distance
    2/sqrt(M) of the uniform tail."""
    rng = np.random.default_rng(60)
    worst_moment = 0.0
    for _ in range(200):
        k = int(rng.integers(1, 9))
        knots = np.concatenate([[0.0], np.sort(rng.uniform(size=k)), [1.0]])
        values = np.sort(rng.uniform(size=k + 1))[::-1]
        from riskfield.risk import StepTail

        tail = StepTail(knots, values)
        twice = apply_L_eta(apply_L_eta(tail))
        np.testing.assert_array_equal(twice.knots, tail.knots)
        np.testing.assert_array_equal(twice.values, tail.values)
        worst_moment = max(
            worst_moment, abs(first_moment(apply_L_eta(tail)) - first_moment(tail))
        )
    assert worst_moment <= 1e-12

    m_count = 100_000
    uniform = np.random.default_rng(61).uniform(size=m_count)
    dist = RiskDistribution(MembershipSample(uniform, "uniform"))
    mapped = apply_L_eta(dist.tail())
    alphas = np.linspace(0.0, 1.0, 2001)
    kolmogorov = float(np.max(np.abs(mapped(alphas) - (1.0 - alphas))))
    assert kolmogorov <= 2.0 / math.sqrt(m_count)
    report(
        "6 uniform-operator",
        f"moment drift {worst_moment:.1e}, Kolmogorov {kolmogorov:.2e}",
    )


def test_07_zero_failure_guard():
    """A run with zero observed failures out of M = 100 memberships must
    report mean risk 1/(M+2) within 1e-12, never zero, through both the
    mixture and the single-beta baseline."""
    dist = RiskDistribution(MembershipSample(np.zeros(100), "all-safe"))
    mixture = beta_mixture_stats(dist, draws=5000, seed=0)
    baseline = beta_count_summary(100, 0)
    for mean in (mixture.mean, baseline.mean):
        assert abs(mean - 1.0 / 102.0) <= 1e-12
        assert mean > 0.0
    report("7 zero-failure-guard", f"mean {mixture.mean:.6f} = 1/102")


def test_08_convergence_study(tmp_path):
    """Desk-scale convergence study on the quadric problem, one seed,
    budgets 30..600: the surrogate-based 90% interval covers the exact
    risk at five or more of the six budgets, and its width at budget 200
    is below the direct-counting width at budget 600, inside five
    minutes."""
    start = time.monotonic()
    out = tmp_path / "convergence"
    config = tmp_path / "config.toml"
    config.write_text(
        f"""
[experiment]
seed = 7
benchmark = "quadric"
out = {str(out)!r}
"""
    )
    assert cli.main(["--config", str(config), "convergence"]) == 0
    elapsed = time.monotonic() - start
    assert elapsed < 300.0

    header, rows = cli.read_table(str(out / "convergence.csv"))
    assert header == ["method", "M", "mean", "std", "lo90", "hi90", "r_t", "covered"]
    mmc = {row[1]: row for row in rows if row[0] == "mmc"}
    bmc = {row[1]: row for row in rows if row[0] == "bmc"}
    assert sorted(mmc) == [30, 60, 100, 200, 400, 600]

    covered = sum(1 for row in mmc.values() if row[7])
    assert covered >= 5
    mmc_width_200 = mmc[200][5] - mmc[200][4]
    bmc_width_600 = bmc[600][5] - bmc[600][4]
    assert mmc_width_200 < bmc_width_600, (
        f"width at 200 evaluations {mmc_width_200} should beat the "
        f"600-sample counting width {bmc_width_600}"
    )
    report(
        "8 convergence-study",
        f"covered {covered}/6, width@200 {mmc_width_200:.4f} < "
        f"bmc width@600 {bmc_width_600:.4f}, {elapsed:.0f}s",
    )


def test_09_reproducibility_caveat_documented():
    """The README must state that the original experiment curves cannot be
    reproduced (designs and seeds unpublished) and point at the
    convergence study and property suites as the substitute evidence."""
    import pathlib

    readme = pathlib.Path(__file__).resolve().parents[1] / "README.md"
    assert readme.exists()
    text = readme.read_text().lower()
    assert "not reproducible" in text
    assert "seed" in text and "design" in text
    assert "convergence" in text
    report("9 reproducibility-caveat", "README documents the limitation")


def test_10_calibration_recovery_and_invariance():
    """Calibration on 40-point one-dimensional draws from a known kernel
    recovers the length-scale within a factor of two in at least 8 of 10
    seeds; the objective is bitwise permutation-invariant and shifts of
    the responses move it by at most 1e-8."""
    truth = KernelSpec(gamma=2.0, length_scales=(0.2,))
    hits = 0
    recovered = []
    for seed in range(10):
        train = gp_sample(seed, truth)
        result = calibrate(
            train, "student", SearchConfig(restarts=6, seed=seed, gamma=2.0)
        )
        scale = result.spec.length_scales[0]
        recovered.append(scale)
        if 0.1 <= scale <= 0.4:
            hits += 1
    assert hits >= 8, f"recovered scales {recovered}"

    train = gp_sample(3, truth)
    spec = KernelSpec(gamma=1.5, length_scales=(0.3,))
    reference = student_objective(train, spec)
    rng = np.random.default_rng(0)
    for _ in range(5):
        perm = rng.permutation(train.size)
        shuffled = TrainingSet(train.points[perm], train.responses[perm], train.box)
        assert student_objective(shuffled, spec) == reference
    shifted = TrainingSet(train.points, train.responses + 7.0, train.box)
    assert abs(student_objective(shifted, spec) - reference) <= 1e-8
    report("10 calibration-recovery", f"{hits}/10 within factor 2")


def test_11_entropy_and_proposal_separation():
    """The closed-form entropy matches numerical integration to 1e-6 in the
    heavy-tailed single-degree case, and across 100 seeded proposal rounds
    no acquired point ever collides with a training point."""

    def neg_f_log_f(z):
        f = student_t.pdf(z, df=1)
        return -f * math.log(f)

    numeric, _ = quad(neg_f_log_f, -np.inf, np.inf)
    closed = standard_student_entropy(1)
    assert abs(closed - numeric) <= 1e-6
    np.testing.assert_allclose(closed, math.log(4.0 * math.pi), rtol=1e-14)

    smallest_gap = math.inf
    for seed in range(100):
        rng = np.random.default_rng(seed)
        dim = 1 + seed % 2
        n = 5 + seed % 2
        box = np.column_stack([np.zeros(dim), np.ones(dim)])
        points = rng.uniform(size=(n, dim))
        responses = np.sin(2.0 * np.pi * points.sum(axis=1))
        train = TrainingSet(points, responses, box)
        posterior = condition_student(
            train, KernelSpec(gamma=1.5, length_scales=(0.3,) * dim)
        )
        proposal = propose_points(
            posterior, 2, search=AscentConfig(starts=8, max_iterations=60)
        )
        for point in proposal.points:
            gap = float(np.min(np.linalg.norm(train.points - point, axis=1)))
            smallest_gap = min(smallest_gap, gap)
            assert gap > 1e-9, f"seed {seed}: proposal collides with training point"
            assert gap >= 0.01 * train.box_diagonal - 1e-12
    assert smallest_gap < math.inf  # at least one proposal was produced
    report(
        "11 entropy-and-separation",
        f"entropy gap {abs(closed - numeric):.1e}, min gap {smallest_gap:.3f}",
    )
