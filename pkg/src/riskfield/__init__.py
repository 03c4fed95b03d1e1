"""Student-process surrogates and defect-risk distributions.

Condition a Gaussian or Student field on scattered evaluations of an
expensive black-box response, convert the posterior into a failure-risk
probability distribution (a beta mixture with quantified confidence), and
benchmark against closed-form reference problems.
"""

from .adaptive import (
    AscentConfig,
    DesignProposal,
    EnrichmentRecord,
    EnrichmentResult,
    enrichment_loop,
    pointwise_entropy,
    propose_points,
    standard_student_entropy,
)
from .benchmarks import (
    BellProblem,
    BenchmarkProblem,
    QuadricProblem,
    RelativeErrorStats,
    SineProblem,
    brute_force_risk,
    evaluate,
    reference_problems,
    relative_error_stats,
    theoretical_risk,
)
from .errors import (
    AllRestartsFailedError,
    ConfigError,
    DegenerateDataError,
    DimensionMismatchError,
    InvalidParametersError,
    MonotonicityViolationError,
    NotPositiveDefiniteError,
    NotSymmetricError,
    NumericalBreakdownError,
    OutOfBoxError,
    RiskfieldError,
    TooFewPointsError,
    UnsupportedDimensionError,
)
from .kernels import (
    KernelSpec,
    TrainingSet,
    correlation,
    correlation_matrix,
    correlation_vector,
    cross_correlation,
)
from .linalg import SpdFactorization, factor, solve
from .mle import (
    MleResult,
    SearchConfig,
    calibrate,
    gaussian_mle_constants,
    gaussian_objective,
    student_objective,
)
from .posterior import (
    GaussianPosterior,
    PointPrediction,
    StudentPosterior,
    condition_gaussian,
    condition_mixture_mean,
    condition_student,
    credible_band,
    mvt_logpdf,
    predict,
    student_cdf_upper,
    student_pdf,
)
from .risk import (
    BetaMixtureSummary,
    BetaSummary,
    FailureSpec,
    MembershipSample,
    RiskDistribution,
    StepTail,
    UniformBoxSampler,
    alpha_level_risk,
    apply_L_eta,
    beta_count_summary,
    beta_mixture_stats,
    bmc_baseline,
    first_moment,
    membership,
    membership_many,
    risk_distribution_mc,
)
from .sobol import scale_to_box, sobol_points

__version__ = "0.1.0"
