"""pslab: a desk-scale numerical laboratory for Piatetski-Shapiro sequences.

Modules:
  floorpow - exact [n^c] evaluation and sequence membership
  arith    - sieved arithmetic-function tables and analytic constants
  vaaler   - sawtooth approximation kernel and Fejer majorant
  expsum   - exponential sums and empirical bound-ratio checks
  verify   - theorem-scale verification experiments
  cli      - command-line front end with reproducible CSV/JSON output
"""

from .arith import (
    EULER_GAMMA_LITERAL,
    AnalyticConstants,
    ArithKind,
    ArithTable,
    compute_constants,
    custom_table,
    dirichlet_convolve,
    g_factor,
    sieve_kfree,
    sieve_tau,
    sieve_tau_k,
)
from .errors import (
    CapacityExceeded,
    DegenerateExponents,
    DomainError,
    InsufficientPoints,
    PrecisionExhausted,
    PrecisionUnreachable,
    PSLabError,
    QuadratureNotConverged,
    TableTooSmall,
    UsageError,
)
from .expsum import (
    BoundFamily,
    BoundReport,
    CoeffMode,
    LinearSumJob,
    TripleSumJob,
    check_rs_bounds,
    check_vdc_bound,
    default_rs_sweep,
    default_vdc_sweep,
    eval_linear_sum,
    eval_triple_sum,
    perron_range_sum,
    run_rs_sweep,
    run_vdc_sweep,
)
from .floorpow import (
    DEFAULT_POLICY,
    ExponentParam,
    PrecisionPolicy,
    ceil_pow_gamma,
    floor_pow,
    floor_pow_bulk,
    ps_indicator,
    ps_membership,
    psi,
)
from .prng import Stream, bulk_floats, bulk_u64
from .vaaler import (
    VaalerKernel,
    build_kernel,
    eval_delta,
    eval_delta_grid,
    eval_psi_star,
    eval_psi_star_grid,
    weight_W,
)
from .verify import (
    DenseSetPair,
    ProductProfile,
    Thm2Adjudication,
    VerifyReport,
    build_profile,
    corollary_verify,
    count_solutions,
    fit_error_exponent,
    iter_thm1_trials,
    sample_dense_pair,
    solvable_fraction,
    stieltjes_main_term,
    sum_f_over_ps,
    thm1_experiment,
    thm2_adjudicate,
    thm2_verify,
    thm3_verify,
)

__version__ = "1.0.0"
