"""fibens: structured ensemble weighting for one-dimensional regression.

Fibonacci and general distribution-law weights, Gram-matrix whitening
with weighted aggregation, a second-order recursive ensemble flow with
spectral stability analysis, and a reproducible Monte Carlo harness.
"""

from .ensemble import (
    EnsemblePredictor,
    FlowPredictor,
    FlowWeakConfig,
    GramMatrix,
    RecursionOperator,
    StabilityReport,
    aggregate,
    gram,
    is_stable,
    oracle_rb_weights,
    optimized_rb_weights,
    orthogonalize,
    recursion_eigenvalues,
    recursive_flow,
    risk_orthonormal,
    spectral_radius,
    stability_report,
    variance_of_weighted,
)
from .experiments import (
    CurveTable,
    ExperimentConfig,
    ExperimentResult,
    TargetSpec,
    emit_curves,
    eval_target,
    gen_data,
    ise,
    run_experiment,
    run_replication,
    test_mse,
)
from .learners import (
    Dataset,
    LearnerPool,
    PolyLearner,
    PoolConfig,
    RffLearner,
    build_pool,
    fit_poly,
    fit_rff,
    pool_predictions,
    predict,
)
from .linalg import NumericalError, inv_sqrt_psd, ridge_solve, sym_eig
from .rng import Stream, derive_key, mix64
from .weights import (
    PHI,
    WeightLaw,
    WeightVector,
    fibonacci_sequence,
    fibonacci_weights,
    sum_squared_weights,
    tail_weight,
    uniform_weights,
    weight_spectrum,
    weights_from_law,
)

__version__ = "0.1.0"
