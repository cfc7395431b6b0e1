"""Synthetic 1-d regression experiments.

Targets, seeded data generation, the two error metrics (test MSE against
noisy targets, grid ISE against the true function), and a Monte Carlo
harness that evaluates several aggregation schemes on shared pools and
data across independent replications.

Replication streams are derived from (seed, replication index), so
replications can run in any order, or concurrently, without changing a
single bit of the aggregate result.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .ensemble import (
    FlowWeakConfig,
    RecursionOperator,
    aggregate,
    gram,
    optimized_rb_weights,
    orthogonalize,
    recursive_flow,
)
from .learners import Dataset, PoolConfig, build_pool, pool_predictions
from .rng import Stream, derive_key
from .weights import WeightLaw, WeightVector, weights_from_law

TARGET_INTERVALS = {"sin": (0.0, 1.0), "sinc": (-3.0, 3.0)}

BUILTIN_METHODS = ("uniform", "fibonacci", "orthogonal_rb", "flow")


@dataclass(frozen=True)
class TargetSpec:
    """Regression target: sin evaluates sin(2 pi x) on [0, 1]; sinc
    evaluates sin(x)/x on [-3, 3] with value 1 at x = 0."""

    kind: str

    def __post_init__(self):
        kind = self.kind.lower()
        object.__setattr__(self, "kind", kind)
        if kind not in TARGET_INTERVALS:
            raise ValueError(f"unknown target: {self.kind!r}")

    @property
    def interval(self) -> tuple[float, float]:
        return TARGET_INTERVALS[self.kind]

    @property
    def width(self) -> float:
        lo, hi = self.interval
        return hi - lo


def eval_target(spec: TargetSpec, xs) -> np.ndarray:
    xs = np.asarray(xs, dtype=np.float64)
    if spec.kind == "sin":
        return np.sin(2.0 * np.pi * xs)
    with np.errstate(invalid="ignore"):
        out = np.where(xs == 0.0, 1.0, np.sin(xs) / np.where(xs == 0.0, 1.0, xs))
    return out


def gen_data(spec: TargetSpec, n: int, noise_sd: float, rng: Stream) -> Dataset:
    """n points with x uniform on the target interval and Gaussian noise.

    Inputs are drawn first, then the noise, so the draw layout is part of
    the reproducibility contract.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if noise_sd < 0.0:
        raise ValueError("noise_sd must be nonnegative")
    lo, hi = spec.interval
    xs = lo + (hi - lo) * rng.uniforms(n)
    ys = eval_target(spec, xs)
    if noise_sd > 0.0:
        ys = ys + noise_sd * rng.gaussians(n)
    return Dataset(xs=xs, ys=ys)


def test_mse(pred, test: Dataset) -> float:
    """(1/n) sum (yhat_i - y_i)^2 on held-out (noisy) targets."""
    if test.n < 1:
        raise ValueError("test set must be nonempty")
    err = pred.predict(test.xs) - test.ys
    return float(np.mean(err**2))


def target_grid(spec: TargetSpec, grid_points: int) -> np.ndarray:
    if grid_points < 2:
        raise ValueError("grid_points must be >= 2")
    lo, hi = spec.interval
    return np.linspace(lo, hi, grid_points)


def _trapezoid_mean(values: np.ndarray, width: float, n_points: int) -> float:
    dx = width / (n_points - 1)
    total = dx * (values.sum() - 0.5 * (values[0] + values[-1]))
    return total / width


def ise(pred, spec: TargetSpec, grid_points: int) -> float:
    """Integrated squared error against the true (noise-free) function.

    Trapezoid rule of (fhat - f)^2 on a uniform grid, normalized by the
    interval width, i.e. the mean squared error under the uniform measure
    on the interval (matching the scale of test MSE minus its noise
    floor).
    """
    xs = target_grid(spec, grid_points)
    err = pred.predict(xs) - eval_target(spec, xs)
    return _trapezoid_mean(err**2, spec.width, grid_points)


def grid_scores(fit: np.ndarray, truth: np.ndarray, spec: TargetSpec) -> float:
    """ISE from precomputed grid predictions (same rule as :func:`ise`)."""
    err = fit - truth
    return _trapezoid_mean(err**2, spec.width, fit.size)


# ---------------------------------------------------------------------------
# Experiment configuration and harness
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ExperimentConfig:
    """Full description of one Monte Carlo experiment.

    ``methods`` entries are either builtin names ("uniform", "fibonacci",
    "orthogonal_rb", "flow") or :class:`WeightLaw` instances, which
    aggregate the raw pool under that law (reported as ``law_<kind>``).
    ``bandwidth_min``/``bandwidth_max`` are fractions of the target
    interval width.
    """

    target: TargetSpec = field(default_factory=lambda: TargetSpec("sin"))
    family: str = "rff"
    m_learners: int = 10
    n_train: int = 200
    n_test: int = 1000
    noise_sd: float = 0.3
    replications: int = 50
    seed: int = 42
    grid_points: int = 2001
    methods: tuple = ("uniform", "fibonacci", "orthogonal_rb")
    ridge_lambda: float = 1e-2
    rff_features: int = 100
    bandwidth_min: float = 0.05
    bandwidth_max: float = 0.8
    max_degree: int = 30
    beta: float = 0.7
    gamma: float = 0.25

    def __post_init__(self):
        if self.replications < 1:
            raise ValueError("replications must be >= 1")
        if self.grid_points < 2:
            raise ValueError("grid_points must be >= 2")
        if self.noise_sd < 0.0:
            raise ValueError("noise_sd must be >= 0")
        if self.m_learners < 1:
            raise ValueError("m_learners must be >= 1")
        if self.family not in ("rff", "poly"):
            raise ValueError(f"unknown learner family: {self.family!r}")
        if self.family == "poly" and self.m_learners > self.max_degree:
            raise ValueError(
                f"m_learners = {self.m_learners} exceeds max_degree = {self.max_degree}"
            )
        for method in self.methods:
            if not isinstance(method, WeightLaw) and method not in BUILTIN_METHODS:
                raise ValueError(f"unknown method: {method!r}")
        if "flow" in self.methods and self.m_learners < 3:
            raise ValueError("the flow method needs m_learners >= 3")
        if len(self.methods) != len(set(self.method_names())):
            raise ValueError("duplicate method names in config")

    def method_names(self) -> tuple[str, ...]:
        return tuple(
            f"law_{m.kind}" if isinstance(m, WeightLaw) else m for m in self.methods
        )

    def pool_config(self) -> PoolConfig:
        width = self.target.width
        return PoolConfig(
            ridge_lambda=self.ridge_lambda,
            rff_features=self.rff_features,
            bandwidth_min=self.bandwidth_min * width,
            bandwidth_max=self.bandwidth_max * width,
        )

    def flow_config(self) -> FlowWeakConfig:
        width = self.target.width
        return FlowWeakConfig(
            family=self.family,
            ridge_lambda=self.ridge_lambda,
            degree=3,
            rff_features=self.rff_features,
            bandwidth_min=self.bandwidth_min * width,
            bandwidth_max=self.bandwidth_max * width,
        )


@dataclass(frozen=True)
class MethodScores:
    test_mse: float
    ise: float


@dataclass(frozen=True)
class MethodSummary:
    mean_test_mse: float
    sd_test_mse: float
    mean_ise: float
    sd_ise: float


@dataclass(frozen=True)
class ExperimentResult:
    methods: dict[str, MethodSummary]
    replications: int
    config: ExperimentConfig


def _replication_streams(cfg: ExperimentConfig, rep_index: int):
    """Independent streams for (train, test, pool, flow) of one replication."""
    rep_key = derive_key(cfg.seed, rep_index)
    root = Stream(rep_key)
    return root.child(0), root.child(1), root.child(2), root.child(3)


def _method_weights(method, cfg: ExperimentConfig) -> WeightVector:
    if isinstance(method, WeightLaw):
        return weights_from_law(method, cfg.m_learners)
    return weights_from_law(WeightLaw(method), cfg.m_learners)


def _replication_parts(cfg: ExperimentConfig, rep_index: int):
    """Shared per-replication state: data, pool, and per-method predictors.

    Returns (train, test, pool, predictors) where predictors maps method
    name to an object with .predict(xs).
    """
    if rep_index < 0 or rep_index >= cfg.replications:
        raise ValueError("rep_index must lie in [0, replications)")
    train_rng, test_rng, pool_rng, flow_rng = _replication_streams(cfg, rep_index)
    train = gen_data(cfg.target, cfg.n_train, cfg.noise_sd, train_rng)
    test = gen_data(cfg.target, cfg.n_test, cfg.noise_sd, test_rng)
    pool = build_pool(train, cfg.family, cfg.m_learners, cfg.pool_config(), pool_rng)

    predictors = {}
    names = cfg.method_names()
    for method, name in zip(cfg.methods, names):
        if method == "orthogonal_rb":
            g = gram(pool, train.xs)
            mixing = orthogonalize(pool, g)
            w = optimized_rb_weights(pool, mixing, train)
            predictors[name] = aggregate(pool, w, mixing)
        elif method == "flow":
            predictors[name] = recursive_flow(
                train,
                RecursionOperator(cfg.beta, cfg.gamma),
                cfg.m_learners,
                cfg.flow_config(),
                flow_rng,
            )
        else:
            predictors[name] = aggregate(pool, _method_weights(method, cfg))
    return train, test, pool, predictors


def run_replication(cfg: ExperimentConfig, rep_index: int) -> dict[str, MethodScores]:
    """Scores of every requested method on one replication's shared data.

    The pool prediction matrices are computed once per dataset and reused
    across the weighted methods.
    """
    train, test, pool, predictors = _replication_parts(cfg, rep_index)
    grid = target_grid(cfg.target, cfg.grid_points)
    truth = eval_target(cfg.target, grid)
    h_test = pool_predictions(pool, test.xs)
    h_grid = pool_predictions(pool, grid)

    scores = {}
    for name, predictor in predictors.items():
        if hasattr(predictor, "learner_space_weights"):
            a = predictor.learner_space_weights
            fit_test = h_test @ a
            fit_grid = h_grid @ a
        else:
            fit_test = predictor.predict(test.xs)
            fit_grid = predictor.predict(grid)
        mse = float(np.mean((fit_test - test.ys) ** 2))
        scores[name] = MethodScores(
            test_mse=mse, ise=grid_scores(fit_grid, truth, cfg.target)
        )
    return scores


def aggregate_records(
    cfg: ExperimentConfig, records: dict[int, dict[str, MethodScores]]
) -> ExperimentResult:
    """Fold per-replication records (keyed by index) into mean/sd summaries.

    The fold always walks indices 0..replications-1, so the execution
    order that produced the records cannot affect the result.
    """
    if sorted(records) != list(range(cfg.replications)):
        raise ValueError("records must cover every replication index exactly once")
    summaries = {}
    for name in cfg.method_names():
        mses = np.array([records[i][name].test_mse for i in range(cfg.replications)])
        ises = np.array([records[i][name].ise for i in range(cfg.replications)])
        summaries[name] = MethodSummary(
            mean_test_mse=float(mses.mean()),
            sd_test_mse=_sd(mses),
            mean_ise=float(ises.mean()),
            sd_ise=_sd(ises),
        )
    return ExperimentResult(
        methods=summaries, replications=cfg.replications, config=cfg
    )


def _sd(values: np.ndarray) -> float:
    """Unbiased (n-1) standard deviation; 0 by convention for one sample."""
    if values.size < 2:
        return 0.0
    return float(values.std(ddof=1))


def run_experiment(cfg: ExperimentConfig, map_fn=map) -> ExperimentResult:
    """Run all replications (optionally through a parallel map) and
    aggregate them in index order."""
    indices = range(cfg.replications)
    records = dict(zip(indices, map_fn(lambda i: run_replication(cfg, i), indices)))
    return aggregate_records(cfg, records)


@dataclass(frozen=True)
class CurveTable:
    """Grid fits of every method for one replication, plus the noisy
    training points: enough to redraw the experiment's figure."""

    x: np.ndarray
    f_true: np.ndarray
    fits: dict[str, np.ndarray]
    train_xs: np.ndarray
    train_ys: np.ndarray


def emit_curves(cfg: ExperimentConfig, rep_index: int) -> CurveTable:
    train, _, pool, predictors = _replication_parts(cfg, rep_index)
    grid = target_grid(cfg.target, cfg.grid_points)
    h_grid = pool_predictions(pool, grid)
    fits = {}
    for name, predictor in predictors.items():
        if hasattr(predictor, "learner_space_weights"):
            fits[name] = h_grid @ predictor.learner_space_weights
        else:
            fits[name] = predictor.predict(grid)
    return CurveTable(
        x=grid,
        f_true=eval_target(cfg.target, grid),
        fits=fits,
        train_xs=train.xs,
        train_ys=train.ys,
    )


def with_seed(cfg: ExperimentConfig, seed: int) -> ExperimentConfig:
    return replace(cfg, seed=seed)
