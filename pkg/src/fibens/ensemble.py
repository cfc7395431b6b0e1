"""Aggregation machinery: Gram whitening, weighted ensembles, optimized
and oracle weights, the second-order recursive flow, and its spectral
stability analysis.

An ensemble predictor is a weighted combination of pool members, with an
optional M x M mixing matrix (the regularized Gram inverse square root)
applied to the member predictions first.  The recursive flow instead
builds predictors by the two-term recurrence
F_m = beta F_{m-1} + gamma F_{m-2} + h_{m-1} with residual-fitted h's.
"""

from __future__ import annotations

import cmath
import warnings
from dataclasses import dataclass

import numpy as np

from .learners import (
    Dataset,
    LearnerPool,
    PoolConfig,
    bandwidth_grid,
    fit_poly,
    fit_rff,
    pool_predictions,
    predict,
    standardization,
)
from .linalg import inv_sqrt_psd, sym_eig
from .rng import Stream
from .weights import WeightVector

DEFAULT_EIG_FLOOR_RATIO = 1e-8


@dataclass(frozen=True)
class GramMatrix:
    """Empirical M x M inner-product matrix of pool predictions."""

    G: np.ndarray
    n_samples: int


@dataclass(frozen=True)
class EnsemblePredictor:
    """Weighted (optionally whitened) combination of pool members."""

    pool: LearnerPool
    weights: WeightVector
    mixing: np.ndarray | None = None

    @property
    def learner_space_weights(self) -> np.ndarray:
        """Coefficients a with prediction = sum_m a_m h_m; a = W^T w under mixing."""
        if self.mixing is None:
            return self.weights.w
        return self.mixing.T @ self.weights.w

    def predict(self, xs) -> np.ndarray:
        return pool_predictions(self.pool, xs) @ self.learner_space_weights


def gram(pool: LearnerPool, xs) -> GramMatrix:
    """G_{m,m'} = (1/n) sum_i h_m(x_i) h_{m'}(x_i), symmetrized exactly."""
    xs = np.asarray(xs, dtype=np.float64)
    if xs.size == 0:
        raise ValueError("cannot form a Gram matrix from an empty sample")
    if xs.size < pool.size:
        warnings.warn(
            f"Gram sample size {xs.size} is below pool size {pool.size}; "
            "the matrix is rank-deficient",
            RuntimeWarning,
            stacklevel=2,
        )
    h = pool_predictions(pool, xs)
    g = (h.T @ h) / xs.size
    return GramMatrix(G=0.5 * (g + g.T), n_samples=int(xs.size))


def orthogonalize(
    pool: LearnerPool, G: GramMatrix, eig_floor: float | None = None
) -> np.ndarray:
    """Mixing matrix W = G_reg^{-1/2} that whitens the pool empirically.

    With eig_floor omitted it defaults to 1e-8 * lambda_max(G), which lets
    pools with duplicated members pass through (their null directions are
    floored instead of inverted).
    """
    if eig_floor is None:
        lam_max = float(sym_eig(G.G).eigenvalues[0])
        if lam_max <= 0.0:
            raise ValueError("Gram matrix has no positive eigenvalue")
        eig_floor = DEFAULT_EIG_FLOOR_RATIO * lam_max
    return inv_sqrt_psd(G.G, eig_floor)


def aggregate(
    pool: LearnerPool, weights: WeightVector, mixing: np.ndarray | None = None
) -> EnsemblePredictor:
    """Weighted ensemble of the pool; pass the whitening matrix for the
    orthogonalized (Rao-Blackwell) variant."""
    if weights.M != pool.size:
        raise ValueError(
            f"weight count {weights.M} does not match pool size {pool.size}"
        )
    if mixing is not None:
        mixing = np.asarray(mixing, dtype=np.float64)
        if mixing.shape != (pool.size, pool.size):
            raise ValueError("mixing matrix must be M x M")
    return EnsemblePredictor(pool=pool, weights=weights, mixing=mixing)


def project_to_simplex(v: np.ndarray) -> np.ndarray:
    """Euclidean projection onto {w : w >= 0, sum w = 1} (sort algorithm)."""
    u = np.sort(v)[::-1]
    css = (np.cumsum(u) - 1.0) / np.arange(1, v.size + 1)
    k = np.nonzero(u > css)[0][-1]
    return np.maximum(v - css[k], 0.0)


def optimized_rb_weights(
    pool: LearnerPool,
    mixing: np.ndarray,
    data: Dataset,
    max_iters: int = 500,
    tol: float = 1e-10,
) -> WeightVector:
    """Simplex-constrained least-squares weights for the whitened pool.

    Minimizes sum_i (y_i - sum_m w_m htilde_m(x_i))^2 over the probability
    simplex by projected gradient descent with step 1/L, L the largest
    eigenvalue of the objective Hessian.  Deterministic: starts from
    uniform weights, runs until the projected-gradient residual falls
    below tol or max_iters is hit.
    """
    M = pool.size
    if M == 1:
        return WeightVector(w=np.ones(1), M=1)
    h = pool_predictions(pool, data.xs) @ np.asarray(mixing, dtype=np.float64).T
    q = h.T @ h
    q = 0.5 * (q + q.T)
    b = h.T @ data.ys
    lam_max = float(sym_eig(q).eigenvalues[0])
    step = 1.0 / (2.0 * lam_max) if lam_max > 0.0 else 1.0
    w = np.full(M, 1.0 / M)
    for _ in range(max_iters):
        grad = 2.0 * (q @ w - b)
        w_next = project_to_simplex(w - step * grad)
        if float(np.linalg.norm(w_next - w)) <= tol:
            w = w_next
            break
        w = w_next
    w = np.maximum(w, 0.0)
    w /= w.sum()
    return WeightVector(w=w, M=M)


def oracle_rb_weights(tau_sq) -> WeightVector:
    """Inverse-variance weights w_m = tau_m^-2 / sum_j tau_j^-2."""
    tau_sq = np.asarray(tau_sq, dtype=np.float64)
    if tau_sq.ndim != 1 or tau_sq.size < 1:
        raise ValueError("tau_sq must be a nonempty vector")
    if np.any(tau_sq <= 0.0) or not np.all(np.isfinite(tau_sq)):
        raise ValueError("all tau^2 must be positive and finite")
    inv = 1.0 / tau_sq
    return WeightVector(w=inv / inv.sum(), M=int(tau_sq.size))


def risk_orthonormal(w: WeightVector, theta, tau_sq, n: int) -> float:
    """Analytic risk sum_m ((w_m - 1)^2 theta_m^2 + w_m^2 tau_m^2 / n)
    of coordinate-wise shrinkage over an orthonormal basis."""
    theta = np.asarray(theta, dtype=np.float64)
    tau_sq = np.asarray(tau_sq, dtype=np.float64)
    if theta.shape != (w.M,) or tau_sq.shape != (w.M,):
        raise ValueError("w, theta and tau_sq must have equal lengths")
    if n < 1:
        raise ValueError("n must be >= 1")
    return float(np.sum((w.w - 1.0) ** 2 * theta**2 + w.w**2 * tau_sq / n))


def variance_of_weighted(w: WeightVector, sigma, rho) -> float:
    """Variance of the weighted sum given member sds and correlations."""
    sigma = np.asarray(sigma, dtype=np.float64)
    rho = np.asarray(rho, dtype=np.float64)
    if sigma.shape != (w.M,) or rho.shape != (w.M, w.M):
        raise ValueError("sigma must be length M and rho M x M")
    if np.any(sigma <= 0.0):
        raise ValueError("sigmas must be positive")
    if (
        not np.allclose(rho, rho.T, atol=1e-12)
        or not np.allclose(np.diag(rho), 1.0, atol=1e-12)
        or np.any(np.abs(rho) > 1.0 + 1e-12)
    ):
        raise ValueError("rho must be symmetric with unit diagonal, entries in [-1,1]")
    ws = w.w * sigma
    return float(ws @ rho @ ws)


# ---------------------------------------------------------------------------
# Second-order recursive flow
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RecursionOperator:
    """Homogeneous part of F_m = beta F_{m-1} + gamma F_{m-2} + forcing."""

    beta: float
    gamma: float


def recursion_eigenvalues(op: RecursionOperator) -> tuple[complex, complex]:
    """Both roots of lambda^2 - beta lambda - gamma = 0 (lambda+, lambda-)."""
    disc = cmath.sqrt(op.beta * op.beta + 4.0 * op.gamma)
    return ((op.beta + disc) / 2.0, (op.beta - disc) / 2.0)


def spectral_radius(op: RecursionOperator) -> float:
    lam_p, lam_m = recursion_eigenvalues(op)
    return max(abs(lam_p), abs(lam_m))


def is_stable(op: RecursionOperator) -> tuple[bool, float]:
    """(stable, spectral radius): stable iff max |lambda| < 1.

    Decided from the computed roots, not from the textbook inequality
    beta^2 + 4 gamma < 4, which disagrees with the roots on part of the
    parameter plane (e.g. beta = 1.9, gamma = 0.05).
    """
    rho = spectral_radius(op)
    return rho < 1.0, rho


@dataclass(frozen=True)
class StabilityReport:
    """Roots plus both stability verdicts (they can disagree)."""

    eigenvalues: tuple[complex, complex]
    spectral_radius: float
    spectral_stable: bool
    inequality_stable: bool


def stability_report(op: RecursionOperator) -> StabilityReport:
    lams = recursion_eigenvalues(op)
    rho = max(abs(lams[0]), abs(lams[1]))
    return StabilityReport(
        eigenvalues=lams,
        spectral_radius=rho,
        spectral_stable=rho < 1.0,
        inequality_stable=op.beta**2 + 4.0 * op.gamma < 4.0,
    )


@dataclass(frozen=True)
class FlowPredictor:
    """Final state of the recursive flow.

    ``coeffs`` holds one row per stage: row m-1 expresses F_m as a linear
    combination of the basis (F_1, F_2, h_2, ..., h_{M-1}), satisfying
    c^(m) = beta c^(m-1) + gamma c^(m-2) + e_{m-1}.
    """

    initial: tuple
    weak_learners: tuple
    beta: float
    gamma: float
    coeffs: np.ndarray

    @property
    def stages(self) -> int:
        return self.coeffs.shape[0]

    def _basis_predictions(self, xs) -> np.ndarray:
        xs = np.asarray(xs, dtype=np.float64)
        basis = list(self.initial) + list(self.weak_learners)
        out = np.empty((xs.size, len(basis)))
        for j, learner in enumerate(basis):
            out[:, j] = predict(learner, xs)
        return out

    def predict(self, xs) -> np.ndarray:
        return self._basis_predictions(xs) @ self.coeffs[-1]


@dataclass(frozen=True)
class FlowWeakConfig:
    """Residual-learner family for the flow: same family as the pool,
    fixed small capacity (degree 3 / mid-grid bandwidth)."""

    family: str = "poly"
    ridge_lambda: float = 1e-2
    degree: int = 3
    rff_features: int = 100
    bandwidth_min: float = 0.05
    bandwidth_max: float = 0.8

    @property
    def mid_bandwidth(self) -> float:
        grid = bandwidth_grid(self.bandwidth_min, self.bandwidth_max, 3)
        return float(grid[1])


def flow_coefficients(beta: float, gamma: float, stages: int) -> np.ndarray:
    """Stage-by-stage coefficient vectors of the flow recurrence.

    Row m-1 is c^(m) over the basis (F_1, F_2, h_2, ..., h_{M-1});
    c^(1) = e_0, c^(2) = e_1, and each later stage adds a unit at the
    newly fitted learner's slot.
    """
    if stages < 2:
        raise ValueError("the flow needs at least 2 stages")
    coeffs = np.zeros((stages, stages))
    coeffs[0, 0] = 1.0
    coeffs[1, 1] = 1.0
    for m in range(3, stages + 1):
        coeffs[m - 1] = beta * coeffs[m - 2] + gamma * coeffs[m - 3]
        coeffs[m - 1, m - 1] += 1.0
    return coeffs


def recursive_flow(
    data: Dataset,
    op: RecursionOperator,
    M: int,
    weak_cfg: FlowWeakConfig,
    rng: Stream,
) -> FlowPredictor:
    """Run the second-order flow for M stages and return F_M.

    F_1 is the intercept-only fit (mean of y); F_2 is the simplest pool
    member of the family (degree-1 polynomial or coarsest-bandwidth RFF).
    At stage m the residual y - F_{m-1}(x) is fitted by a fixed-capacity
    weak learner h_{m-1} and F_m = beta F_{m-1} + gamma F_{m-2} + h_{m-1}.
    """
    if M < 3:
        raise ValueError("M must be >= 3")
    center, halfwidth = standardization(data.xs)
    f1 = fit_poly(data, 0, 0.0, center, halfwidth)
    if weak_cfg.family == "poly":
        f2 = fit_poly(data, 1, weak_cfg.ridge_lambda, center, halfwidth)
    elif weak_cfg.family == "rff":
        f2 = fit_rff(
            data,
            weak_cfg.rff_features,
            weak_cfg.bandwidth_max,
            weak_cfg.ridge_lambda,
            rng.child(0),
        )
    else:
        raise ValueError(f"unknown learner family: {weak_cfg.family!r}")

    coeffs = flow_coefficients(op.beta, op.gamma, M)
    f_prev2 = predict(f1, data.xs)
    f_prev = predict(f2, data.xs)
    weak = []
    for m in range(3, M + 1):
        res_data = Dataset(xs=data.xs, ys=data.ys - f_prev)
        if weak_cfg.family == "poly":
            h = fit_poly(res_data, weak_cfg.degree, weak_cfg.ridge_lambda, center, halfwidth)
        else:
            h = fit_rff(
                res_data,
                weak_cfg.rff_features,
                weak_cfg.mid_bandwidth,
                weak_cfg.ridge_lambda,
                rng.child(m),
            )
        weak.append(h)
        f_new = op.beta * f_prev + op.gamma * f_prev2 + predict(h, data.xs)
        f_prev2, f_prev = f_prev, f_new
    return FlowPredictor(
        initial=(f1, f2),
        weak_learners=tuple(weak),
        beta=float(op.beta),
        gamma=float(op.gamma),
        coeffs=coeffs,
    )
