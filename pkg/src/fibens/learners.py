"""Base learners: random-Fourier-feature and polynomial ridge regressors.

Both families are ridge fits of a fixed 1-d feature map.  Pools hold M
fitted learners ordered by increasing complexity: RFF pools by decreasing
bandwidth (coarse to fine), polynomial pools by increasing degree.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import ridge_solve
from .rng import Stream


@dataclass(frozen=True)
class Dataset:
    """Paired 1-d inputs and targets."""

    xs: np.ndarray
    ys: np.ndarray

    def __post_init__(self):
        xs = np.asarray(self.xs, dtype=np.float64)
        ys = np.asarray(self.ys, dtype=np.float64)
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "ys", ys)
        if xs.ndim != 1 or ys.ndim != 1 or xs.shape != ys.shape or xs.size < 1:
            raise ValueError("xs and ys must be equal-length vectors, n >= 1")
        if not (np.all(np.isfinite(xs)) and np.all(np.isfinite(ys))):
            raise ValueError("dataset values must be finite")

    @property
    def n(self) -> int:
        return int(self.xs.size)


@dataclass(frozen=True)
class RffLearner:
    """Ridge fit over z_d(x) = sqrt(2/D) cos(omega_d x + b_d).

    Frequencies are drawn from Normal(0, 1/bandwidth^2), phases uniform on
    [0, 2pi); together they approximate a Gaussian kernel with lengthscale
    ``bandwidth``.
    """

    frequencies: np.ndarray
    phases: np.ndarray
    scale: float
    coefficients: np.ndarray
    bandwidth: float
    ridge_lambda: float

    def features(self, xs: np.ndarray) -> np.ndarray:
        xs = np.asarray(xs, dtype=np.float64)
        return self.scale * np.cos(np.outer(xs, self.frequencies) + self.phases)


@dataclass(frozen=True)
class PolyLearner:
    """Ridge fit over [1, u, ..., u^p] with u = (x - center)/halfwidth."""

    degree: int
    x_center: float
    x_halfwidth: float
    coefficients: np.ndarray
    ridge_lambda: float

    def features(self, xs: np.ndarray) -> np.ndarray:
        xs = np.asarray(xs, dtype=np.float64)
        u = (xs - self.x_center) / self.x_halfwidth
        return np.vander(u, self.degree + 1, increasing=True)


@dataclass(frozen=True)
class LearnerPool:
    """Ordered pool of fitted learners from a single family ('rff' or 'poly')."""

    members: tuple
    family: str

    @property
    def size(self) -> int:
        return len(self.members)


@dataclass(frozen=True)
class PoolConfig:
    """Hyperparameters shared by pool members.

    ``bandwidth_min``/``bandwidth_max`` are absolute lengthscales for the
    RFF family; ``rff_features`` is the feature count D.
    """

    ridge_lambda: float = 1e-2
    rff_features: int = 100
    bandwidth_min: float = 0.05
    bandwidth_max: float = 0.8


def predict(learner, xs) -> np.ndarray:
    """Evaluate a fitted learner at the given points."""
    xs = np.asarray(xs, dtype=np.float64)
    if xs.size == 0:
        return np.zeros(0)
    return learner.features(xs) @ learner.coefficients


def pool_predictions(pool: LearnerPool, xs) -> np.ndarray:
    """n x M matrix of member predictions (column m = member m)."""
    xs = np.asarray(xs, dtype=np.float64)
    out = np.empty((xs.size, pool.size))
    for m, learner in enumerate(pool.members):
        out[:, m] = predict(learner, xs)
    return out


def fit_rff(
    data: Dataset, D: int, bandwidth: float, lam: float, rng: Stream
) -> RffLearner:
    """Draw D random features from rng and ridge-fit their coefficients.

    Deterministic given (data, D, bandwidth, lam, rng key): frequencies
    are drawn first, then phases.
    """
    if D < 1:
        raise ValueError("D must be >= 1")
    if bandwidth <= 0.0:
        raise ValueError("bandwidth must be > 0")
    frequencies = rng.gaussians(D) / bandwidth
    phases = 2.0 * np.pi * rng.uniforms(D)
    scale = np.sqrt(2.0 / D)
    z = scale * np.cos(np.outer(data.xs, frequencies) + phases)
    coef = ridge_solve(z, data.ys, lam)
    return RffLearner(
        frequencies=frequencies,
        phases=phases,
        scale=float(scale),
        coefficients=coef,
        bandwidth=float(bandwidth),
        ridge_lambda=float(lam),
    )


def standardization(xs: np.ndarray) -> tuple[float, float]:
    """Center/halfwidth mapping the training interval onto [-1, 1]."""
    lo, hi = float(np.min(xs)), float(np.max(xs))
    if hi <= lo:
        raise ValueError("degenerate training interval: all xs equal")
    return 0.5 * (lo + hi), 0.5 * (hi - lo)


def fit_poly(
    data: Dataset,
    degree: int,
    lam: float,
    x_center: float | None = None,
    x_halfwidth: float | None = None,
) -> PolyLearner:
    """Ridge-fit a degree-p polynomial on standardized inputs.

    The standardization is taken from the training interval unless an
    explicit (center, halfwidth) pair is supplied (pools share one).
    """
    if degree < 0:
        raise ValueError("degree must be nonnegative")
    if degree > 30:
        raise ValueError("degree must be <= 30")
    if x_center is None or x_halfwidth is None:
        x_center, x_halfwidth = standardization(data.xs)
    u = (data.xs - x_center) / x_halfwidth
    x = np.vander(u, degree + 1, increasing=True)
    coef = ridge_solve(x, data.ys, lam)
    return PolyLearner(
        degree=int(degree),
        x_center=float(x_center),
        x_halfwidth=float(x_halfwidth),
        coefficients=coef,
        ridge_lambda=float(lam),
    )


def bandwidth_grid(bandwidth_min: float, bandwidth_max: float, M: int) -> np.ndarray:
    """Log-even grid of M lengthscales, descending (coarse to fine)."""
    if not (0.0 < bandwidth_min <= bandwidth_max):
        raise ValueError("need 0 < bandwidth_min <= bandwidth_max")
    if M == 1:
        return np.array([bandwidth_max])
    return np.exp(np.linspace(np.log(bandwidth_max), np.log(bandwidth_min), M))


def build_pool(
    data: Dataset, family: str, M: int, cfg: PoolConfig, rng: Stream
) -> LearnerPool:
    """Fit an ordered pool of M learners.

    RFF: one learner per grid bandwidth, independent feature draws per
    member (rng.child(m)).  Polynomial: degrees 1..M with a shared
    standardization.
    """
    if M < 1:
        raise ValueError("M must be >= 1")
    if family == "rff":
        grid = bandwidth_grid(cfg.bandwidth_min, cfg.bandwidth_max, M)
        members = tuple(
            fit_rff(data, cfg.rff_features, ell, cfg.ridge_lambda, rng.child(m))
            for m, ell in enumerate(grid)
        )
    elif family == "poly":
        center, halfwidth = standardization(data.xs)
        members = tuple(
            fit_poly(data, deg, cfg.ridge_lambda, center, halfwidth)
            for deg in range(1, M + 1)
        )
    else:
        raise ValueError(f"unknown learner family: {family!r}")
    return LearnerPool(members=members, family=family)
