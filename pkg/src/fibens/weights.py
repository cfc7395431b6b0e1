"""Weight laws over learner indices.

A weight law assigns a nonnegative mass p(m) to each learner index
m = 1..M; normalizing gives the mixing weights of the ensemble.  The
Fibonacci law is the centerpiece; the remaining families (uniform,
geometric, gaussian, logistic, gamma, beta, pareto, lognormal) cover the
usual symmetric / skewed / heavy-tailed shapes.

All laws are evaluated directly on the integer grid m = 1..M, except the
beta family which uses u = m/(M+1) so that the mass at m = M does not
vanish identically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

PHI = (1.0 + math.sqrt(5.0)) / 2.0

#: Largest M for which phi^M / sqrt(5) stays below the double-precision range.
MAX_FIBONACCI_LENGTH = 1476

#: Fibonacci numbers are exact integers in double precision up to this index.
EXACT_FIBONACCI_LENGTH = 78

LAW_KINDS = (
    "uniform",
    "fibonacci",
    "geometric",
    "gaussian",
    "logistic",
    "gamma",
    "beta",
    "pareto",
    "lognormal",
)

# required parameter name -> positivity constraint
_LAW_PARAMS: dict[str, tuple[tuple[str, bool], ...]] = {
    "uniform": (),
    "fibonacci": (),
    "geometric": (("ratio", True),),
    "gaussian": (("mu", False), ("sigma", True)),
    "logistic": (("a", False), ("b", False)),
    "gamma": (("shape", True), ("scale", True)),
    "beta": (("alpha", True), ("beta", True)),
    "pareto": (("alpha", True),),
    "lognormal": (("mu", False), ("sigma", True)),
}


@dataclass(frozen=True)
class WeightLaw:
    """A named distribution family plus its parameters.

    ``kind`` is one of :data:`LAW_KINDS`; ``params`` holds the family's
    real parameters (e.g. ``{"mu": 2.0, "sigma": 1.0}`` for gaussian).
    """

    kind: str
    params: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        kind = self.kind.lower()
        object.__setattr__(self, "kind", kind)
        if kind not in _LAW_PARAMS:
            raise ValueError(f"unknown weight law kind: {self.kind!r}")
        required = _LAW_PARAMS[kind]
        for name, positive in required:
            if name not in self.params:
                raise ValueError(f"law {kind!r} requires parameter {name!r}")
            value = float(self.params[name])
            if not math.isfinite(value):
                raise ValueError(f"law {kind!r} parameter {name!r} must be finite")
            if positive and value <= 0.0:
                raise ValueError(f"law {kind!r} parameter {name!r} must be > 0")
        extra = set(self.params) - {name for name, _ in required}
        if extra:
            raise ValueError(f"law {kind!r} got unexpected parameters: {sorted(extra)}")

    def __getitem__(self, name: str) -> float:
        return float(self.params[name])


@dataclass(frozen=True)
class WeightVector:
    """Normalized, nonnegative weights over M learners."""

    w: np.ndarray
    M: int

    def __post_init__(self):
        w = np.asarray(self.w, dtype=np.float64)
        object.__setattr__(self, "w", w)
        if w.ndim != 1 or w.shape[0] != self.M or self.M < 1:
            raise ValueError("weight vector length must equal M >= 1")
        if not np.all(np.isfinite(w)) or np.any(w < 0.0):
            raise ValueError("weights must be finite and nonnegative")
        if abs(float(w.sum()) - 1.0) > 1e-12:
            raise ValueError("weights must sum to 1 within 1e-12")


def fibonacci_sequence(M: int) -> np.ndarray:
    """First M Fibonacci numbers F_1..F_M as doubles (F_1 = F_2 = 1).

    Computed by the recurrence in double precision; values are exact
    integers for M <= 78 and remain finite up to M = 1476.
    """
    if M < 1:
        raise ValueError("M must be >= 1")
    if M > MAX_FIBONACCI_LENGTH:
        raise ValueError(
            f"M = {M} overflows double precision (max {MAX_FIBONACCI_LENGTH})"
        )
    f = np.empty(M, dtype=np.float64)
    f[0] = 1.0
    if M > 1:
        f[1] = 1.0
    for m in range(2, M):
        f[m] = f[m - 1] + f[m - 2]
    return f


def law_values(law: WeightLaw, M: int) -> np.ndarray:
    """Unnormalized masses p(1..M) of a weight law."""
    if M < 1:
        raise ValueError("M must be >= 1")
    m = np.arange(1, M + 1, dtype=np.float64)
    kind = law.kind
    if kind == "uniform":
        p = np.ones(M)
    elif kind == "fibonacci":
        p = fibonacci_sequence(M)
    elif kind == "geometric":
        p = law["ratio"] ** m
    elif kind == "gaussian":
        mu, sigma = law["mu"], law["sigma"]
        p = np.exp(-((m - mu) ** 2) / (2.0 * sigma**2))
    elif kind == "logistic":
        a, b = law["a"], law["b"]
        p = 1.0 / (1.0 + np.exp(-a * (m - b)))
    elif kind == "gamma":
        k, theta = law["shape"], law["scale"]
        p = m ** (k - 1.0) * np.exp(-m / theta)
    elif kind == "beta":
        # evaluated at u = m/(M+1) so the mass at m = M stays positive
        alpha, beta = law["alpha"], law["beta"]
        u = m / (M + 1.0)
        p = u ** (alpha - 1.0) * (1.0 - u) ** (beta - 1.0)
    elif kind == "pareto":
        p = m ** (-law["alpha"])
    elif kind == "lognormal":
        mu, sigma = law["mu"], law["sigma"]
        p = np.exp(-((np.log(m) - mu) ** 2) / (2.0 * sigma**2)) / (
            m * sigma * math.sqrt(2.0 * math.pi)
        )
    else:  # pragma: no cover - guarded by WeightLaw validation
        raise ValueError(f"unknown weight law kind: {kind!r}")
    if not np.all(np.isfinite(p)) or np.any(p < 0.0):
        raise ValueError(f"law {kind!r} produced non-finite or negative mass at M={M}")
    return p


def weights_from_law(law: WeightLaw, M: int) -> WeightVector:
    """Normalize a law's masses into a weight vector: w_m = p(m)/sum p(j)."""
    p = law_values(law, M)
    total = float(p.sum())
    if total <= 0.0:
        raise ValueError(f"law {law.kind!r} assigns zero total mass at M={M}")
    return WeightVector(w=p / total, M=M)


def fibonacci_weights(M: int) -> WeightVector:
    return weights_from_law(WeightLaw("fibonacci"), M)


def uniform_weights(M: int) -> WeightVector:
    return weights_from_law(WeightLaw("uniform"), M)


def tail_weight(M: int, k: int) -> float:
    """Fibonacci weight of the (k+1)-th learner from the end.

    Equals F_{M-k} / (F_{M+2} - 1) since sum_{j<=M} F_j = F_{M+2} - 1.
    As M grows with k fixed this converges to phi^-(k+2).
    """
    if k < 0:
        raise ValueError("k must be nonnegative")
    if k >= M:
        raise ValueError("k must be < M")
    f = fibonacci_sequence(M + 2)
    return float(f[M - k - 1] / (f[M + 1] - 1.0))


def sum_squared_weights(w: WeightVector) -> float:
    """sum_m w_m^2; the variance multiplier of an uncorrelated aggregate."""
    return float(np.dot(w.w, w.w))


def weight_spectrum(w: WeightVector) -> np.ndarray:
    """Magnitudes of the length-M discrete Fourier transform of the weights.

    Direct O(M^2) summation; entry 0 is always 1 because the weights are
    normalized.
    """
    M = w.M
    k = np.arange(M)
    phase = np.exp(-2j * np.pi * np.outer(k, k) / M)
    return np.abs(phase @ w.w)
