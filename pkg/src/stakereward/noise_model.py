"""Holistic-judge noise model and its three-term variance decomposition.

A holistic judge is modelled as scoring a response with perturbed weights
and perturbed utilities,

    score = sum_i (w_i + eta_i) * (u_i + delta_i) + eps,

where ``eta`` is zero-sum weight drift, ``delta`` per-stakeholder utility
estimation noise and ``eps`` residual noise. All utilities live on [0, 1];
conversion from the 1-10 judge scale is done with :func:`from_judge_scale`.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import ConstraintViolationError, DimensionError, DomainError
from .seeding import as_rng, child_rng

SIMPLEX_TOL = 1e-12


@dataclass(frozen=True)
class UtilityVector:
    """Latent per-stakeholder satisfactions on [0, 1]."""

    values: tuple[float, ...]

    def __post_init__(self):
        vals = tuple(float(v) for v in self.values)
        if len(vals) < 2:
            raise DomainError("a utility vector needs at least 2 stakeholders")
        if any(not (0.0 <= v <= 1.0) for v in vals):
            raise DomainError(f"utilities must lie in [0, 1], got {vals}")
        object.__setattr__(self, "values", vals)

    def __len__(self):
        return len(self.values)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.values, dtype=dtype or float)


@dataclass(frozen=True)
class WeightVector:
    """Non-negative stakeholder weights summing to one."""

    values: tuple[float, ...]

    def __post_init__(self):
        vals = tuple(float(v) for v in self.values)
        if len(vals) < 1:
            raise DomainError("empty weight vector")
        if any(v < 0 for v in vals):
            raise DomainError(f"weights must be non-negative, got {vals}")
        if abs(math.fsum(vals) - 1.0) > SIMPLEX_TOL:
            raise DomainError(f"weights must sum to 1, got sum={math.fsum(vals)!r}")
        object.__setattr__(self, "values", vals)

    @classmethod
    def uniform(cls, n: int) -> "WeightVector":
        return cls((1.0 / n,) * n)

    def __len__(self):
        return len(self.values)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.values, dtype=dtype or float)


@dataclass(frozen=True)
class NoiseSpec:
    """Standard deviations of the three noise groups.

    ``sigma_delta`` holds one entry per stakeholder; ``sigma_eta`` is the
    marginal std-dev of each drift coordinate.
    """

    sigma_delta: tuple[float, ...]
    sigma_eta: float = 0.0
    sigma_eps: float = 0.0

    def __post_init__(self):
        sd = tuple(float(s) for s in self.sigma_delta)
        object.__setattr__(self, "sigma_delta", sd)
        object.__setattr__(self, "sigma_eta", float(self.sigma_eta))
        object.__setattr__(self, "sigma_eps", float(self.sigma_eps))
        if any(s < 0 for s in sd) or self.sigma_eta < 0 or self.sigma_eps < 0:
            raise DomainError("noise standard deviations must be >= 0")

    @classmethod
    def homogeneous(cls, n: int, sigma_delta: float = 0.0, sigma_eta: float = 0.0,
                    sigma_eps: float = 0.0) -> "NoiseSpec":
        return cls((float(sigma_delta),) * n, sigma_eta, sigma_eps)

    @property
    def n(self) -> int:
        return len(self.sigma_delta)

    def scaled(self, factor: float) -> "NoiseSpec":
        return NoiseSpec(tuple(factor * s for s in self.sigma_delta),
                         factor * self.sigma_eta, factor * self.sigma_eps)


@dataclass(frozen=True)
class VarianceBreakdown:
    term_i: float
    term_ii: float
    term_iii: float
    cross: float
    total: float = field(default=float("nan"))

    def __post_init__(self):
        total = self.term_i + self.term_ii + self.term_iii + self.cross
        if math.isnan(self.total):
            object.__setattr__(self, "total", total)
        elif abs(self.total - total) > 1e-12:
            raise ConstraintViolationError("total must equal the sum of the terms")

    def as_dict(self) -> dict:
        return {"term_i": self.term_i, "term_ii": self.term_ii, "term_iii": self.term_iii,
                "cross": self.cross, "total": self.total}


@dataclass(frozen=True)
class McEstimate:
    mean: float
    variance: float
    std_error_of_variance: float
    samples: int

    def within(self, target: float, k: float = 3.0) -> bool:
        """True if ``target`` is within ``k`` standard errors of the estimate."""
        return abs(self.variance - target) <= k * self.std_error_of_variance


def to_judge_scale(x):
    """Map [0, 1] utilities to the 1-10 judge scale."""
    return 1.0 + 9.0 * np.asarray(x, dtype=float) if np.ndim(x) else 1.0 + 9.0 * float(x)


def from_judge_scale(s):
    """Map 1-10 judge scores to [0, 1]."""
    return (np.asarray(s, dtype=float) - 1.0) / 9.0 if np.ndim(s) else (float(s) - 1.0) / 9.0


def _vec(x) -> np.ndarray:
    return np.asarray(x, dtype=float).reshape(-1)


def _check_same_length(*arrays):
    lengths = {len(a) for a in arrays}
    if len(lengths) != 1:
        raise DimensionError(f"length mismatch: {[len(a) for a in arrays]}")


def true_reward(u, w) -> float:
    """Weighted welfare ``sum_i w_i u_i``."""
    u, w = _vec(u), _vec(w)
    _check_same_length(u, w)
    return math.fsum(u * w)


def sample_weight_drift(n: int, sigma_eta: float, rng, size: int | None = None) -> np.ndarray:
    """Draw exchangeable zero-sum weight drift.

    i.i.d. Gaussians with variance ``sigma_eta**2 * n / (n - 1)`` are projected
    onto the zero-sum subspace, giving marginal variance ``sigma_eta**2`` and
    pairwise covariance ``-sigma_eta**2 / (n - 1)``. Returns shape ``(n,)`` or
    ``(size, n)``.
    """
    if n < 2:
        raise DomainError("weight drift needs n >= 2")
    if sigma_eta < 0:
        raise DomainError("sigma_eta must be >= 0")
    rng = as_rng(rng)
    shape = (n,) if size is None else (size, n)
    g = rng.standard_normal(shape) * (sigma_eta * math.sqrt(n / (n - 1)))
    return g - g.mean(axis=-1, keepdims=True)


def _check_spec(u: np.ndarray, w: np.ndarray, spec: NoiseSpec):
    _check_same_length(u, w)
    if spec.n != len(u):
        raise DimensionError(f"sigma_delta has length {spec.n}, expected {len(u)}")


def sample_holistic_scores(u, w, spec: NoiseSpec, rng, size: int) -> np.ndarray:
    """Vectorised draw of ``size`` holistic scores on the [0, 1] scale.

    Draw order within one call is drift, then utility noise, then residual.
    """
    u, w = _vec(u), _vec(w)
    _check_spec(u, w, spec)
    rng = as_rng(rng)
    n = len(u)
    eta = sample_weight_drift(n, spec.sigma_eta, rng, size=size)
    delta = rng.standard_normal((size, n)) * np.asarray(spec.sigma_delta)
    eps = rng.standard_normal(size) * spec.sigma_eps
    v = u + delta
    # sum(eta) == 0, so offsetting v by its first entry leaves the drift term
    # unchanged and makes it exactly zero for constant estimates
    drift = (eta * (v - v[:, :1])).sum(axis=1)
    return true_reward(u, w) + (w * delta).sum(axis=1) + drift + eps


def sample_holistic_score(u, w, spec: NoiseSpec, rng) -> float:
    return float(sample_holistic_scores(u, w, spec, rng, 1)[0])


def exchangeable_covariance(n: int, sigma_eta: float) -> np.ndarray:
    """Covariance of exchangeable zero-sum drift, ``n/(n-1) s^2 (I - 11'/n)``."""
    if n < 2:
        raise DomainError("n must be >= 2")
    return (n / (n - 1)) * sigma_eta**2 * (np.eye(n) - np.full((n, n), 1.0 / n))


def term_ii_exchangeable(u, sigma_eta: float) -> float:
    """Aggregation variance under exchangeable zero-sum drift.

    Equals ``n/(n-1) * sigma_eta**2 * sum_i (u_i - mean(u))**2``, i.e.
    ``n**2/(n-1) * sigma_eta**2 * Var_i[u]`` with the population variance.
    """
    u = _vec(u)
    n = len(u)
    if n < 2:
        raise DomainError("term II needs n >= 2")
    c = u - u.mean()
    return (n / (n - 1)) * sigma_eta**2 * math.fsum(c * c)


def term_ii_general(u, cov_eta, tol: float = 1e-9) -> float:
    """Aggregation variance ``(u - mean(u))' C (u - mean(u))`` for any zero-sum drift covariance."""
    u = _vec(u)
    cov = np.asarray(cov_eta, dtype=float)
    n = len(u)
    if cov.shape != (n, n):
        raise DimensionError(f"covariance has shape {cov.shape}, expected {(n, n)}")
    scale = max(1.0, float(np.abs(cov).max()))
    if not np.allclose(cov, cov.T, rtol=0.0, atol=tol * scale):
        raise DomainError("drift covariance must be symmetric")
    if np.abs(cov.sum(axis=1)).max() > tol * scale:
        raise ConstraintViolationError("drift covariance rows must sum to zero")
    if np.linalg.eigvalsh(cov).min() < -tol * scale:
        raise DomainError("drift covariance must be positive semidefinite")
    c = u - u.mean()
    return float(c @ cov @ c)


def decompose_variance(u, w, spec: NoiseSpec) -> VarianceBreakdown:
    """Analytic variance of the holistic score, split into its four terms."""
    u, w = _vec(u), _vec(w)
    _check_spec(u, w, spec)
    sd2 = np.asarray(spec.sigma_delta) ** 2
    return VarianceBreakdown(
        term_i=math.fsum(w * w * sd2),
        term_ii=term_ii_exchangeable(u, spec.sigma_eta),
        term_iii=spec.sigma_eps**2,
        cross=math.fsum(spec.sigma_eta**2 * sd2),
    )


def _chunk_power_sums(u, w, spec, master_seed, chunk_index, size, center):
    x = sample_holistic_scores(u, w, spec, child_rng(master_seed, "mc", chunk_index), size) - center
    x2 = x * x
    return np.array([size, x.sum(), x2.sum(), (x2 * x).sum(), (x2 * x2).sum()])


def variance_estimate_from_power_sums(n: int, s1: float, s2: float, s3: float, s4: float,
                                      center: float = 0.0) -> McEstimate:
    """Mean, unbiased variance and its standard error from raw power sums."""
    m = s1 / n
    m2 = s2 / n - m * m
    m4 = s4 / n - 4 * m * s3 / n + 6 * m * m * s2 / n - 3 * m**4
    var = m2 * n / (n - 1)
    # Var(s^2) ~ (mu4 - (N-3)/(N-1) sigma^4) / N
    se2 = max(m4 - var * var * (n - 3) / (n - 1), 0.0) / n
    return McEstimate(mean=center + m, variance=max(var, 0.0),
                      std_error_of_variance=math.sqrt(se2), samples=int(n))


def mc_score_variance(u, w, spec: NoiseSpec, samples: int = 1_000_000, seed: int = 0,
                      chunk_size: int = 1 << 17, workers: int = 1) -> McEstimate:
    """Monte Carlo estimate of the holistic-score variance.

    Chunk ``k`` always uses the stream ``(seed, "mc", k)`` and reductions run
    in chunk order, so the result does not depend on ``workers``.
    """
    if samples < 2:
        raise DomainError("need at least 2 samples")
    u, w = _vec(u), _vec(w)
    _check_spec(u, w, spec)
    center = true_reward(u, w)
    sizes = [chunk_size] * (samples // chunk_size)
    if samples % chunk_size:
        sizes.append(samples % chunk_size)

    def run(k):
        return _chunk_power_sums(u, w, spec, seed, k, sizes[k], center)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run, range(len(sizes))))
    else:
        parts = [run(k) for k in range(len(sizes))]
    total = np.zeros(5)
    for p in parts:
        total += p
    return variance_estimate_from_power_sums(samples, *total[1:], center=center)


def random_instance(rng, n: int, max_sigma: float = 0.2):
    """Random ``(u, w, spec)`` triple for oracle checks."""
    rng = as_rng(rng)
    u = rng.uniform(0.0, 1.0, n)
    w = rng.dirichlet(np.ones(n))
    w = w / w.sum()
    spec = NoiseSpec(tuple(rng.uniform(0.0, max_sigma, n)), float(rng.uniform(0.0, max_sigma)),
                     float(rng.uniform(0.0, max_sigma)))
    return u, w, spec

