"""Group-relative advantage noise: gaps, SNR and sign correctness.

For a group of G candidates with true rewards R*_j and i.i.d. Gaussian judge
errors of std-dev sigma_xi, the centered error of each candidate has variance
sigma_xi**2 * (1 - 1/G), and a candidate one gap-standard-deviation away from
the group mean keeps its advantage sign with probability

    Phi( sqrt(SNR) / sqrt(1 - 1/G) ),   SNR = Var_j[gap_j] / sigma_xi**2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import DomainError, NotApplicableError
from .seeding import as_rng, child_rng

DEFAULT_SNR_GRID = (0.5, 1.0, 1.5, 2.0, 3.0, 4.0)


def normal_cdf(x: float) -> float:
    return 0.5 * math.erfc(-x / math.sqrt(2.0))


@dataclass(frozen=True)
class GroupSample:
    true_rewards: tuple[float, ...]
    sigma_xi: float

    def __post_init__(self):
        object.__setattr__(self, "true_rewards", tuple(float(r) for r in self.true_rewards))
        if len(self.true_rewards) < 2:
            raise DomainError("a group needs G >= 2 responses")
        if self.sigma_xi < 0:
            raise DomainError("sigma_xi must be >= 0")

    @property
    def G(self) -> int:
        return len(self.true_rewards)

    @classmethod
    def with_gap_variance(cls, G: int, gap_variance: float, sigma_xi: float = 1.0) -> "GroupSample":
        """Evenly spaced rewards rescaled to the requested gap variance."""
        if G < 2:
            raise DomainError("G must be >= 2")
        base = np.arange(G, dtype=float)
        base = (base - base.mean()) / base.std()
        return cls(tuple(math.sqrt(gap_variance) * base), sigma_xi)


@dataclass(frozen=True)
class SignReport:
    snr: float
    predicted_p: float
    empirical_p: float
    trials: int
    centered_noise_var: float


def group_gaps(rewards: Sequence[float], standardize: bool = False, eps: float = 0.0) -> np.ndarray:
    """Rewards minus the group mean, optionally divided by the group std."""
    r = np.asarray(rewards, dtype=float)
    if r.ndim != 1 or len(r) < 2:
        raise DomainError("group needs G >= 2 rewards")
    gaps = r - r.mean()
    if standardize:
        gaps = gaps / (r.std() + eps)
    return gaps


def centered_noise_variance(sigma_xi: float, G: int) -> float:
    if G < 2:
        raise DomainError("G must be >= 2")
    return sigma_xi**2 * (1.0 - 1.0 / G)


def snr(true_rewards: Sequence[float], sigma_xi: float) -> float:
    gaps = group_gaps(true_rewards)
    var = float(np.mean(gaps * gaps))
    if sigma_xi == 0:
        return math.inf
    return var / sigma_xi**2


def predicted_sign_correctness(snr_value: float, G: int) -> float:
    if snr_value < 0:
        raise DomainError("SNR must be >= 0")
    if G < 2:
        raise DomainError("G must be >= 2")
    if math.isinf(snr_value):
        return 1.0
    return normal_cdf(math.sqrt(snr_value) / math.sqrt(1.0 - 1.0 / G))


def empirical_sign_correctness(group: GroupSample, ref_gap: float | None = None,
                               trials: int = 100_000, rng=None, chunk: int = 1 << 16) -> float:
    """Monte Carlo probability that the reference response keeps its advantage sign.

    The reference response replaces the first group member and its true
    reward is set so that its gap from the new group mean is exactly
    ``ref_gap`` (default: one gap standard deviation of ``group``). Every
    trial draws fresh judge noise for all G responses and re-centers.
    """
    if trials < 1:
        raise DomainError("trials must be >= 1")
    G = group.G
    if ref_gap is None:
        ref_gap = math.sqrt(float(np.var(group_gaps(group.true_rewards))))
    if ref_gap == 0:
        raise NotApplicableError("reference gap of 0 has no sign")
    others = np.asarray(group.true_rewards[1:])
    r_ref = (G * ref_gap + others.sum()) / (G - 1)
    rewards = np.concatenate([[r_ref], others])
    if group.sigma_xi == 0:
        return 1.0
    rng = as_rng(rng)
    correct = 0
    done = 0
    sign = math.copysign(1.0, ref_gap)
    while done < trials:
        m = min(chunk, trials - done)
        noisy = rewards + group.sigma_xi * rng.standard_normal((m, G))
        ref_hat = noisy[:, 0] - noisy.mean(axis=1)
        correct += int(np.count_nonzero(ref_hat * sign > 0))
        done += m
    return correct / trials


def sign_report(group: GroupSample, trials: int = 100_000, rng=None) -> SignReport:
    s = snr(group.true_rewards, group.sigma_xi)
    return SignReport(
        snr=s,
        predicted_p=predicted_sign_correctness(s, group.G),
        empirical_p=empirical_sign_correctness(group, trials=trials, rng=rng),
        trials=trials,
        centered_noise_var=centered_noise_variance(group.sigma_xi, group.G),
    )


def mc_centered_noise_variance(sigma_xi: float, G: int, groups: int, rng=None, chunk: int = 1 << 16):
    """Sample variance of centered noise pooled over ``groups`` groups.

    Returns ``(variance, std_error)``. Only the first member of each group
    is used, so the samples are independent.
    """
    rng = as_rng(rng)
    vals = []
    done = 0
    while done < groups:
        m = min(chunk, groups - done)
        xi = sigma_xi * rng.standard_normal((m, G))
        vals.append(xi[:, 0] - xi.mean(axis=1))
        done += m
    z = np.concatenate(vals)
    var = float(z.var(ddof=1))
    m4 = float(np.mean((z - z.mean()) ** 4))
    se = math.sqrt(max(m4 - var * var * (groups - 3) / (groups - 1), 0.0) / groups)
    return var, se


def conditional_snr(n: int, gap_variance: float, sigma_eta2: float, u_dispersion: float) -> float:
    """SNR when aggregation noise dominates: ``(n-1) Var[gap] / (n^2 s_eta^2(n) Var_i[u])``."""
    if n < 2:
        raise DomainError("n must be >= 2")
    denom = n * n * sigma_eta2 * u_dispersion
    if denom == 0:
        return math.inf
    return (n - 1) * gap_variance / denom


def snr_scaling_sweep(n_values: Iterable[int], sigma_eta_fn: Callable[[int], float] | float = 1.0,
                      u_dispersion: float = 1.0, gap_variance: float = 1.0, G: int = 8):
    """Rows ``(n, snr, predicted_p)`` of the conditional SNR law.

    ``sigma_eta_fn`` maps n to the drift variance sigma_eta**2(n); a number
    means a constant.
    """
    fn = sigma_eta_fn if callable(sigma_eta_fn) else (lambda n, c=float(sigma_eta_fn): c)
    rows = []
    for n in n_values:
        s = conditional_snr(int(n), gap_variance, fn(int(n)), u_dispersion)
        rows.append((int(n), s, predicted_sign_correctness(s, G)))
    return rows


def thresholds_table(G: int = 8, snr_values: Sequence[float] = DEFAULT_SNR_GRID, trials: int = 0,
                     seed: int = 0, sigma_xi: float = 1.0):
    """Rows ``(snr, predicted, empirical)``; ``empirical`` is nan if ``trials`` is 0 or SNR is 0."""
    rows = []
    for k, s in enumerate(snr_values):
        pred = predicted_sign_correctness(s, G)
        emp = math.nan
        if trials and s > 0:
            grp = GroupSample.with_gap_variance(G, s * sigma_xi**2, sigma_xi)
            emp = empirical_sign_correctness(grp, trials=trials, rng=child_rng(seed, "sign", k))
        rows.append((float(s), pred, emp))
    return rows
