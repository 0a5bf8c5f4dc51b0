"""Synthetic judges for the five scoring protocols.

Each judge reads a latent plan state (true utilities, rubric-dimension
quality, checklist truth) and returns a score on the 1-10 scale. Noise has
two sources:

* a *repeat* stream (the ``rng`` argument): fresh randomness per call, the
  analogue of sampling temperature, scaled by ``repeat_scale``;
* a *presentation* stream keyed by ``(unit_seed, presentation_seed)``: the
  same surface variant always gets the same draw, scaled by the
  presentation sensitivity ``kappa``.

With ``repeat_scale=0`` and ``kappa>0`` a judge is deterministic on repeats
but still varies across presentation variants.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DimensionError, DomainError
from .noise_model import NoiseSpec, WeightVector
from .seeding import as_rng, child_rng

RUBRIC_WEIGHTS = (0.30, 0.25, 0.20, 0.15, 0.10)
RUBRIC_DIMENSIONS = (
    "constraint_satisfaction",
    "information_credibility",
    "timeline_feasibility",
    "fairness",
    "conflict_resolution",
)
CHECKLIST_CATEGORY_WEIGHTS = {"A": 2.5, "B": 2.0, "C": 1.5, "D": 1.5, "E": 1.0}
ITEMS_PER_STAKEHOLDER = 3


@dataclass(frozen=True)
class ChecklistItem:
    category: str
    weight: float
    truth: bool
    stakeholder: int | None = None

    def __post_init__(self):
        if not self.weight > 0:
            raise DomainError("checklist item weight must be > 0")


@dataclass(frozen=True)
class LatentPlanState:
    utilities: tuple[float, ...]
    weights: tuple[float, ...] = ()
    dimension_quality: tuple[float, ...] = (0.5,) * 5
    checklist: tuple[ChecklistItem, ...] = ()
    presentation_seed: int = 0
    unit_seed: int = 0

    def __post_init__(self):
        u = tuple(float(x) for x in self.utilities)
        object.__setattr__(self, "utilities", u)
        if not self.weights:
            object.__setattr__(self, "weights", (1.0 / len(u),) * len(u))
        w = WeightVector(self.weights).values
        object.__setattr__(self, "weights", w)
        if len(w) != len(u):
            raise DimensionError("weights and utilities differ in length")
        if len(self.dimension_quality) != 5:
            raise DomainError("dimension_quality needs exactly 5 entries")
        object.__setattr__(self, "dimension_quality", tuple(float(q) for q in self.dimension_quality))
        object.__setattr__(self, "checklist", tuple(self.checklist))

    @property
    def n(self) -> int:
        return len(self.utilities)

    def with_presentation(self, presentation_seed: int) -> "LatentPlanState":
        return LatentPlanState(self.utilities, self.weights, self.dimension_quality,
                               self.checklist, int(presentation_seed), self.unit_seed)


@dataclass(frozen=True)
class JudgeNoiseProfile:
    base: NoiseSpec
    presentation_sensitivity: float = 0.0
    checklist_flip_prob: float = 0.0
    repeat_scale: float = 1.0
    dimension_sigma: float = 0.0

    def __post_init__(self):
        if self.presentation_sensitivity < 0:
            raise DomainError("presentation_sensitivity must be >= 0")
        if not 0 <= self.checklist_flip_prob < 1:
            raise DomainError("checklist_flip_prob must lie in [0, 1)")
        if self.repeat_scale < 0 or self.dimension_sigma < 0:
            raise DomainError("repeat_scale and dimension_sigma must be >= 0")


@dataclass(frozen=True)
class JudgeOutput:
    score: float
    per_role_utilities: tuple[float, ...] | None = None
    per_role_weights: tuple[float, ...] | None = None
    items: tuple[bool, ...] | None = field(default=None, repr=False)

    def __post_init__(self):
        if not 1.0 <= self.score <= 10.0:
            raise DomainError(f"score {self.score} outside [1, 10]")
        if self.per_role_weights is not None:
            WeightVector(self.per_role_weights)


def default_checklist(utilities: Sequence[float], dimension_quality: Sequence[float]) -> tuple[ChecklistItem, ...]:
    """Checklist whose truth bits follow the latent state.

    Category A has three items per stakeholder, passing at utility thresholds
    0.25/0.5/0.75. Categories B-E have two items each, passing when the
    matching rubric dimension quality clears 0.4 and 0.7.
    """
    items = []
    for i, u in enumerate(utilities):
        for k in range(ITEMS_PER_STAKEHOLDER):
            items.append(ChecklistItem("A", CHECKLIST_CATEGORY_WEIGHTS["A"], u >= (k + 1) / 4, i))
    for cat, q in zip("BCDE", dimension_quality[1:]):
        for thr in (0.4, 0.7):
            items.append(ChecklistItem(cat, CHECKLIST_CATEGORY_WEIGHTS[cat], q >= thr))
    return tuple(items)


def checklist_score(answers: Sequence[bool], weights: Sequence[float]) -> float:
    """Weighted pass fraction mapped to [1, 10]."""
    if len(answers) == 0:
        raise DomainError("empty checklist")
    if len(answers) != len(weights):
        raise DimensionError("answers and weights differ in length")
    a = np.asarray(answers, dtype=float)
    om = np.asarray(weights, dtype=float)
    return float((a * om).sum() / om.sum() * 9.0 + 1.0)


def _to_score(x: float) -> float:
    return 1.0 + 9.0 * min(1.0, max(0.0, float(x)))


def _presentation_rng(state: LatentPlanState) -> np.random.Generator:
    return child_rng(state.unit_seed, "presentation", state.presentation_seed)


def _draw(gen: np.random.Generator, spec: NoiseSpec, n: int, with_weights: bool, with_eps: bool):
    # order is fixed: utility noise, weight drift, residual
    delta = gen.standard_normal(n) * np.asarray(spec.sigma_delta)
    eta = None
    if with_weights:
        g = gen.standard_normal(n) * (spec.sigma_eta * math.sqrt(n / (n - 1)))
        eta = g - g.mean()
    eps = gen.standard_normal() * spec.sigma_eps if with_eps else 0.0
    return delta, eta, eps


def _noise(state: LatentPlanState, profile: JudgeNoiseProfile, rng, with_weights: bool,
           with_eps: bool):
    spec = profile.base
    if spec.n != state.n:
        raise DimensionError(f"noise spec is for n={spec.n}, state has n={state.n}")
    d_r, e_r, x_r = _draw(as_rng(rng), spec, state.n, with_weights, with_eps)
    d_p, e_p, x_p = _draw(_presentation_rng(state), spec, state.n, with_weights, with_eps)
    rs, k = profile.repeat_scale, profile.presentation_sensitivity
    delta = rs * d_r + k * d_p
    eta = rs * e_r + k * e_p if with_weights else None
    return delta, eta, rs * x_r + k * x_p


def judge_direct(state: LatentPlanState, profile: JudgeNoiseProfile, rng) -> JudgeOutput:
    """Holistic scalar score from implicitly perturbed weights and utilities."""
    delta, eta, eps = _noise(state, profile, rng, with_weights=True, with_eps=True)
    u = np.asarray(state.utilities)
    w = np.asarray(state.weights)
    v = u + delta
    # eta sums to zero; the offset keeps constant estimates exactly drift-free
    x = math.fsum(w * u) + float(np.dot(w, delta)) + float(np.dot(eta, v - v[0])) + eps
    return JudgeOutput(_to_score(x))


def judge_rubric(state: LatentPlanState, profile: JudgeNoiseProfile, rng) -> JudgeOutput:
    """Five noisy dimension scores combined with the fixed rubric weights."""
    rep = as_rng(rng).standard_normal(5)
    pres = _presentation_rng(state).standard_normal(5)
    noise = profile.dimension_sigma * (profile.repeat_scale * rep + profile.presentation_sensitivity * pres)
    q = np.asarray(state.dimension_quality) + noise
    return JudgeOutput(_to_score(float(np.dot(RUBRIC_WEIGHTS, q))))


def judge_checklist(state: LatentPlanState, profile: JudgeNoiseProfile, rng) -> JudgeOutput:
    items = state.checklist or default_checklist(state.utilities, state.dimension_quality)
    if not items:
        raise DomainError("empty checklist")
    m = len(items)
    p = profile.checklist_flip_prob
    flip = as_rng(rng).random(m) < min(profile.repeat_scale * p, 1.0)
    flip |= _presentation_rng(state).random(m) < min(profile.presentation_sensitivity * p, 1.0)
    answers = tuple(bool(it.truth) != bool(f) for it, f in zip(items, flip))
    score = checklist_score(answers, [it.weight for it in items])
    return JudgeOutput(score, items=answers)


def _estimated_utilities(state, profile, rng, with_weights):
    delta, eta, _ = _noise(state, profile, rng, with_weights=with_weights, with_eps=False)
    return np.asarray(state.utilities) + delta, eta


def _decomposed_output(u_hat: np.ndarray, w: np.ndarray) -> JudgeOutput:
    reported = 1.0 + 9.0 * u_hat
    score = min(10.0, max(1.0, float(np.dot(w, reported))))
    return JudgeOutput(score, tuple(float(x) for x in reported), tuple(float(x) for x in w))


def renormalize_weights(w) -> np.ndarray:
    """Floor negative weights at zero and rescale onto the simplex."""
    w = np.maximum(np.asarray(w, dtype=float), 0.0)
    s = w.sum()
    if s <= 0:
        return np.full(len(w), 1.0 / len(w))
    return w / s


def judge_decomposed_adaptive(state: LatentPlanState, profile: JudgeNoiseProfile, rng) -> JudgeOutput:
    """Per-role utilities plus judge-chosen weights that drift around ``state.weights``."""
    u_hat, eta = _estimated_utilities(state, profile, rng, with_weights=True)
    w = renormalize_weights(np.asarray(state.weights) + eta)
    return _decomposed_output(u_hat, w)


def judge_decomposed_fixed(state: LatentPlanState, profile: JudgeNoiseProfile, weights, rng) -> JudgeOutput:
    """Same per-role utilities as the adaptive judge, aggregated with fixed ``weights``.

    Utility noise is the first draw from both streams, so for an equal seed
    the utilities match :func:`judge_decomposed_adaptive` exactly.
    """
    w = np.asarray(WeightVector(tuple(np.asarray(weights, dtype=float))).values)
    if len(w) != state.n:
        raise DimensionError(f"{len(w)} weights for {state.n} stakeholders")
    u_hat, _ = _estimated_utilities(state, profile, rng, with_weights=False)
    return _decomposed_output(u_hat, w)


JUDGES = {
    "direct": judge_direct,
    "rubric": judge_rubric,
    "checklist": judge_checklist,
    "decomposed_adaptive": judge_decomposed_adaptive,
}
