"""Offline stakeholder weight calibration.

Each stakeholder gets a difficulty score from their parsed constraints,

    d_i = sum_hard alpha(c) + gamma * sum_soft alpha(c) + beta * conflict_i,

and the weights are a temperature softmax over the difficulties. Weights
depend only on the query profiles, never on a candidate response, so the
aggregation rule is fixed before any scoring happens.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DimensionError, DomainError, ValidationError
from .noise_model import WeightVector

DEFAULT_GAMMA = 0.5
DEFAULT_BETA = 0.5
DEFAULT_TAU_W = 5.0


@dataclass(frozen=True)
class Constraint:
    id: str
    kind: str = "hard"
    restrictiveness: float = 1.0
    description: str = ""

    def __post_init__(self):
        if self.kind not in ("hard", "soft"):
            raise DomainError(f"constraint kind must be 'hard' or 'soft', got {self.kind!r}")
        if self.restrictiveness < 0:
            raise DomainError("restrictiveness must be >= 0")


@dataclass(frozen=True)
class StakeholderProfile:
    id: str
    constraints: tuple[Constraint, ...] = ()
    conflict_score: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "constraints", tuple(self.constraints))
        if self.conflict_score < 0:
            raise DomainError("conflict_score must be >= 0")

    @classmethod
    def from_counts(cls, id: str, hard: int, soft: int, conflict_score: float = 0.0):
        """Profile with ``hard`` and ``soft`` constraints of unit restrictiveness."""
        cons = [Constraint(f"{id}-h{k}", "hard") for k in range(hard)]
        cons += [Constraint(f"{id}-s{k}", "soft") for k in range(soft)]
        return cls(id, tuple(cons), conflict_score)


@dataclass(frozen=True)
class CalibrationConfig:
    gamma: float = DEFAULT_GAMMA
    beta: float = DEFAULT_BETA
    tau_w: float = DEFAULT_TAU_W

    def __post_init__(self):
        if not 0 < self.gamma < 1:
            raise DomainError("gamma must lie in (0, 1)")
        if not 0 < self.beta < 1:
            raise DomainError("beta must lie in (0, 1)")
        if not self.tau_w > 0:
            raise DomainError("tau_w must be > 0")


@dataclass(frozen=True)
class CalibratedWeights:
    difficulty: tuple[float, ...]
    weights: WeightVector = field(repr=False)

    def as_dict(self) -> dict:
        return {"difficulty": list(self.difficulty), "weights": list(self.weights.values)}


def difficulty(profile: StakeholderProfile, cfg: CalibrationConfig = CalibrationConfig()) -> float:
    hard = math.fsum(c.restrictiveness for c in profile.constraints if c.kind == "hard")
    soft = math.fsum(c.restrictiveness for c in profile.constraints if c.kind == "soft")
    return hard + cfg.gamma * soft + cfg.beta * profile.conflict_score


def softmax_weights(scores: Sequence[float], tau_w: float) -> np.ndarray:
    """Temperature softmax with max subtraction."""
    if not tau_w > 0:
        raise DomainError("tau_w must be > 0")
    z = np.asarray(scores, dtype=float) / tau_w
    e = np.exp(z - z.max())
    return e / e.sum()


def calibrate_weights(profiles: Sequence[StakeholderProfile],
                      cfg: CalibrationConfig = CalibrationConfig()) -> CalibratedWeights:
    if len(profiles) < 1:
        raise DomainError("need at least one stakeholder profile")
    ids = [p.id for p in profiles]
    if len(set(ids)) != len(ids):
        raise DomainError(f"duplicate stakeholder ids: {ids}")
    d = tuple(difficulty(p, cfg) for p in profiles)
    w = softmax_weights(d, cfg.tau_w)
    return CalibratedWeights(d, WeightVector(tuple(w)))


def aggregate(weights, utilities) -> float:
    """Fixed-weight aggregate ``sum_i w_i u_hat_i`` of estimated utilities."""
    w = np.asarray(weights, dtype=float).reshape(-1)
    u = np.asarray(utilities, dtype=float).reshape(-1)
    if len(w) != len(u):
        raise DimensionError(f"length mismatch: {len(w)} weights, {len(u)} utilities")
    return math.fsum(w * u)


# -- JSON ingestion ---------------------------------------------------------

def _require(obj, key, path, types):
    if key not in obj:
        raise ValidationError(f"missing field {key!r}", path)
    val = obj[key]
    if not isinstance(val, types) or isinstance(val, bool):
        raise ValidationError(f"field {key!r} has wrong type {type(val).__name__}", path)
    return val


def profiles_from_dict(doc: dict) -> tuple[list[StakeholderProfile], CalibrationConfig]:
    """Parse a calibration document into profiles and config.

    Missing ``gamma``/``beta``/``tau_w`` fall back to the defaults; missing
    ``restrictiveness`` defaults to 1.0.
    """
    if not isinstance(doc, dict):
        raise ValidationError("calibration document must be a JSON object")
    raw = _require(doc, "stakeholders", (), list)
    profiles = []
    for i, s in enumerate(raw):
        path = ("stakeholders", i)
        if not isinstance(s, dict):
            raise ValidationError("stakeholder entry must be an object", path)
        sid = _require(s, "id", path, str)
        cons = []
        for j, c in enumerate(s.get("constraints", [])):
            cpath = path + ("constraints", j)
            if not isinstance(c, dict):
                raise ValidationError("constraint entry must be an object", cpath)
            try:
                cons.append(Constraint(
                    id=str(c.get("id", f"{sid}-c{j}")),
                    kind=_require(c, "kind", cpath, str),
                    restrictiveness=float(c.get("restrictiveness", 1.0)),
                    description=str(c.get("description", "")),
                ))
            except DomainError as exc:
                raise ValidationError(str(exc), cpath) from None
        try:
            profiles.append(StakeholderProfile(sid, tuple(cons), float(s.get("conflict_score", 0.0))))
        except DomainError as exc:
            raise ValidationError(str(exc), path) from None
    try:
        cfg = CalibrationConfig(
            gamma=float(doc.get("gamma", DEFAULT_GAMMA)),
            beta=float(doc.get("beta", DEFAULT_BETA)),
            tau_w=float(doc.get("tau_w", DEFAULT_TAU_W)),
        )
    except DomainError as exc:
        raise ValidationError(str(exc)) from None
    return profiles, cfg


def load_profiles(path) -> tuple[list[StakeholderProfile], CalibrationConfig]:
    with open(path) as fh:
        return profiles_from_dict(json.load(fh))


def three_traveler_profiles() -> list[StakeholderProfile]:
    """The three-traveler toy query: 4h+2s, 0h+2s, 2h+2s."""
    return [
        StakeholderProfile.from_counts("A", 4, 2),
        StakeholderProfile.from_counts("B", 0, 2),
        StakeholderProfile.from_counts("C", 2, 2),
    ]
