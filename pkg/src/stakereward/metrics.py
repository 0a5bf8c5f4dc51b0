"""Consistency and weight-drift statistics over judge score records.

A *unit* is one ``(seed_id, n, quality)`` triple: a fixed base response
scored under many presentation variants plus a few exact repeats. All
variances are population (divide-by-N) variances.
"""

from __future__ import annotations

import json
import math
from collections import defaultdict
from dataclasses import asdict, dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import InsufficientDataError, MissingDataError, NotApplicableError

EXACT_REPEAT = "exact_repeat"


@dataclass(frozen=True)
class ScoreRecord:
    seed_id: str
    n: int
    quality: str
    family: str
    version: int
    score: float
    judge: str = ""
    weights: tuple[float, ...] | None = None
    utilities: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.version < 1:
            raise ValueError("version must be >= 1")

    @property
    def unit(self) -> tuple[str, int, str]:
        return (self.seed_id, self.n, self.quality)

    def to_json(self) -> dict:
        d = {"seed_id": self.seed_id, "n": self.n, "quality": self.quality, "family": self.family,
             "version": self.version, "judge": self.judge, "score": self.score}
        if self.weights is not None:
            d["weights"] = list(self.weights)
        if self.utilities is not None:
            d["utilities"] = list(self.utilities)
        return d

    @classmethod
    def from_json(cls, d: Mapping) -> "ScoreRecord":
        w = d.get("weights")
        u = d.get("utilities")
        return cls(str(d["seed_id"]), int(d["n"]), str(d["quality"]), str(d["family"]),
                   int(d["version"]), float(d["score"]), str(d.get("judge", "")),
                   tuple(w) if w is not None else None, tuple(u) if u is not None else None)


def read_jsonl(path) -> list[ScoreRecord]:
    with open(path) as fh:
        return [ScoreRecord.from_json(json.loads(line)) for line in fh if line.strip()]


def write_jsonl(records: Iterable[ScoreRecord], path) -> None:
    with open(path, "w") as fh:
        for r in records:
            fh.write(json.dumps(r.to_json(), sort_keys=True) + "\n")


def population_variance(values: Sequence[float]) -> float:
    """Two-pass population variance."""
    x = [float(v) for v in values]
    if len(x) < 1:
        raise InsufficientDataError("variance of an empty sample")
    # shift by the first value so identical inputs give exactly zero
    d = [v - x[0] for v in x]
    m = math.fsum(d) / len(d)
    return math.fsum((v - m) ** 2 for v in d) / len(d)


def sigma2_sem(records: Iterable[ScoreRecord]) -> float:
    """Score variance over all presentation variants of one unit."""
    scores = [r.score for r in records if r.family != EXACT_REPEAT]
    if len(scores) < 2:
        raise InsufficientDataError(f"need >= 2 variant scores, got {len(scores)}")
    return population_variance(scores)


def sigma2_rep(records: Iterable[ScoreRecord]) -> float:
    """Score variance over exact repeats of one unit."""
    scores = [r.score for r in records if r.family == EXACT_REPEAT]
    if len(scores) < 2:
        raise InsufficientDataError(f"need >= 2 exact repeats, got {len(scores)}")
    return population_variance(scores)


def coefficient_of_variation(records: Iterable[ScoreRecord]) -> float:
    scores = [r.score for r in records if r.family != EXACT_REPEAT]
    var = sigma2_sem_from_scores(scores)
    mean = math.fsum(scores) / len(scores)
    return math.sqrt(var) / mean


def sigma2_sem_from_scores(scores: Sequence[float]) -> float:
    if len(scores) < 2:
        raise InsufficientDataError(f"need >= 2 variant scores, got {len(scores)}")
    return population_variance(scores)


def growth(per_n: Mapping[int, float], low: int = 2, high: int = 8) -> float:
    """Ratio of the high-n to the low-n semantic variance; ``inf`` for x/0, ``nan`` for 0/0."""
    for k in (low, high):
        if k not in per_n or per_n[k] is None or (isinstance(per_n[k], float) and math.isnan(per_n[k])):
            raise MissingDataError(f"no sigma2_sem entry for n={k}")
    if per_n[low] == 0:
        return math.inf if per_n[high] > 0 else math.nan
    return per_n[high] / per_n[low]


def sr_ratio(sem: float, rep: float) -> float:
    """Semantic-to-repeat variance ratio; ``inf`` for x/0, ``nan`` for 0/0."""
    if sem < 0 or rep < 0:
        raise ValueError("variances must be >= 0")
    if rep == 0:
        return math.inf if sem > 0 else math.nan
    return sem / rep


def group_by_unit(records: Iterable[ScoreRecord]) -> dict[tuple, list[ScoreRecord]]:
    """Records bucketed by unit, with units in sorted order."""
    out = defaultdict(list)
    for r in records:
        out[r.unit].append(r)
    return {k: sorted(out[k], key=lambda r: (r.family, r.version)) for k in sorted(out)}


# -- weight drift ------------------------------------------------------------

def weight_shift(weights: Sequence[float], reference: Sequence[float], utilities: Sequence[float]) -> float:
    """``sum_i (w_i - ref_i) * u_i`` for a single evaluation."""
    w, ref, u = (np.asarray(x, dtype=float) for x in (weights, reference, utilities))
    if not (len(w) == len(ref) == len(u)):
        raise NotApplicableError("weights, reference and utilities differ in length")
    return math.fsum((w - ref) * u)


def _check_weighted(group: Sequence[ScoreRecord]):
    if not group:
        raise InsufficientDataError("empty group")
    lengths = set()
    for r in group:
        if r.weights is None or r.utilities is None:
            raise NotApplicableError("record carries no weights/utilities")
        if len(r.weights) != len(r.utilities):
            raise NotApplicableError("weights and utilities differ in length")
        lengths.add(len(r.weights))
    if len(lengths) != 1:
        raise NotApplicableError("records in a group have different stakeholder counts")


def delta_r_w(group: Sequence[ScoreRecord]) -> list[float]:
    """Weight-induced score shift of each record relative to the group-mean weights."""
    _check_weighted(group)
    w = np.array([r.weights for r in group], dtype=float)
    # centering on the first row keeps identical weights at an exact zero shift
    w_bar = w[0] + (w - w[0]).mean(axis=0)
    return [weight_shift(r.weights, w_bar, r.utilities) for r in group]


@dataclass(frozen=True)
class WeightDriftReport:
    w_cv: float
    u_cv: float
    mean_abs_shift_over_sigma: float
    p95_shift_over_sigma: float
    shift_range_over_sigma: float
    w_var_pct: float
    groups: int = 0
    excluded_groups: int = 0

    def as_dict(self) -> dict:
        return asdict(self)


def _mean_cv(matrix: np.ndarray) -> float:
    mu = matrix.mean(axis=0)
    sd = (matrix - matrix[0]).std(axis=0)
    keep = mu != 0
    if not keep.any():
        return 0.0
    return float(np.mean(np.abs(sd[keep] / mu[keep])))


def normalized_shift_stats(shifts_by_group: Sequence[Sequence[float]], sigmas: Sequence[float]):
    """Mean and P95 of pooled ``|shift| / sigma`` and the mean per-group range over sigma."""
    pooled = []
    ranges = []
    for shifts, sigma in zip(shifts_by_group, sigmas):
        s = np.asarray(shifts, dtype=float)
        pooled.extend(np.abs(s) / sigma)
        ranges.append((s.max() - s.min()) / sigma)
    pooled = np.asarray(pooled)
    return float(pooled.mean()), float(np.percentile(pooled, 95)), float(np.mean(ranges))


def weight_drift_report(groups: Sequence[Sequence[ScoreRecord]]) -> WeightDriftReport:
    """Weight-drift summary over decomposed-judge groups sharing one n.

    Groups whose final-score standard deviation is zero are left out of the
    normalized statistics and counted in ``excluded_groups``.
    """
    w_cvs, u_cvs, shifts, sigmas, var_pcts = [], [], [], [], []
    excluded = 0
    for g in groups:
        if len(g) < 2:
            raise InsufficientDataError("each group needs >= 2 records")
        _check_weighted(g)
        w_cvs.append(_mean_cv(np.array([r.weights for r in g], dtype=float)))
        u_cvs.append(_mean_cv(np.array([r.utilities for r in g], dtype=float)))
        d = delta_r_w(g)
        scores = [r.score for r in g]
        var_score = population_variance(scores)
        if var_score == 0:
            excluded += 1
            continue
        shifts.append(d)
        sigmas.append(math.sqrt(var_score))
        var_pcts.append(100.0 * population_variance(d) / var_score)
    if not groups:
        raise InsufficientDataError("no groups")
    if shifts:
        mean_s, p95_s, range_s = normalized_shift_stats(shifts, sigmas)
        var_pct = float(np.mean(var_pcts))
    else:
        mean_s = p95_s = range_s = var_pct = 0.0
    return WeightDriftReport(float(np.mean(w_cvs)), float(np.mean(u_cvs)), mean_s, p95_s, range_s,
                             var_pct, groups=len(groups), excluded_groups=excluded)


# -- consistency -------------------------------------------------------------

@dataclass(frozen=True)
class CellStats:
    sigma2_sem: float
    sigma2_rep: float
    cv: float
    units: int


@dataclass(frozen=True)
class ConsistencyReport:
    sigma2_sem: float
    sigma2_rep: float
    cv: float
    sr_ratio: float
    per_n: dict
    growth: float


def _mean_or_nan(xs):
    xs = [x for x in xs if not math.isnan(x)]
    return math.fsum(xs) / len(xs) if xs else math.nan


def unit_stats(records: Sequence[ScoreRecord]) -> CellStats:
    sem_scores = [r.score for r in records if r.family != EXACT_REPEAT]
    sem = sigma2_sem_from_scores(sem_scores)
    mean = math.fsum(sem_scores) / len(sem_scores)
    try:
        rep = sigma2_rep(records)
    except InsufficientDataError:
        rep = math.nan
    return CellStats(sem, rep, math.sqrt(sem) / mean if mean else math.nan, 1)


def cell_table(records: Iterable[ScoreRecord]) -> dict[tuple[int, str], CellStats]:
    """Per-(n, quality) means over units."""
    cells = defaultdict(list)
    for unit, recs in group_by_unit(records).items():
        cells[(unit[1], unit[2])].append(unit_stats(recs))
    return {k: _average(v) for k, v in sorted(cells.items())}


def _average(stats: Sequence[CellStats]) -> CellStats:
    return CellStats(_mean_or_nan([s.sigma2_sem for s in stats]),
                     _mean_or_nan([s.sigma2_rep for s in stats]),
                     _mean_or_nan([s.cv for s in stats]),
                     sum(s.units for s in stats))


def consistency_report(records: Iterable[ScoreRecord], qualities: Sequence[str] | None = None,
                       low: int = 2, high: int = 8) -> ConsistencyReport:
    """Pooled consistency statistics; each unit counts equally."""
    by_n = defaultdict(list)
    everything = []
    for unit, recs in group_by_unit(records).items():
        if qualities is not None and unit[2] not in qualities:
            continue
        s = unit_stats(recs)
        by_n[unit[1]].append(s)
        everything.append(s)
    if not everything:
        raise InsufficientDataError("no units to report on")
    per_n = {n: _average(v) for n, v in sorted(by_n.items())}
    sems = {n: c.sigma2_sem for n, c in per_n.items()}
    try:
        g = growth(sems, low, high)
    except MissingDataError:
        g = math.nan
    sr = sr_ratio(per_n[high].sigma2_sem, per_n[high].sigma2_rep) if (
        high in per_n and not math.isnan(per_n[high].sigma2_rep)) else math.nan
    total = _average(everything)
    return ConsistencyReport(total.sigma2_sem, total.sigma2_rep, total.cv, sr, per_n, g)
