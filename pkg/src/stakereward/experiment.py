"""Synthetic reward-consistency experiment.

For every base scenario, stakeholder count and quality band (a *unit*) the
runner builds a structured plan, generates its rule-based presentation
variants, scores each variant once and the unchanged plan several times with
every configured judge, and reduces the records to consistency tables.

All randomness comes from counter-based child streams of the master seed
keyed by ``(stage, unit, judge stream, family, version)``, and units are
reduced in sorted order, so outputs are byte-identical for any worker count.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from .calibration import CalibrationConfig, StakeholderProfile, calibrate_weights, softmax_weights
from .judges import (JudgeNoiseProfile, LatentPlanState, default_checklist, judge_checklist,
                     judge_decomposed_adaptive, judge_decomposed_fixed, judge_direct, judge_rubric)
from .metrics import (EXACT_REPEAT, ScoreRecord, consistency_report, group_by_unit,
                      weight_drift_report, write_jsonl)
from .noise_model import NoiseSpec
from .seeding import child_rng, child_seed
from .variants import RULE_FAMILIES, VariantFamily, render, synthetic_plan, variant_versions
from .errors import NotApplicableError

DEFAULT_JUDGES = ("direct", "rubric", "checklist", "decomposed_adaptive", "decomposed_uniform",
                  "decompr_tau3", "decompr_tau5", "decompr_tau8")
DECOMPOSED = ("decomposed_adaptive", "decomposed_uniform")
QUALITY_RANGES = {"low": (0.05, 0.45), "medium": (0.3, 0.9), "high": (0.6, 0.98)}
MAX_STAKEHOLDERS = 8


@dataclass(frozen=True)
class NoiseConfig:
    sigma_delta: float = 0.04
    sigma_eta: float = 0.12
    sigma_eta_scaling: str = "const"
    sigma_eps: float = 0.03
    kappa: float = 1.0
    repeat_scale: float = 0.6
    checklist_flip_prob: float = 0.05
    dimension_sigma: float = 0.06

    def profile(self, n: int, kappa_scale: float = 1.0) -> JudgeNoiseProfile:
        eta = self.sigma_eta if self.sigma_eta_scaling == "const" else self.sigma_eta * math.sqrt(2.0 / n)
        return JudgeNoiseProfile(NoiseSpec.homogeneous(n, self.sigma_delta, eta, self.sigma_eps),
                                 presentation_sensitivity=self.kappa * kappa_scale,
                                 checklist_flip_prob=self.checklist_flip_prob,
                                 repeat_scale=self.repeat_scale,
                                 dimension_sigma=self.dimension_sigma)


@dataclass(frozen=True)
class ExperimentConfig:
    scenario: str = "desk"
    judges: tuple[str, ...] = DEFAULT_JUDGES
    noise: NoiseConfig = NoiseConfig()
    n_values: tuple[int, ...] = (2, 3, 5, 8)
    qualities: tuple[str, ...] = ("medium", "high")
    seeds: int = 5
    versions: int = 5
    repeats: int = 5
    families: tuple[str, ...] = tuple(f.value for f in RULE_FAMILIES)
    family_sensitivity: dict = field(default_factory=dict)
    judge_tau: float = 5.0
    master_seed: int = 0
    workers: int = 1

    def __post_init__(self):
        if any(n < 2 or n > MAX_STAKEHOLDERS for n in self.n_values):
            raise ValueError(f"n values must lie in [2, {MAX_STAKEHOLDERS}]")
        for j in self.judges:
            if j not in DEFAULT_JUDGES and not j.startswith("decompr_tau"):
                raise ValueError(f"unknown judge {j!r}")
        for q in self.qualities:
            if q not in QUALITY_RANGES:
                raise ValueError(f"unknown quality band {q!r}")
        for f in self.families:
            VariantFamily(f)

    def config_hash(self) -> str:
        payload = json.dumps(config_to_dict(self), sort_keys=True)
        return hashlib.sha256(payload.encode()).hexdigest()


def config_to_dict(cfg: ExperimentConfig) -> dict:
    d = asdict(cfg)
    d.pop("workers")
    return d


def config_from_dict(d: dict) -> ExperimentConfig:
    d = dict(d)
    noise = NoiseConfig(**d.pop("noise", {}))
    for key in ("judges", "n_values", "qualities", "families"):
        if key in d:
            d[key] = tuple(d[key])
    return ExperimentConfig(noise=noise, **d)


def _tau_of(judge: str) -> float:
    return float(judge[len("decompr_tau"):])


@dataclass(frozen=True)
class Unit:
    seed_index: int
    n: int
    quality: str

    @property
    def seed_id(self) -> str:
        return f"s{self.seed_index}"


def scenario_profiles(master_seed: int, seed_index: int) -> list[StakeholderProfile]:
    """Up to eight stakeholder profiles of a base query; smaller n takes a prefix."""
    rng = child_rng(master_seed, "profiles", seed_index)
    out = []
    for i in range(MAX_STAKEHOLDERS):
        out.append(StakeholderProfile.from_counts(f"user{i + 1}", int(rng.integers(0, 5)),
                                                  int(rng.integers(0, 5)), float(rng.integers(0, 3))))
    return out


def build_state(master_seed: int, unit: Unit, judge_tau: float):
    profiles = scenario_profiles(master_seed, unit.seed_index)[: unit.n]
    lo, hi = QUALITY_RANGES[unit.quality]
    rng = child_rng(master_seed, "utilities", unit.seed_index, unit.quality)
    u = rng.uniform(lo, hi, MAX_STAKEHOLDERS)[: unit.n]
    dq = np.clip(u.mean() + rng.normal(0.0, 0.05, 5), 0.0, 1.0)
    w_judge = softmax_weights(calibrate_weights(profiles).difficulty, judge_tau)
    state = LatentPlanState(tuple(u), tuple(w_judge), tuple(dq), default_checklist(u, dq),
                            presentation_seed=0,
                            unit_seed=child_seed(master_seed, "unit", unit.seed_index, unit.n, unit.quality))
    doc = synthetic_plan(unit.n, child_rng(master_seed, "plan", unit.seed_index, unit.n, unit.quality),
                         utilities=u, quality=unit.quality)
    return state, profiles, doc


def presentation_seed_of(text: str) -> int:
    return int.from_bytes(hashlib.sha256(text.encode("utf-8")).digest()[:8], "little") >> 1


def _judge_stream(judge: str) -> str:
    # fixed-weight decomposed judges share the adaptive judge's utility stream
    return "decomposed" if judge in DECOMPOSED or judge.startswith("decompr_tau") else judge


def _score(judge, state, profile, rng, fixed_weights):
    if judge == "direct":
        return judge_direct(state, profile, rng)
    if judge == "rubric":
        return judge_rubric(state, profile, rng)
    if judge == "checklist":
        return judge_checklist(state, profile, rng)
    if judge == "decomposed_adaptive":
        return judge_decomposed_adaptive(state, profile, rng)
    return judge_decomposed_fixed(state, profile, fixed_weights[judge], rng)


@dataclass
class UnitResult:
    records: list
    skipped: list


def run_unit(cfg: ExperimentConfig, unit: Unit) -> UnitResult:
    m = cfg.master_seed
    state, profiles, doc = build_state(m, unit, cfg.judge_tau)
    fixed = {"decomposed_uniform": (1.0 / unit.n,) * unit.n}
    for j in cfg.judges:
        if j.startswith("decompr_tau"):
            fixed[j] = calibrate_weights(profiles, CalibrationConfig(tau_w=_tau_of(j))).weights.values
    inputs = []  # (family, version, presentation_seed)
    skipped = []
    for fam in cfg.families:
        try:
            docs = variant_versions(doc, fam, cfg.versions, child_seed(m, "variants", unit.seed_index, unit.n,
                                                                          unit.quality, fam))
        except NotApplicableError as exc:
            skipped.append({"unit": [unit.seed_id, unit.n, unit.quality], "family": fam, "reason": str(exc)})
            continue
        if len(docs) < cfg.versions:
            skipped.append({"unit": [unit.seed_id, unit.n, unit.quality], "family": fam,
                            "reason": f"only {len(docs)} of {cfg.versions} versions"})
        for v, vd in enumerate(docs, 1):
            inputs.append((fam, v, presentation_seed_of(render(vd))))
    base_seed = presentation_seed_of(render(doc))
    inputs += [(EXACT_REPEAT, r, base_seed) for r in range(1, cfg.repeats + 1)]

    records = []
    for judge in cfg.judges:
        stream = _judge_stream(judge)
        for fam, v, pseed in inputs:
            profile = cfg.noise.profile(unit.n, cfg.family_sensitivity.get(fam, 1.0)
                                        if fam != EXACT_REPEAT else 1.0)
            rng = child_rng(m, "call", unit.seed_index, unit.n, unit.quality, stream, fam, v)
            out = _score(judge, state.with_presentation(pseed), profile, rng, fixed)
            records.append(ScoreRecord(unit.seed_id, unit.n, unit.quality, fam, v, out.score, judge,
                                       out.per_role_weights, out.per_role_utilities))
    return UnitResult(records, skipped)


def units_for(cfg: ExperimentConfig) -> list[Unit]:
    return [Unit(s, n, q) for s in range(cfg.seeds) for n in cfg.n_values for q in cfg.qualities]


def run_records(cfg: ExperimentConfig):
    units = units_for(cfg)
    if cfg.workers > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            results = list(pool.map(lambda u: run_unit(cfg, u), units))
    else:
        results = [run_unit(cfg, u) for u in units]
    records, skipped = [], []
    for res in results:
        records.extend(res.records)
        skipped.extend(res.skipped)
    records.sort(key=lambda r: (r.judge, r.seed_id, r.n, r.quality, r.family, r.version))
    return records, skipped


# -- tables -------------------------------------------------------------------

def fmt(x) -> str:
    if isinstance(x, str):
        return x
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, ".10g")


def by_judge(records) -> dict[str, list[ScoreRecord]]:
    out: dict[str, list] = {}
    for r in records:
        out.setdefault(r.judge, []).append(r)
    return out


def table1(records, cfg: ExperimentConfig):
    """Per judge and quality: repeat/semantic variance per n, growth, S/R."""
    header = ["judge", "quality"]
    for n in cfg.n_values:
        header += [f"rep_var_n{n}_scale1to10", f"sem_var_n{n}_scale1to10"]
    header += ["growth", "sr_ratio_at_max_n"]
    rows = []
    lo, hi = min(cfg.n_values), max(cfg.n_values)
    groups = by_judge(records)
    for judge in cfg.judges:
        recs = groups.get(judge, [])
        for label, quals in [(q, (q,)) for q in cfg.qualities] + [("all", tuple(cfg.qualities))]:
            rep = consistency_report(recs, quals, lo, hi)
            row = [judge, label]
            for n in cfg.n_values:
                c = rep.per_n.get(n)
                row += [c.sigma2_rep if c else math.nan, c.sigma2_sem if c else math.nan]
            rows.append(row + [rep.growth, rep.sr_ratio])
    return header, rows


def table2(records, cfg: ExperimentConfig, judges: Sequence[str] | None = None):
    """Semantic variance per n and growth per scoring method, pooled over quality bands."""
    header = ["method"] + [f"sem_var_n{n}_scale1to10" for n in cfg.n_values] + ["growth"]
    lo, hi = min(cfg.n_values), max(cfg.n_values)
    groups = by_judge(records)
    rows = []
    for judge in judges or cfg.judges:
        if judge not in groups:
            continue
        rep = consistency_report(groups[judge], cfg.qualities, lo, hi)
        rows.append([judge] + [rep.per_n[n].sigma2_sem for n in cfg.n_values] + [rep.growth])
    return header, rows


def table3(records, cfg: ExperimentConfig):
    """Weight-drift summary per decomposed judge and n (shift ratios are fractions, not %)."""
    header = ["judge", "n", "w_cv", "u_cv", "mean_abs_shift_over_sigma", "p95_abs_shift_over_sigma",
              "shift_range_over_sigma", "w_var_pct", "groups", "excluded_groups"]
    rows = []
    groups = by_judge(records)
    for judge in cfg.judges:
        if not (judge in DECOMPOSED or judge.startswith("decompr_tau")):
            continue
        units = group_by_unit(r for r in groups.get(judge, []) if r.family != EXACT_REPEAT)
        for n in cfg.n_values:
            grps = [g for (sid, nn, q), g in units.items() if nn == n]
            rep = weight_drift_report(grps)
            rows.append([judge, n, rep.w_cv, rep.u_cv, rep.mean_abs_shift_over_sigma,
                         rep.p95_shift_over_sigma, rep.shift_range_over_sigma, rep.w_var_pct,
                         rep.groups, rep.excluded_groups])
    return header, rows


def table4(records, cfg: ExperimentConfig):
    """Aggregation comparison: same utilities, different fixed or adaptive weights."""
    judges = [j for j in cfg.judges if j in DECOMPOSED or j.startswith("decompr_tau")]
    return table2(records, cfg, judges)


def to_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([fmt(x) for x in r])
    return buf.getvalue()


def to_json_table(header, rows) -> str:
    def clean(x):
        if isinstance(x, str):
            return x
        x = float(x)
        return fmt(x) if (math.isnan(x) or math.isinf(x)) else float(fmt(x))

    return json.dumps([dict(zip(header, (clean(x) for x in r))) for r in rows], indent=2) + "\n"


TABLES = {"table1_consistency": table1, "table2_methods": table2, "table3_weight_drift": table3,
          "table4_aggregation": table4}


def run_consistency(cfg: ExperimentConfig, out_dir, fmt_name: str = "csv") -> dict:
    """Run the experiment and write records, tables and a manifest into ``out_dir``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    records, skipped = run_records(cfg)
    write_jsonl(records, out / "records.jsonl")
    files = ["records.jsonl"]
    for name, fn in TABLES.items():
        header, rows = fn(records, cfg)
        ext = "csv" if fmt_name == "csv" else "json"
        text = to_csv(header, rows) if fmt_name == "csv" else to_json_table(header, rows)
        (out / f"{name}.{ext}").write_text(text)
        files.append(f"{name}.{ext}")
    counts = {j: len(v) for j, v in sorted(by_judge(records).items())}
    manifest = {
        "config_hash": cfg.config_hash(),
        "config": config_to_dict(cfg),
        "module_versions": {"stakereward": __version__, "numpy": np.__version__},
        "record_counts": {"units": len(units_for(cfg)), "per_judge": counts, "total": len(records),
                          "skipped_variant_sets": len(skipped)},
        "skipped": skipped,
        "outputs": files,
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return manifest


def growth_replications(replications: int = 50, master_seed: int = 0, base: ExperimentConfig | None = None):
    """Growth of the adaptive and uniform decomposed judges over seeded replications.

    Returns a list of ``(growth_adaptive, growth_uniform)`` pairs, one per
    replication; replication ``r`` uses master seed ``child_seed(master_seed, "replication", r)``.
    """
    base = base or ExperimentConfig()
    cfg = replace(base, judges=DECOMPOSED, n_values=(2, 8))
    out = []
    for r in range(replications):
        rc = replace(cfg, master_seed=child_seed(master_seed, "replication", r))
        records, _ = run_records(rc)
        groups = by_judge(records)
        ga = consistency_report(groups["decomposed_adaptive"], rc.qualities).growth
        gu = consistency_report(groups["decomposed_uniform"], rc.qualities).growth
        out.append((ga, gu))
    return out
