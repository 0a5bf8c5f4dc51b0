"""Command-line front end.

Exit codes: 0 success, 2 usage or parse error, 3 config validation error,
4 failed acceptance check (``--check``).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path

import jsonschema
import numpy as np

from . import __version__
from .calibration import (CalibrationConfig, aggregate, calibrate_weights, profiles_from_dict,
                          three_traveler_profiles)
from .errors import StakeRewardError, ValidationError
from .experiment import config_from_dict, fmt, run_consistency
from .grpo_signal import DEFAULT_SNR_GRID, snr_scaling_sweep, thresholds_table
from .judges import JUDGES, JudgeNoiseProfile, LatentPlanState, judge_decomposed_fixed
from .noise_model import NoiseSpec, UtilityVector, WeightVector, decompose_variance, mc_score_variance
from .seeding import child_rng
from .variants import RULE_FAMILIES, VERSIONS_PER_FAMILY, VariantFamily, from_dict, synthetic_plan, write_bundle

EXIT_OK, EXIT_USAGE, EXIT_VALIDATION, EXIT_CHECK = 0, 2, 3, 4

_num = {"type": "number"}
_nonneg = {"type": "number", "minimum": 0}
_unit_list = {"type": "array", "items": {"type": "number", "minimum": 0, "maximum": 1}, "minItems": 2}

SCHEMAS = {
    "decompose": {
        "type": "object", "additionalProperties": False,
        "properties": {
            "utilities": _unit_list,
            "weights": {"type": "array", "items": _nonneg},
            "sigma_delta": {"oneOf": [_nonneg, {"type": "array", "items": _nonneg}]},
            "sigma_eta": _nonneg, "sigma_eps": _nonneg,
            "samples": {"type": "integer", "minimum": 2},
        },
    },
    "scaling-sweep": {
        "type": "object", "additionalProperties": False,
        "properties": {
            "n_values": {"type": "array", "items": {"type": "integer", "minimum": 2}, "minItems": 1},
            "sigma_eta2": _nonneg,
            "regime": {"enum": ["const", "inv_n"]},
            "u_dispersion": _nonneg, "gap_variance": _nonneg,
            "G": {"type": "integer", "minimum": 2},
        },
    },
    "sign-prob": {
        "type": "object", "additionalProperties": False,
        "properties": {
            "G": {"type": "integer", "minimum": 2},
            "snr_values": {"type": "array", "items": _nonneg, "minItems": 1},
            "trials": {"type": "integer", "minimum": 0},
            "sigma_xi": {"type": "number", "exclusiveMinimum": 0},
        },
    },
    "weights": {
        "type": "object", "required": ["stakeholders"],
        "properties": {
            "stakeholders": {"type": "array", "minItems": 1, "items": {
                "type": "object", "required": ["id"],
                "properties": {
                    "id": {"type": "string"},
                    "conflict_score": _nonneg,
                    "constraints": {"type": "array", "items": {
                        "type": "object", "required": ["kind"],
                        "properties": {"id": {"type": "string"}, "kind": {"enum": ["hard", "soft"]},
                                       "restrictiveness": _nonneg, "description": {"type": "string"}}}},
                }}},
            "utilities": {"type": "array", "items": {"type": "number", "minimum": 0, "maximum": 1}},
            "gamma": _num, "beta": _num, "tau_w": _num,
        },
    },
    "score": {
        "type": "object", "additionalProperties": False,
        "properties": {
            "utilities": _unit_list,
            "weights": {"type": "array", "items": _nonneg},
            "judge": {"enum": sorted(JUDGES) + ["decomposed_uniform"]},
            "sigma_delta": _nonneg, "sigma_eta": _nonneg, "sigma_eps": _nonneg,
            "kappa": _nonneg, "repeat_scale": _nonneg, "checklist_flip_prob": _nonneg,
            "dimension_sigma": _nonneg,
            "presentation_seeds": {"type": "array", "items": {"type": "integer", "minimum": 0}},
            "repeats": {"type": "integer", "minimum": 1},
        },
    },
    "variants": {
        "type": "object", "additionalProperties": False,
        "properties": {
            "plan": {"type": "object"},
            "n": {"type": "integer", "minimum": 2},
            "families": {"type": "array", "items": {"enum": [f.value for f in RULE_FAMILIES]}},
            "versions": {"type": "integer", "minimum": 1},
        },
    },
    "consistency": {
        "type": "object", "additionalProperties": False,
        "properties": {
            "scenario": {"type": "string"},
            "judges": {"type": "array", "items": {"type": "string"}, "minItems": 1},
            "noise": {"type": "object", "additionalProperties": False, "properties": {
                "sigma_delta": _nonneg, "sigma_eta": _nonneg, "sigma_eta_scaling": {"enum": ["const", "inv_n"]},
                "sigma_eps": _nonneg, "kappa": _nonneg, "repeat_scale": _nonneg,
                "checklist_flip_prob": {"type": "number", "minimum": 0, "exclusiveMaximum": 1},
                "dimension_sigma": _nonneg}},
            "n_values": {"type": "array", "items": {"type": "integer", "minimum": 2, "maximum": 8}, "minItems": 1},
            "qualities": {"type": "array", "items": {"enum": ["low", "medium", "high"]}, "minItems": 1},
            "seeds": {"type": "integer", "minimum": 1},
            "versions": {"type": "integer", "minimum": 1},
            "repeats": {"type": "integer", "minimum": 2},
            "families": {"type": "array", "items": {"enum": [f.value for f in RULE_FAMILIES]}},
            "family_sensitivity": {"type": "object", "additionalProperties": _nonneg},
            "judge_tau": {"type": "number", "exclusiveMinimum": 0},
            "master_seed": {"type": "integer", "minimum": 0},
        },
    },
}


class UsageError(StakeRewardError):
    pass


def load_config(path, command: str) -> dict:
    if path is None:
        return {}
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    except OSError as exc:
        raise UsageError(f"cannot read config: {exc}") from None
    validate_config(doc, command)
    return doc


def validate_config(doc, command: str) -> None:
    try:
        jsonschema.validate(doc, SCHEMAS[command])
    except jsonschema.ValidationError as exc:
        raise ValidationError(exc.message, tuple(exc.absolute_path)) from None


def _emit(args, name: str, header, rows) -> None:
    if args.format == "json":
        text = json.dumps([dict(zip(header, (_jsonable(x) for x in r))) for r in rows], indent=2) + "\n"
    else:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([fmt(x) for x in r])
        text = buf.getvalue()
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / f"{name}.{args.format}").write_text(text)
    else:
        sys.stdout.write(text)


def _jsonable(x):
    if isinstance(x, (bool, str, int)) and not isinstance(x, np.integer):
        return x
    x = float(x)
    return fmt(x) if (math.isnan(x) or math.isinf(x)) else x


def _seed(args, default: int = 0) -> int:
    return default if args.seed is None else args.seed


# -- subcommands --------------------------------------------------------------

def cmd_decompose(args) -> int:
    c = load_config(args.config, "decompose")
    u = c.get("utilities", [0.2 + 0.1 * i for i in range(8)])
    n = len(u)
    w = c.get("weights", [1.0 / n] * n)
    sd = c.get("sigma_delta", 0.05)
    spec = NoiseSpec(tuple(sd) if isinstance(sd, list) else (sd,) * n, c.get("sigma_eta", 0.1),
                     c.get("sigma_eps", 0.05))
    uv, wv = UtilityVector(tuple(u)), WeightVector(tuple(w))
    b = decompose_variance(uv, wv, spec)
    est = mc_score_variance(uv, wv, spec, samples=c.get("samples", 200_000), seed=_seed(args),
                            workers=args.workers)
    if b.total == 0:
        ok = est.variance == 0
        z = 0.0
    else:
        ok = est.within(b.total, 3.0)
        z = (est.variance - b.total) / est.std_error_of_variance if est.std_error_of_variance else math.inf
    header = ["n", "term_i_var01", "term_ii_var01", "term_iii_var01", "cross_var01", "analytic_total_var01",
              "mc_total_var01", "mc_std_error", "z_score", "samples", "within_3se"]
    _emit(args, "decompose", header, [[n, b.term_i, b.term_ii, b.term_iii, b.cross, b.total, est.variance,
                                       est.std_error_of_variance, z, est.samples, str(ok).lower()]])
    return EXIT_CHECK if args.check and not ok else EXIT_OK


def cmd_scaling_sweep(args) -> int:
    c = load_config(args.config, "scaling-sweep")
    s2 = c.get("sigma_eta2", 0.01)
    fn = (lambda n: s2) if c.get("regime", "const") == "const" else (lambda n: s2 / n)
    rows = snr_scaling_sweep(c.get("n_values", list(range(2, 11))), fn, c.get("u_dispersion", 0.05),
                             c.get("gap_variance", 0.01), c.get("G", 8))
    _emit(args, "scaling_sweep", ["n", "snr", "predicted_sign_prob"], rows)
    return EXIT_OK


def cmd_sign_prob(args) -> int:
    c = load_config(args.config, "sign-prob")
    G = c.get("G", 8)
    trials = c.get("trials", 1_000_000)
    rows = thresholds_table(G, c.get("snr_values", DEFAULT_SNR_GRID), trials, _seed(args), c.get("sigma_xi", 1.0))
    _emit(args, "sign_prob", ["snr", "predicted_sign_prob", "empirical_sign_prob"], rows)
    if args.check and trials:
        if any(not math.isnan(e) and abs(e - p) > args.tolerance for _, p, e in rows):
            return EXIT_CHECK
    return EXIT_OK


def _three_traveler_doc() -> dict:
    return {
        "stakeholders": [
            {"id": p.id, "conflict_score": p.conflict_score,
             "constraints": [{"id": k.id, "kind": k.kind, "restrictiveness": k.restrictiveness}
                             for k in p.constraints]}
            for p in three_traveler_profiles()
        ],
        "utilities": [0.40, 0.95, 0.80],
        "gamma": 0.5,
        "tau_w": 2.0,
    }


def cmd_weights(args) -> int:
    doc = load_config(args.config, "weights") if args.config else _three_traveler_doc()
    profiles, cfg = profiles_from_dict(doc)
    if args.tau_w is not None:
        cfg = CalibrationConfig(cfg.gamma, cfg.beta, args.tau_w)
    cw = calibrate_weights(profiles, cfg)
    u = doc.get("utilities")
    if u is not None and len(u) != len(profiles):
        raise ValidationError(f"{len(u)} utilities for {len(profiles)} stakeholders", ("utilities",))
    header = ["stakeholder", "difficulty", "weight", "utility_01"]
    rows = [[p.id, d, w, u[i] if u else math.nan]
            for i, (p, d, w) in enumerate(zip(profiles, cw.difficulty, cw.weights.values))]
    if u:
        n = len(u)
        rows.append(["aggregate_uniform", math.nan, math.nan, aggregate([1.0 / n] * n, u)])
        rows.append(["aggregate_calibrated", math.nan, math.nan, aggregate(cw.weights.values, u)])
    _emit(args, "weights", header, rows)
    return EXIT_OK


def cmd_score(args) -> int:
    c = load_config(args.config, "score")
    u = c.get("utilities", [0.40, 0.95, 0.80])
    n = len(u)
    w = tuple(c.get("weights", [1.0 / n] * n))
    spec = NoiseSpec.homogeneous(n, c.get("sigma_delta", 0.05), c.get("sigma_eta", 0.1), c.get("sigma_eps", 0.05))
    profile = JudgeNoiseProfile(spec, c.get("kappa", 1.0), c.get("checklist_flip_prob", 0.05),
                                c.get("repeat_scale", 0.5), c.get("dimension_sigma", 0.05))
    judge = c.get("judge", "direct")
    seed = _seed(args)
    state = LatentPlanState(tuple(u), w, unit_seed=seed)
    rows = []
    for p in c.get("presentation_seeds", [0]):
        for r in range(1, c.get("repeats", 5) + 1):
            rng = child_rng(seed, "score", judge, p, r)
            st = state.with_presentation(p)
            if judge == "decomposed_uniform":
                out = judge_decomposed_fixed(st, profile, (1.0 / n,) * n, rng)
            else:
                out = JUDGES[judge](st, profile, rng)
            rows.append([judge, p, r, out.score])
    _emit(args, "score", ["judge", "presentation_seed", "repeat", "score_1to10"], rows)
    return EXIT_OK


def cmd_variants(args) -> int:
    c = load_config(args.config, "variants")
    if "plan" in c:
        try:
            doc = from_dict(c["plan"])
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"malformed plan: {exc}", ("plan",)) from None
    else:
        doc = synthetic_plan(c.get("n", 3), child_rng(_seed(args), "cli-plan"))
    families = [VariantFamily(f) for f in c.get("families", [f.value for f in RULE_FAMILIES])]
    manifest = write_bundle(doc, args.out or "variants_out", families, c.get("versions", VERSIONS_PER_FAMILY),
                            _seed(args))
    if not args.out:
        sys.stdout.write(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return EXIT_OK


def cmd_consistency(args) -> int:
    c = load_config(args.config, "consistency")
    if args.seed is not None:
        c["master_seed"] = args.seed
    try:
        cfg = config_from_dict({**c, "workers": args.workers})
    except ValueError as exc:
        raise ValidationError(str(exc)) from None
    manifest = run_consistency(cfg, args.out or "consistency_out", args.format)
    sys.stdout.write(f"wrote {manifest['record_counts']['total']} records to {args.out or 'consistency_out'}\n")
    return EXIT_OK


COMMANDS = {
    "decompose": (cmd_decompose, "analytic variance terms vs a Monte Carlo estimate"),
    "scaling-sweep": (cmd_scaling_sweep, "conditional SNR and sign probability across n"),
    "sign-prob": (cmd_sign_prob, "predicted and simulated advantage sign probability"),
    "weights": (cmd_weights, "difficulty-calibrated stakeholder weights"),
    "score": (cmd_score, "score a latent plan state with a synthetic judge"),
    "variants": (cmd_variants, "write presentation variants of a plan"),
    "consistency": (cmd_consistency, "run the synthetic consistency experiment"),
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file")
    common.add_argument("--seed", type=int, help="master seed (u64)")
    common.add_argument("--out", help="output directory (default: stdout for tables)")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--workers", type=int, default=1)
    parser = argparse.ArgumentParser(prog="stakereward", description="Multi-stakeholder reward noise toolkit")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, helptext) in COMMANDS.items():
        p = sub.add_parser(name, parents=[common], help=helptext)
        p.add_argument("--print-schema", action="store_true", help="print the config JSON schema and exit")
        if name in ("decompose", "sign-prob"):
            p.add_argument("--check", action="store_true", help="exit 4 if the built-in check fails")
        if name == "sign-prob":
            p.add_argument("--tolerance", type=float, default=0.003)
        if name == "weights":
            p.add_argument("--tau-w", type=float, default=None)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.seed is not None and not 0 <= args.seed < 2**64:
        parser.print_usage(sys.stderr)
        print("stakereward: error: --seed must be an unsigned 64-bit integer", file=sys.stderr)
        return EXIT_USAGE
    if args.print_schema:
        sys.stdout.write(json.dumps(SCHEMAS[args.command], indent=2) + "\n")
        return EXIT_OK
    try:
        return COMMANDS[args.command][0](args)
    except UsageError as exc:
        print(f"stakereward: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValidationError, StakeRewardError, ValueError) as exc:
        print(f"stakereward: invalid config: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
