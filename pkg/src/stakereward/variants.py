"""Rule-based presentation variants of structured multi-stakeholder plans.

A :class:`PlanDoc` separates *content* (facts, per-stakeholder blocks,
constraint statuses, trade-off claims) from *presentation* (section order,
summary order, beneficiary order, paragraph order, format style, headers,
low-level formatting). Variant families only touch presentation, and
:func:`fingerprint` hashes only content, so every rule-based variant keeps
the fingerprint by construction.
"""

from __future__ import annotations

import hashlib
import itertools
import json
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path
from typing import Callable, Mapping, Sequence

import numpy as np

from .errors import NotApplicableError, UnsupportedFamilyError, ValidationError
from .seeding import as_rng, child_seed

STATUSES = ("satisfied", "partially", "violated")
FORMAT_STYLES = ("prose", "bullets", "numbered", "table")
SECTION_KEYS = ("itinerary", "stakeholders", "shared", "summary", "tradeoffs", "budget")
VERSIONS_PER_FAMILY = 5
# beyond this many states, versions are drawn by rejection sampling
_ENUMERATION_LIMIT = 720

HEADER_SYNONYMS: dict[str, tuple[str, ...]] = {
    "itinerary": ("Itinerary", "Schedule", "Day Plan", "Travel Plan", "Agenda"),
    "stakeholders": ("Traveler Notes", "Per-Traveler Coverage", "Who Gets What", "Individual Needs"),
    "shared": ("Shared Activities", "Joint Items", "Group Benefits", "Common Arrangements"),
    "summary": ("Satisfaction Summary", "How Everyone Fares", "Requirement Check", "Outcome Overview"),
    "tradeoffs": ("Trade-offs", "Compromises", "Conflict Resolution", "Balancing Notes"),
    "budget": ("Budget", "Cost", "Expenses", "Spending"),
}

INDENTS = (0, 2, 4)
BULLETS = ("-", "*", "+")
EMPHASES = ("none", "bold", "italic")
BLANK_LINES = (1, 2)


class VariantFamily(str, Enum):
    STAKEHOLDER_SECTION_ORDER = "stakeholder_section_order"
    SATISFACTION_SUMMARY_ORDER = "satisfaction_summary_order"
    CAUSAL_DIRECTION = "causal_direction"
    UNDERSERVED_EVIDENCE_PLACEMENT = "underserved_evidence_placement"
    SHARED_BENEFIT_ATTRIBUTION = "shared_benefit_attribution"
    TRADEOFF_EXPLANATION_ORDER = "tradeoff_explanation_order"
    GENERIC_PARAPHRASE = "generic_paraphrase"
    FORMAT_CONVERSION = "format_conversion"
    SECTION_HEADER_VARIANT = "section_header_variant"
    LOW_LEVEL_FORMATTING = "low_level_formatting"
    TOPIC_POSITION = "topic_position"


RULE_FAMILIES = (
    VariantFamily.STAKEHOLDER_SECTION_ORDER,
    VariantFamily.SATISFACTION_SUMMARY_ORDER,
    VariantFamily.SHARED_BENEFIT_ATTRIBUTION,
    VariantFamily.TRADEOFF_EXPLANATION_ORDER,
    VariantFamily.FORMAT_CONVERSION,
    VariantFamily.SECTION_HEADER_VARIANT,
    VariantFamily.LOW_LEVEL_FORMATTING,
)
REWRITE_FAMILIES = tuple(f for f in VariantFamily if f not in RULE_FAMILIES)


@dataclass(frozen=True)
class Fact:
    location: str
    time: str
    price: float
    activity: str

    def key(self):
        return (self.time, self.location, self.activity, self.price)


@dataclass(frozen=True)
class Section:
    stakeholder: str
    blocks: tuple[str, ...] = ()


@dataclass(frozen=True)
class SharedItem:
    item: str
    beneficiaries: tuple[str, ...]


@dataclass(frozen=True)
class ConstraintStatus:
    stakeholder: str
    id: str
    kind: str
    status: str


@dataclass(frozen=True)
class Formatting:
    indent: int = 0
    bullet: str = "-"
    emphasis: str = "none"
    blank_lines: int = 1


@dataclass(frozen=True)
class PlanDoc:
    stakeholders: tuple[str, ...]
    sections: tuple[Section, ...] = ()
    summary: tuple[tuple[str, str], ...] = ()
    tradeoffs: tuple[str, ...] = ()
    shared_items: tuple[SharedItem, ...] = ()
    facts: frozenset = frozenset()
    constraints: tuple[ConstraintStatus, ...] = ()
    headers: Mapping[str, str] = field(default_factory=dict)
    format_style: str = "prose"
    formatting: Formatting = Formatting()
    quality: str = ""

    def __post_init__(self):
        object.__setattr__(self, "facts", frozenset(self.facts))
        hdr = {k: HEADER_SYNONYMS[k][0] for k in SECTION_KEYS}
        hdr.update(self.headers)
        object.__setattr__(self, "headers", hdr)

    # -- presentation state used for version distinctness -------------------
    def presentation(self):
        return (
            tuple(s.stakeholder for s in self.sections),
            tuple(sid for sid, _ in self.summary),
            tuple(self.tradeoffs),
            tuple(s.beneficiaries for s in self.shared_items),
            tuple(sorted(self.headers.items())),
            self.format_style,
            effective_formatting(self),
        )


@dataclass(frozen=True)
class SemanticFingerprint:
    digest: str


def effective_formatting(doc: PlanDoc) -> Formatting:
    """Formatting with the bullet marker blanked out where the style never draws it."""
    if doc.format_style == "bullets":
        return doc.formatting
    return replace(doc.formatting, bullet="")


def validate(doc: PlanDoc) -> None:
    """Raise :class:`ValidationError` on dangling ids or malformed fields."""
    ids = set(doc.stakeholders)
    if len(ids) != len(doc.stakeholders):
        raise ValidationError("duplicate stakeholder ids", ("stakeholders",))

    def check(sid, path):
        if sid not in ids:
            raise ValidationError(f"dangling stakeholder id {sid!r}", path)

    seen = set()
    for i, s in enumerate(doc.sections):
        check(s.stakeholder, ("sections", i))
        if s.stakeholder in seen:
            raise ValidationError(f"duplicate section for {s.stakeholder!r}", ("sections", i))
        seen.add(s.stakeholder)
    seen = set()
    for i, (sid, status) in enumerate(doc.summary):
        check(sid, ("summary", i))
        if status not in STATUSES:
            raise ValidationError(f"unknown status {status!r}", ("summary", i))
        if sid in seen:
            raise ValidationError(f"duplicate summary entry for {sid!r}", ("summary", i))
        seen.add(sid)
    for i, item in enumerate(doc.shared_items):
        for sid in item.beneficiaries:
            check(sid, ("shared_items", i))
        if len(set(item.beneficiaries)) != len(item.beneficiaries):
            raise ValidationError("duplicate beneficiary", ("shared_items", i))
    for i, c in enumerate(doc.constraints):
        check(c.stakeholder, ("constraints", i))
        if c.status not in STATUSES:
            raise ValidationError(f"unknown status {c.status!r}", ("constraints", i))
        if c.kind not in ("hard", "soft"):
            raise ValidationError(f"unknown constraint kind {c.kind!r}", ("constraints", i))
    if doc.format_style not in FORMAT_STYLES:
        raise ValidationError(f"unknown format style {doc.format_style!r}", ("format_style",))
    fm = doc.formatting
    if fm.emphasis not in EMPHASES or fm.indent < 0 or fm.blank_lines < 1:
        raise ValidationError(f"bad formatting options {fm}", ("formatting",))
    unknown = set(doc.headers) - set(SECTION_KEYS)
    if unknown:
        raise ValidationError(f"unknown header keys {sorted(unknown)}", ("headers",))


def _content(doc: PlanDoc) -> dict:
    return {
        "stakeholders": sorted(doc.stakeholders),
        "sections": sorted([s.stakeholder, list(s.blocks)] for s in doc.sections),
        "summary": sorted([sid, st] for sid, st in doc.summary),
        "tradeoffs": sorted(doc.tradeoffs),
        "shared_items": sorted([it.item, sorted(it.beneficiaries)] for it in doc.shared_items),
        "facts": sorted([f.location, f.time, repr(float(f.price)), f.activity] for f in doc.facts),
        "constraints": sorted([c.stakeholder, c.id, c.kind, c.status] for c in doc.constraints),
        "quality": doc.quality,
    }


def fingerprint(doc: PlanDoc) -> SemanticFingerprint:
    validate(doc)
    payload = json.dumps(_content(doc), sort_keys=True, separators=(",", ":"), ensure_ascii=False)
    return SemanticFingerprint(hashlib.sha256(payload.encode("utf-8")).hexdigest())


# -- rendering ---------------------------------------------------------------

def _header(doc: PlanDoc, key: str) -> str:
    label = doc.headers[key]
    emph = doc.formatting.emphasis
    if emph == "bold":
        return f"**{label}**"
    if emph == "italic":
        return f"_{label}_"
    return f"{label}:"


def _lines(doc: PlanDoc, items: Sequence[str]) -> list[str]:
    pad = " " * doc.formatting.indent
    style = doc.format_style
    if style == "bullets":
        return [f"{pad}{doc.formatting.bullet} {x}" for x in items]
    if style == "numbered":
        return [f"{pad}{k}. {x}" for k, x in enumerate(items, 1)]
    if style == "table":
        return [f"{pad}| {x} |" for x in items]
    return [pad + " ".join(x.rstrip(".") + "." for x in items)] if items else []


def _fact_line(f: Fact) -> str:
    return f"{f.time} {f.activity} at {f.location} ({f.price:.2f})"


def render(doc: PlanDoc) -> str:
    """Deterministic text for a plan.

    Every presentation field shows up in the output except the bullet marker
    for non-bullet styles (see :func:`effective_formatting`).
    """
    validate(doc)
    pad = " " * doc.formatting.indent
    blocks: list[list[str]] = []
    facts = sorted(doc.facts, key=Fact.key)
    if doc.format_style == "table":
        rows = [f"{pad}| time | activity | location | price |", f"{pad}|---|---|---|---|"]
        rows += [f"{pad}| {f.time} | {f.activity} | {f.location} | {f.price:.2f} |" for f in facts]
        blocks.append([_header(doc, "itinerary")] + rows)
    else:
        blocks.append([_header(doc, "itinerary")] + _lines(doc, [_fact_line(f) for f in facts]))
    sec = [_header(doc, "stakeholders")]
    for s in doc.sections:
        sec.append(f"{pad}[{s.stakeholder}]")
        sec += _lines(doc, list(s.blocks))
    blocks.append(sec)
    if doc.shared_items:
        blocks.append([_header(doc, "shared")] + _lines(
            doc, [f"{it.item} serves {', '.join(it.beneficiaries)}" for it in doc.shared_items]))
    if doc.summary:
        blocks.append([_header(doc, "summary")] + _lines(doc, [f"{sid}: {st}" for sid, st in doc.summary]))
    if doc.tradeoffs:
        blocks.append([_header(doc, "tradeoffs")] + _lines(doc, list(doc.tradeoffs)))
    total = math.fsum(f.price for f in doc.facts)
    blocks.append([_header(doc, "budget"), f"{pad}Total: {total:.2f}"])
    sep = "\n" * (doc.formatting.blank_lines + 1)
    return sep.join("\n".join(b) for b in blocks) + "\n"


# -- variant families --------------------------------------------------------

def _permutation_states(k: int, rng: np.random.Generator, limit: int):
    """Distinct non-identity permutations of ``range(k)``, in random order."""
    identity = tuple(range(k))
    if math.factorial(k) <= _ENUMERATION_LIMIT:
        perms = [p for p in itertools.permutations(range(k)) if p != identity]
        order = rng.permutation(len(perms))
        return [perms[i] for i in order[:limit]]
    out, seen = [], {identity}
    # fewer than limit << k! states are requested, so rejection terminates fast
    while len(out) < limit:
        p = tuple(int(x) for x in rng.permutation(k))
        if p not in seen:
            seen.add(p)
            out.append(p)
    return out


def _product_states(sizes: Sequence[int], rng: np.random.Generator, limit: int):
    """Distinct non-identity tuples of per-slot permutations, in random order."""
    identity = tuple(tuple(range(k)) for k in sizes)
    total = math.prod(math.factorial(k) for k in sizes)
    if total <= _ENUMERATION_LIMIT:
        states = [s for s in itertools.product(*(itertools.permutations(range(k)) for k in sizes))
                  if s != identity]
        order = rng.permutation(len(states))
        return [states[i] for i in order[:limit]]
    out, seen = [], {identity}
    while len(out) < min(limit, total - 1):
        s = tuple(tuple(int(x) for x in rng.permutation(k)) for k in sizes)
        if s not in seen:
            seen.add(s)
            out.append(s)
    return out


def _section_order(doc, rng, limit):
    if len(doc.stakeholders) < 3 or len(doc.sections) < 3:
        raise NotApplicableError("stakeholder_section_order requires >= 3 stakeholders")
    for p in _permutation_states(len(doc.sections), rng, limit):
        yield replace(doc, sections=tuple(doc.sections[i] for i in p))


def _summary_order(doc, rng, limit):
    if len(doc.stakeholders) < 3 or len(doc.summary) < 3:
        raise NotApplicableError("satisfaction_summary_order requires >= 3 stakeholders")
    for p in _permutation_states(len(doc.summary), rng, limit):
        yield replace(doc, summary=tuple(doc.summary[i] for i in p))


def _shared_attribution(doc, rng, limit):
    slots = [i for i, it in enumerate(doc.shared_items) if len(it.beneficiaries) >= 2]
    if not slots:
        raise NotApplicableError("no shared item with >= 2 beneficiaries")
    sizes = [len(doc.shared_items[i].beneficiaries) for i in slots]
    for state in _product_states(sizes, rng, limit):
        items = list(doc.shared_items)
        for slot, perm in zip(slots, state):
            it = items[slot]
            items[slot] = SharedItem(it.item, tuple(it.beneficiaries[j] for j in perm))
        yield replace(doc, shared_items=tuple(items))


def _tradeoff_order(doc, rng, limit):
    if len(doc.tradeoffs) < 2:
        raise NotApplicableError("tradeoff_explanation_order requires >= 2 paragraphs")
    for p in _permutation_states(len(doc.tradeoffs), rng, limit):
        yield replace(doc, tradeoffs=tuple(doc.tradeoffs[i] for i in p))


def _format_conversion(doc, rng, limit):
    start = FORMAT_STYLES.index(doc.format_style)
    for v in range(1, len(FORMAT_STYLES)):
        yield replace(doc, format_style=FORMAT_STYLES[(start + v) % len(FORMAT_STYLES)])


def _header_variant(doc, rng, limit, synonyms=None):
    table = dict(HEADER_SYNONYMS)
    if synonyms:
        table.update({k: tuple(v) for k, v in synonyms.items()})
    choices = []
    for key in SECTION_KEYS:
        labels = list(dict.fromkeys((doc.headers[key],) + tuple(table.get(key, ()))))
        choices.append(labels)
    current = tuple(doc.headers[k] for k in SECTION_KEYS)
    total = math.prod(len(c) for c in choices)
    seen = {current}
    attempts = 0
    while len(seen) - 1 < min(limit, total - 1) and attempts < 100 * limit:
        attempts += 1
        state = tuple(c[int(rng.integers(len(c)))] for c in choices)
        if state in seen:
            continue
        seen.add(state)
        yield replace(doc, headers=dict(zip(SECTION_KEYS, state)))


def _low_level(doc, rng, limit):
    states = [Formatting(i, b, e, n) for i, b, e, n in itertools.product(INDENTS, BULLETS, EMPHASES, BLANK_LINES)]
    order = rng.permutation(len(states))
    seen = {effective_formatting(doc)}
    for k in order:
        cand = replace(doc, formatting=states[k])
        eff = effective_formatting(cand)
        if eff in seen:
            continue
        seen.add(eff)
        yield cand


_RULES: dict[VariantFamily, Callable] = {
    VariantFamily.STAKEHOLDER_SECTION_ORDER: _section_order,
    VariantFamily.SATISFACTION_SUMMARY_ORDER: _summary_order,
    VariantFamily.SHARED_BENEFIT_ATTRIBUTION: _shared_attribution,
    VariantFamily.TRADEOFF_EXPLANATION_ORDER: _tradeoff_order,
    VariantFamily.FORMAT_CONVERSION: _format_conversion,
    VariantFamily.SECTION_HEADER_VARIANT: _header_variant,
    VariantFamily.LOW_LEVEL_FORMATTING: _low_level,
}

# Rewriters for the families that need free-text rewriting; none ship by default.
_REWRITERS: dict[VariantFamily, Callable[[PlanDoc, int, np.random.Generator], PlanDoc]] = {}


def register_rewriter(family, fn: Callable[[PlanDoc, int, np.random.Generator], PlanDoc]) -> None:
    """Plug in an external rewriter for one of the rewrite families."""
    family = VariantFamily(family)
    if family in RULE_FAMILIES:
        raise ValueError(f"{family.value} is rule-based and cannot be overridden")
    _REWRITERS[family] = fn


def unregister_rewriter(family) -> None:
    _REWRITERS.pop(VariantFamily(family), None)


def _seed_of(rng) -> int:
    if isinstance(rng, (int, np.integer)):
        return int(rng)
    return int(as_rng(rng).integers(2**63))


def variant_versions(doc: PlanDoc, family, count: int = VERSIONS_PER_FAMILY, rng=0,
                     synonyms: Mapping[str, Sequence[str]] | None = None) -> list[PlanDoc]:
    """Up to ``count`` distinct presentation variants of ``doc`` for a rule family.

    Returns fewer than ``count`` when the family runs out of distinct states;
    raises :class:`NotApplicableError` when the family cannot apply at all.
    """
    family = VariantFamily(family)
    validate(doc)
    if family not in RULE_FAMILIES:
        raise UnsupportedFamilyError(f"{family.value} needs a registered rewriter")
    gen = np.random.default_rng(_seed_of(rng))
    rule = _RULES[family]
    it = rule(doc, gen, count, synonyms) if family is VariantFamily.SECTION_HEADER_VARIANT else rule(doc, gen, count)
    out, seen = [], {doc.presentation()}
    for cand in it:
        p = cand.presentation()
        if p in seen:
            continue
        seen.add(p)
        out.append(cand)
        if len(out) == count:
            break
    return out


def apply_variant(doc: PlanDoc, family, version: int, rng=0,
                  synonyms: Mapping[str, Sequence[str]] | None = None) -> PlanDoc:
    """Version ``version`` (1-based) of ``family`` applied to ``doc``.

    Versions for one ``(doc, family, rng)`` are pairwise distinct. Raises
    :class:`NotApplicableError` when the family has fewer than ``version``
    distinct states for this doc.
    """
    family = VariantFamily(family)
    if version < 1:
        raise ValueError("version must be >= 1")
    if family in REWRITE_FAMILIES:
        fn = _REWRITERS.get(family)
        if fn is None:
            raise UnsupportedFamilyError(f"{family.value} needs a registered rewriter")
        out = fn(doc, version, np.random.default_rng(_seed_of(rng)))
        if fingerprint(out) != fingerprint(doc):
            raise ValidationError(f"rewriter for {family.value} changed plan content")
        return out
    versions = variant_versions(doc, family, version, rng, synonyms)
    if len(versions) < version:
        raise NotApplicableError(
            f"{family.value} has only {len(versions)} distinct versions for this plan")
    return versions[version - 1]


# -- JSON --------------------------------------------------------------------

def to_dict(doc: PlanDoc) -> dict:
    return {
        "stakeholders": list(doc.stakeholders),
        "sections": [{"stakeholder": s.stakeholder, "blocks": list(s.blocks)} for s in doc.sections],
        "summary": [{"stakeholder": sid, "status": st} for sid, st in doc.summary],
        "tradeoffs": list(doc.tradeoffs),
        "shared_items": [{"item": it.item, "beneficiaries": list(it.beneficiaries)} for it in doc.shared_items],
        "facts": [{"location": f.location, "time": f.time, "price": f.price, "activity": f.activity}
                  for f in sorted(doc.facts, key=Fact.key)],
        "constraints": [{"stakeholder": c.stakeholder, "id": c.id, "kind": c.kind, "status": c.status}
                        for c in doc.constraints],
        "headers": dict(doc.headers),
        "format_style": doc.format_style,
        "formatting": {"indent": doc.formatting.indent, "bullet": doc.formatting.bullet,
                       "emphasis": doc.formatting.emphasis, "blank_lines": doc.formatting.blank_lines},
        "quality": doc.quality,
    }


def from_dict(d: Mapping) -> PlanDoc:
    try:
        fmt = d.get("formatting", {})
        doc = PlanDoc(
            stakeholders=tuple(d["stakeholders"]),
            sections=tuple(Section(s["stakeholder"], tuple(s.get("blocks", ()))) for s in d.get("sections", ())),
            summary=tuple((s["stakeholder"], s["status"]) for s in d.get("summary", ())),
            tradeoffs=tuple(d.get("tradeoffs", ())),
            shared_items=tuple(SharedItem(s["item"], tuple(s["beneficiaries"])) for s in d.get("shared_items", ())),
            facts=frozenset(Fact(f["location"], f["time"], float(f["price"]), f["activity"])
                            for f in d.get("facts", ())),
            constraints=tuple(ConstraintStatus(c["stakeholder"], c["id"], c["kind"], c["status"])
                              for c in d.get("constraints", ())),
            headers=dict(d.get("headers", {})),
            format_style=d.get("format_style", "prose"),
            formatting=Formatting(int(fmt.get("indent", 0)), fmt.get("bullet", "-"),
                                  fmt.get("emphasis", "none"), int(fmt.get("blank_lines", 1))),
            quality=d.get("quality", ""),
        )
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"malformed plan document: {exc!r}") from None
    validate(doc)
    return doc


def write_bundle(doc: PlanDoc, out_dir, families=RULE_FAMILIES, versions: int = VERSIONS_PER_FAMILY,
                 seed: int = 0) -> dict:
    """Write metadata JSON and rendered text per (family, version) plus a manifest."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    base_fp = fingerprint(doc).digest
    manifest = {"fingerprint": base_fp, "variants": [], "skipped": []}
    (out / "original.json").write_text(json.dumps(to_dict(doc), indent=2, sort_keys=True) + "\n")
    (out / "original.txt").write_text(render(doc))
    for fam in families:
        fam = VariantFamily(fam)
        try:
            docs = variant_versions(doc, fam, versions, _family_seed(seed, fam))
        except NotApplicableError as exc:
            manifest["skipped"].append({"family": fam.value, "reason": str(exc)})
            continue
        if len(docs) < versions:
            manifest["skipped"].append({"family": fam.value,
                                        "reason": f"only {len(docs)} of {versions} versions available"})
        for v, vd in enumerate(docs, 1):
            stem = f"{fam.value}_v{v}"
            (out / f"{stem}.json").write_text(json.dumps(to_dict(vd), indent=2, sort_keys=True) + "\n")
            (out / f"{stem}.txt").write_text(render(vd))
            manifest["variants"].append({"family": fam.value, "version": v,
                                         "fingerprint": fingerprint(vd).digest,
                                         "metadata": f"{stem}.json", "text": f"{stem}.txt"})
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return manifest


def _family_seed(seed: int, family: VariantFamily) -> int:
    return child_seed(seed, "variants", family.value)


# -- synthetic plans -----------------------------------------------------------

_LOCATIONS = ("Old Town", "Harbor", "Museum", "Botanical Garden", "Night Market", "Temple",
              "Beach", "Tea House", "Gallery", "Lookout")
_ACTIVITIES = ("walk", "lunch", "tour", "photo stop", "dinner", "shopping", "rest", "boat ride")


def status_for(u: float) -> str:
    if u >= 0.7:
        return "satisfied"
    if u >= 0.4:
        return "partially"
    return "violated"


def synthetic_plan(n: int, rng, utilities: Sequence[float] | None = None, quality: str = "",
                   n_facts: int | None = None) -> PlanDoc:
    """Random structured plan with ``n`` stakeholders.

    Statuses follow ``utilities`` when given (>= 0.7 satisfied, >= 0.4
    partially, else violated); otherwise they are drawn at random.
    """
    gen = as_rng(rng)
    ids = tuple(f"user{i + 1}" for i in range(n))
    if utilities is None:
        utilities = gen.uniform(0, 1, n)
    n_facts = int(gen.integers(3, 8)) if n_facts is None else n_facts
    facts = set()
    while len(facts) < n_facts:
        facts.add(Fact(str(gen.choice(_LOCATIONS)), f"{int(gen.integers(8, 21)):02d}:{int(gen.integers(0, 4)) * 15:02d}",
                       float(round(gen.uniform(0, 300), 2)), str(gen.choice(_ACTIVITIES))))
    sections, summary, constraints = [], [], []
    for sid, u in zip(ids, utilities):
        st = status_for(float(u))
        nb = int(gen.integers(1, 4))
        sections.append(Section(sid, tuple(f"{sid} note {k}: {gen.choice(_ACTIVITIES)} at {gen.choice(_LOCATIONS)}"
                                           for k in range(nb))))
        summary.append((sid, st))
        for k in range(int(gen.integers(1, 4))):
            kind = "hard" if k == 0 else "soft"
            constraints.append(ConstraintStatus(sid, f"{sid}-c{k}", kind, st if k == 0 else str(gen.choice(STATUSES))))
    tradeoffs = tuple(f"Trade-off {k}: {ids[k % n]} yields to {ids[(k + 1) % n]} on {gen.choice(_ACTIVITIES)}"
                      for k in range(int(gen.integers(1, 4))))
    shared = []
    for k in range(int(gen.integers(1, 3))):
        m = int(gen.integers(2, n + 1)) if n >= 2 else 1
        members = tuple(ids[j] for j in sorted(gen.choice(n, size=m, replace=False)))
        shared.append(SharedItem(f"shared item {k}", members))
    return PlanDoc(ids, tuple(sections), tuple(summary), tradeoffs, tuple(shared), frozenset(facts),
                   tuple(constraints), quality=quality)
