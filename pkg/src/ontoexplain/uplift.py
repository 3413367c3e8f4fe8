"""Semantic uplift: feature-value pairs -> weighted ontology concepts.

Two steps, as in basic-level categorization: a rule file assigns each
``feature=value`` pair a knowledge-graph category, then a mapping table
resolves that category to a domain-ontology concept.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

from .errors import RuleError, SemanticCoverageError
from .ontology import Ontology, WeightedConcept, distances_from

EDIT_WEIGHT = 0.5
DEFAULT_THETA = 0.6


@dataclass(frozen=True)
class BlcRule:
    """One categorization rule.

    The tested value is ``value + offset``, or, when ``subtract_from`` names
    another feature of the same row, ``row[subtract_from] + offset - value``
    (e.g. birth year from operation year and age).
    """

    feature: str
    concept: str
    lo: float | None = None
    hi: float | None = None
    equals: object = None
    values: tuple = ()
    offset: float = 0.0
    subtract_from: str | None = None

    @property
    def is_interval(self) -> bool:
        return self.lo is not None or self.hi is not None

    def tested_value(self, value, row: Mapping | None):
        if self.subtract_from is not None:
            if row is None or self.subtract_from not in row:
                return None
            return float(row[self.subtract_from]) + self.offset - float(value)
        if self.offset and _is_number(value):
            return float(value) + self.offset
        return value

    def fires(self, value, row=None) -> bool:
        v = self.tested_value(value, row)
        if v is None:
            return False
        if self.is_interval:
            if not _is_number(v):
                return False
            lo = -math.inf if self.lo is None else self.lo
            hi = math.inf if self.hi is None else self.hi
            return lo <= float(v) <= hi
        if self.values:
            return any(_same(v, x) for x in self.values)
        return _same(v, self.equals)


def _is_number(v) -> bool:
    if isinstance(v, bool):
        return False
    if isinstance(v, (int, float)):
        return True
    try:
        float(v)
    except (TypeError, ValueError):
        return False
    return True


def _same(a, b) -> bool:
    if _is_number(a) and _is_number(b):
        return float(a) == float(b)
    return str(a) == str(b)


@dataclass(frozen=True)
class BlcRuleSet:
    rules: tuple[BlcRule, ...]

    def __post_init__(self):
        groups: dict[tuple, list[BlcRule]] = {}
        for r in self.rules:
            if r.lo is not None and r.hi is not None and r.lo > r.hi:
                raise RuleError(f"rule for {r.feature!r} -> {r.concept!r}: min {r.lo} > max {r.hi}")
            groups.setdefault((r.feature, r.subtract_from, r.offset), []).append(r)
        for (feat, _, _), rules in groups.items():
            ivals = sorted(
                ((-math.inf if r.lo is None else r.lo, math.inf if r.hi is None else r.hi, r)
                 for r in rules if r.is_interval), key=lambda t: (t[0], t[1]))
            for (lo1, hi1, r1), (lo2, hi2, r2) in zip(ivals, ivals[1:]):
                if lo2 <= hi1:
                    raise RuleError(
                        f"overlapping intervals for feature {feat!r}: {r1.concept!r} and {r2.concept!r}")
            points = [v for r in rules if not r.is_interval for v in (r.values or (r.equals,))]
            for i, v in enumerate(points):
                if any(_same(v, w) for w in points[i + 1:]):
                    raise RuleError(f"feature {feat!r}: value {v!r} matched by more than one rule")
                for lo, hi, r in ivals:
                    if _is_number(v) and lo <= float(v) <= hi:
                        raise RuleError(f"feature {feat!r}: value {v!r} also inside interval of {r.concept!r}")

    def for_feature(self, feature: str):
        return [r for r in self.rules if r.feature == feature]

    @classmethod
    def from_list(cls, items: Sequence[Mapping]) -> "BlcRuleSet":
        rules = []
        for i, d in enumerate(items):
            try:
                rules.append(BlcRule(
                    feature=str(d["feature"]),
                    concept=str(d["concept"]),
                    lo=None if d.get("min") is None else float(d["min"]),
                    hi=None if d.get("max") is None else float(d["max"]),
                    equals=d.get("equals"),
                    values=tuple(d.get("in", ())),
                    offset=float(d.get("offset", 0.0)),
                    subtract_from=d.get("subtract_from"),
                ))
            except KeyError as exc:
                raise RuleError(f"rule #{i}: missing key {exc}") from None
            r = rules[-1]
            if not r.is_interval and not r.values and r.equals is None:
                raise RuleError(f"rule #{i}: needs min/max, equals or in")
        return cls(tuple(rules))


def load_rules(path) -> BlcRuleSet:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    if isinstance(doc, Mapping):
        doc = doc.get("rules", [])
    return BlcRuleSet.from_list(doc)


@dataclass(frozen=True)
class MappingTable:
    entries: dict = field(default_factory=dict)
    theta: float = DEFAULT_THETA

    def __post_init__(self):
        if not 0 <= self.theta <= 1:
            raise RuleError(f"theta must lie in [0, 1], got {self.theta}")

    def validate(self, o: Ontology):
        for text, cid in self.entries.items():
            if cid not in o.concepts:
                raise RuleError(f"mapping {text!r} -> {cid!r}: concept not in ontology")


def load_mapping(path) -> MappingTable:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    return MappingTable(dict(doc.get("entries", {})), float(doc.get("theta", DEFAULT_THETA)))


def apply_blc(rules: BlcRuleSet, feature: str, value, row: Mapping | None = None) -> str | None:
    for r in rules.for_feature(feature):
        if r.fires(value, row):
            return r.concept
    return None


def levenshtein(a: str, b: str) -> int:
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, 1):
        cur = [i]
        for j, cb in enumerate(b, 1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (ca != cb)))
        prev = cur
    return prev[-1]


def edit_similarity(a: str, b: str) -> float:
    a, b = a.lower(), b.lower()
    if not a and not b:
        return 1.0
    return 1.0 - levenshtein(a, b) / max(len(a), len(b))


def map_to_domain(table: MappingTable, o: Ontology, kg_concept: str, context=()) -> str | None:
    """Resolve a category to an ontology concept.

    Exact table hits win. Otherwise every concept label is scored by edit
    similarity, blended 50/50 with structural closeness to the concepts in
    ``context`` (those already mapped for the same point) when there are any.
    """
    if kg_concept in table.entries:
        return table.entries[kg_concept]
    context = [c for c in context if c in o.concepts]
    near = {}
    for c in context:
        for t, d in distances_from(o, c).items():
            near[t] = min(d, near.get(t, math.inf))
    best, best_score = None, -1.0
    for cid in sorted(o.concepts):
        sim = max(edit_similarity(kg_concept, o.label(cid)), edit_similarity(kg_concept, cid))
        if context:
            struct = 1.0 / (1.0 + near[cid]) if cid in near else 0.0
            score = EDIT_WEIGHT * sim + (1 - EDIT_WEIGHT) * struct
        else:
            score = sim
        if score > best_score:
            best, best_score = cid, score
    return best if best_score >= table.theta else None


def uplift_point(rules: BlcRuleSet, table: MappingTable, o: Ontology, point: Mapping, alpha: float = 1.0):
    """Split one point into (concept projection, unmapped feature-value pairs)."""
    if not alpha > 0:
        raise ValueError("point weight must be positive")
    concepts: list[WeightedConcept] = []
    unmapped: list[tuple[str, object]] = []
    mapped: list[str] = []
    for feature, value in point.items():
        kg = apply_blc(rules, feature, value, point)
        cid = None if kg is None else map_to_domain(table, o, kg, mapped)
        if cid is None:
            unmapped.append((feature, value))
        else:
            mapped.append(cid)
            concepts.append(WeightedConcept(cid, alpha))
    return concepts, unmapped


@dataclass(frozen=True)
class InputConceptSet:
    concepts: tuple[WeightedConcept, ...]
    residual: dict  # row index -> unmapped (feature, value) pairs
    provenance: dict  # concept id -> row indices yielding it

    def weights(self) -> dict[str, float]:
        return {wc.concept: wc.weight for wc in self.concepts}

    def __len__(self):
        return len(self.concepts)


def build_input_concepts(rules, table, o, evidence, ds, mode: str = "proportion") -> InputConceptSet:
    """Accumulate concept weights over weighted evidence points.

    ``proportion`` divides each concept's summed point weight by the total
    evidence weight; ``sum`` keeps the raw sums.
    """
    if not evidence:
        raise SemanticCoverageError("no evidence points to uplift")
    if mode not in ("proportion", "sum"):
        raise ValueError(f"unknown accumulation mode {mode!r}")
    totals: dict[str, float] = {}
    prov: dict[str, list[int]] = {}
    residual = {}
    total_alpha = 0.0
    for wp in evidence:
        raw = ds.raw_rows[wp.row_index]
        cs, rest = uplift_point(rules, table, o, raw, wp.weight)
        total_alpha += wp.weight
        residual[wp.row_index] = rest
        for cid in sorted({c.concept for c in cs}):
            totals[cid] = totals.get(cid, 0.0) + wp.weight
            prov.setdefault(cid, []).append(wp.row_index)
    if not totals:
        raise SemanticCoverageError("semantic coverage is zero: no feature value mapped to a concept")
    if mode == "proportion":
        totals = {c: w / total_alpha for c, w in totals.items()}
    ordered = sorted(totals.items(), key=lambda kv: (-kv[1], kv[0]))
    return InputConceptSet(
        tuple(WeightedConcept(c, w) for c, w in ordered),
        residual,
        {c: sorted(rows) for c, rows in prov.items()},
    )
