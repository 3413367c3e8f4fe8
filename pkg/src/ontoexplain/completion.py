"""Explanation concept completion by random-restart, depth-bounded uplift.

Each restart draws a random subset of the cleaned input concepts and lifts
it level by level to concepts that at least two frontier concepts point
to. The last non-empty frontier is scored with

    total = a1 * s_v + a2 * s_l + a3 * s_d

where s_v = 1/|inputs consumed|, s_l = 1/|output| and s_d sums each output
concept's weight, split over its source inputs, divided by the hop distance
to that input.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .ontology import Ontology, WeightedConcept, concept_distance

SCORE_TOL = 1e-12


@dataclass(frozen=True)
class CompletionParams:
    k: int = 3
    h: int = 20
    mp: int = 5
    a1: float = 1 / 3
    a2: float = 1 / 3
    a3: float = 1 / 3
    seed: int = 0

    def __post_init__(self):
        if self.k < 1 or self.h < 1 or self.mp < 1:
            raise ValueError("k, h and mp must all be >= 1")
        if min(self.a1, self.a2, self.a3) < 0 or self.a1 + self.a2 + self.a3 <= 0:
            raise ValueError("score weights must be >= 0 with a positive sum")


@dataclass(frozen=True)
class ScoredConceptSet:
    concepts: tuple[WeightedConcept, ...]
    s_v: float
    s_l: float
    s_d: float
    total: float
    # output concept -> {source input concept: share of its weight}
    contributions: dict = field(default_factory=dict)
    depth: int = 0
    restart: int = 0

    @property
    def matching_map(self) -> dict[str, frozenset[str]]:
        return {c: frozenset(src) for c, src in self.contributions.items()}

    def weights(self) -> dict[str, float]:
        return {wc.concept: wc.weight for wc in self.concepts}

    def ids(self) -> list[str]:
        return [wc.concept for wc in self.concepts]

    def __len__(self):
        return len(self.concepts)


def total_score(o: Ontology, contributions: dict[str, dict[str, float]], params: CompletionParams):
    """Score a candidate given each output concept's per-input weight shares.

    Returns ``(s_v, s_l, s_d, total)``. Identity matchings add nothing to s_d.
    """
    if not contributions:
        raise ValueError("empty candidate")
    sources = set()
    s_d = 0.0
    for out, shares in contributions.items():
        if not shares:
            raise ValueError(f"output concept {out!r} has no preimage")
        for src, share in shares.items():
            sources.add(src)
            if src == out:
                continue
            d = concept_distance(o, src, out)
            if d and math.isfinite(d):
                s_d += share / d
    s_v = 1.0 / len(sources)
    s_l = 1.0 / len(contributions)
    return s_v, s_l, s_d, params.a1 * s_v + params.a2 * s_l + params.a3 * s_d


def remove_subsumed(o: Ontology, v) -> list[WeightedConcept]:
    """Merge duplicates, fold subsumed concepts into their most specific surviving subsumer."""
    merged: dict[str, float] = {}
    for wc in v:
        merged[wc.concept] = merged.get(wc.concept, 0.0) + wc.weight
    ids = set(merged)
    survivors = {c for c in ids if not any(a != c and a in ids for a in o.ancestors[c])}
    out = {c: merged[c] for c in survivors}
    for c in sorted(ids - survivors):
        subsumers = [a for a in o.ancestors[c] if a in survivors]
        # most specific: the one with the most subsumers of its own
        target = max(sorted(subsumers), key=lambda a: len(o.ancestors[a]))
        out[target] += merged[c]
    return [WeightedConcept(c, w) for c, w in sorted(out.items(), key=lambda kv: (-kv[1], kv[0]))]


def _random_subset(items, rng):
    while True:
        picks = [c for c in items if rng.random() < 0.5]
        if picks:
            return picks


def expand(o: Ontology, subset: dict[str, float], params: CompletionParams):
    """Deterministic level expansion of one subset.

    Returns ``(frontiers, contributions)`` where ``frontiers[i]`` is the
    frontier after level ``i`` (level 0 is the subset itself, weights as
    given) and ``contributions[i]`` maps each frontier concept to its
    per-input weight shares.
    """
    frontier = dict(subset)
    contrib = {c: {c: w} for c, w in subset.items()}
    frontiers, contribs = [frontier], [contrib]
    visited = set(subset)
    for _ in range(params.k):
        cand: dict[str, dict[str, float]] = {}
        for c in sorted(frontier):
            for t, lam in o.out_edges[c].items():
                if t in visited:
                    continue
                cand.setdefault(t, {})[c] = lam
        cand = {t: m for t, m in cand.items() if len(m) >= 2}
        if not cand:
            break
        gamma = {t: sum(frontier[c] * lam for c, lam in m.items()) for t, m in cand.items()}
        top = sorted(gamma, key=lambda t: (-gamma[t], t))[: params.mp]
        new_contrib = {}
        for t in top:
            shares: dict[str, float] = {}
            for c, lam in cand[t].items():
                for src, s in contrib[c].items():
                    shares[src] = shares.get(src, 0.0) + s * lam
            new_contrib[t] = shares
        visited.update(top)
        frontier = {t: gamma[t] for t in top}
        contrib = new_contrib
        frontiers.append(frontier)
        contribs.append(contrib)
    return frontiers, contribs


def _scored(o, frontier, contrib, params, depth, restart):
    s_v, s_l, s_d, total = total_score(o, contrib, params)
    concepts = tuple(WeightedConcept(c, w) for c, w in sorted(frontier.items(), key=lambda kv: (-kv[1], kv[0])))
    return ScoredConceptSet(concepts, s_v, s_l, s_d, total, contrib, depth, restart)


def complete(o: Ontology, sigma_in, params: CompletionParams = CompletionParams()) -> ScoredConceptSet:
    """Best last-level frontier over ``h`` seeded restarts (ties keep the earliest)."""
    items = list(getattr(sigma_in, "concepts", sigma_in))
    if not items:
        raise ValueError("empty input concept set")
    for wc in items:
        o.require(wc.concept)
    cleaned = remove_subsumed(o, items)
    weights = {wc.concept: wc.weight for wc in cleaned}
    order = [wc.concept for wc in cleaned]
    best = None
    for i in range(params.h):
        rng = np.random.default_rng(params.seed + i)
        subset = _random_subset(order, rng)
        frontiers, contribs = expand(o, {c: weights[c] for c in subset}, params)
        cand = _scored(o, frontiers[-1], contribs[-1], params, len(frontiers) - 1, i)
        if best is None or cand.total > best.total + SCORE_TOL:
            best = cand
    return best
