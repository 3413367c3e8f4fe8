"""Contraction of the uniform group by concept difference, and rank assignment."""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field

from .ontology import Ontology, WeightedConcept, concept_difference, distances_from

PROXIMITY, LITERAL = "proximity", "literal"
RANK_DIGITS = 12


def _weighted(concepts):
    items = getattr(concepts, "concepts", concepts)
    return [wc if isinstance(wc, WeightedConcept) else WeightedConcept(*wc) for wc in items]


def importance(o: Ontology, c_d: str, sigma_out_pos, mode: str = PROXIMITY) -> float:
    """Relatedness of a difference concept to the uniform output concepts.

    proximity: mean of weight / (1 + hops); literal: mean of weight * hops.
    """
    evidence = _weighted(sigma_out_pos)
    if not evidence:
        raise ValueError("importance needs a non-empty uniform concept set")
    o.require(c_d)
    dist = distances_from(o, c_d)
    acc = 0.0
    for wc in evidence:
        d = dist.get(wc.concept, math.inf)
        if mode == PROXIMITY:
            acc += 0.0 if math.isinf(d) else wc.weight / (1.0 + d)
        elif mode == LITERAL:
            if math.isinf(d):
                raise ValueError(f"{c_d!r} is disconnected from {wc.concept!r}")
            acc += wc.weight * d
        else:
            raise ValueError(f"unknown importance mode {mode!r}")
    return acc / len(evidence)


@dataclass(frozen=True)
class Contraction:
    diff: tuple[WeightedConcept, ...]  # weight = importance
    # negative concept -> difference concepts it actually constrained
    producers: dict = field(default_factory=dict)
    fallback: bool = False
    warnings: tuple[str, ...] = ()

    def ids(self):
        return [wc.concept for wc in self.diff]


def contract(o: Ontology, sigma_out_pos, sigma_out_neg, delta: float = 0.3,
             mode: str = PROXIMITY) -> Contraction:
    """Union of pairwise differences, minus anything subsumed by a negative
    concept, kept where importance >= delta.

    A negative concept counts as a producer of a difference concept only
    when it overlaps the positive concept, i.e. when it actually carved
    something out of it.
    """
    pos = _weighted(sigma_out_pos)
    neg = _weighted(sigma_out_neg)
    if not pos or not neg:
        raise ValueError("contraction needs both uniform and contrastive concepts")
    neg_ids = [wc.concept for wc in neg]
    candidates: dict[str, set[str]] = {}
    for p in pos:
        for n in neg_ids:
            overlap = bool(o.descendants[p.concept] & o.descendants[n])
            for d in concept_difference(o, p.concept, n):
                users = candidates.setdefault(d, set())
                if overlap:
                    users.add(n)
    kept = []
    for d in sorted(candidates):
        if any(n in o.ancestors[d] for n in neg_ids):
            continue
        imp = importance(o, d, pos, mode)
        if imp >= delta:
            kept.append(WeightedConcept(d, imp))
    kept.sort(key=lambda wc: (-wc.weight, wc.concept))
    producers: dict[str, list[str]] = {}
    for wc in kept:
        for n in candidates[wc.concept]:
            producers.setdefault(n, []).append(wc.concept)
    if not kept:
        fb = sorted((WeightedConcept(p.concept, importance(o, p.concept, pos, mode)) for p in pos),
                    key=lambda wc: (-wc.weight, wc.concept))
        return Contraction(tuple(fb), {}, True,
                           ("no difference concept reached the importance threshold; "
                            "ranking the uniform output concepts directly",))
    return Contraction(tuple(kept), {n: sorted(v) for n, v in producers.items()})


@dataclass(frozen=True)
class RankRow:
    rank: int
    uniform: tuple[str, ...]
    contrastive: tuple[str, ...]


@dataclass(frozen=True)
class RankedExplanation:
    rows: tuple[RankRow, ...]
    uniform_rank: dict
    contrastive_rank: dict
    rank_step: dict  # contrastive concept -> which rule (2, 3 or 4) assigned it

    def to_list(self):
        return [{"rank": r.rank, "uniform": list(r.uniform), "contrastive": list(r.contrastive)}
                for r in self.rows]


def dense_rank(scores: dict[str, float]) -> dict[str, int]:
    levels = sorted({round(s, RANK_DIGITS) for s in scores.values()}, reverse=True)
    pos = {v: i + 1 for i, v in enumerate(levels)}
    return {c: pos[round(s, RANK_DIGITS)] for c, s in scores.items()}


def _majority(ranks) -> int:
    counts = Counter(ranks)
    top = max(counts.values())
    return min(r for r, n in counts.items() if n == top)


def rank_groups(o: Ontology, contraction: Contraction, sigma_out_neg, sigma: int = 3) -> RankedExplanation:
    """Dense-rank the uniform group, then place each contrastive concept.

    Contrastive concepts that produced difference concepts take their
    majority rank; others take the majority rank of their nearest
    difference concepts closer than ``sigma`` hops; the rest go one rank
    below the last.
    """
    diff = {wc.concept: wc.weight for wc in contraction.diff}
    if not diff:
        raise ValueError("nothing to rank")
    urank = dense_rank(diff)
    last = max(urank.values())
    crank, step = {}, {}
    for wc in _weighted(sigma_out_neg):
        n = wc.concept
        if n in crank:
            continue
        produced = contraction.producers.get(n)
        if produced:
            crank[n], step[n] = _majority(urank[d] for d in produced), 2
            continue
        dist = distances_from(o, n)
        near = {d: dist[d] for d in diff if d in dist and dist[d] < sigma}
        if near:
            best = min(near.values())
            crank[n], step[n] = _majority(urank[d] for d, v in near.items() if v == best), 3
        else:
            crank[n], step[n] = last + 1, 4
    rows = []
    for r in range(1, max([last, *crank.values()]) + 1):
        uni = tuple(sorted((c for c, k in urank.items() if k == r), key=lambda c: (-diff[c], c)))
        con = tuple(c for c in crank if crank[c] == r)
        if uni or con:
            rows.append(RankRow(r, uni, con))
    return RankedExplanation(tuple(rows), urank, crank, step)
