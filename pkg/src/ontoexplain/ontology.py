"""Concept graph with hop distance, matching, subsumption and difference."""

from __future__ import annotations

import json
import math
from collections import deque
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Iterable

from .errors import OntologyError

IS_A = "is-a"


@dataclass(frozen=True)
class Concept:
    id: str
    label: str = ""
    covering: bool = False


@dataclass(frozen=True)
class Edge:
    source: str
    target: str
    relation: str = IS_A
    weight: float = 1.0


@dataclass(frozen=True)
class WeightedConcept:
    concept: str
    weight: float

    def __post_init__(self):
        if not self.weight >= 0:
            raise ValueError(f"concept weight must be >= 0, got {self.weight}")


class Ontology:
    """Immutable labelled, weighted concept graph.

    ``is-a`` edges point from the specific concept to the general one.
    """

    def __init__(self, concepts: Iterable[Concept], edges: Iterable[Edge]):
        concepts = list(concepts)
        ids = [c.id for c in concepts]
        seen = set()
        for cid in ids:
            if cid in seen:
                raise OntologyError(f"duplicate concept id {cid!r}")
            seen.add(cid)
        self.concepts = {c.id: c for c in concepts}
        self.edges = tuple(edges)
        for e in self.edges:
            for end in (e.source, e.target):
                if end not in self.concepts:
                    raise OntologyError(
                        f"edge {e.source!r} -[{e.relation}]-> {e.target!r} references undeclared concept {end!r}")
            if not 0 < e.weight <= 1:
                raise OntologyError(f"edge {e.source!r}->{e.target!r}: weight {e.weight} outside (0, 1]")
        self._check_is_a_acyclic()

    # adjacency -----------------------------------------------------------

    @cached_property
    def out_edges(self) -> dict[str, dict[str, float]]:
        """source -> {target: strongest edge weight}."""
        out = {c: {} for c in self.concepts}
        for e in self.edges:
            if e.source != e.target:
                out[e.source][e.target] = max(e.weight, out[e.source].get(e.target, 0.0))
        return out

    @cached_property
    def neighbours(self) -> dict[str, set[str]]:
        nb = {c: set() for c in self.concepts}
        for e in self.edges:
            if e.source != e.target:
                nb[e.source].add(e.target)
                nb[e.target].add(e.source)
        return nb

    @cached_property
    def parents(self) -> dict[str, set[str]]:
        par = {c: set() for c in self.concepts}
        for e in self.edges:
            if e.relation == IS_A:
                par[e.source].add(e.target)
        return par

    @cached_property
    def children(self) -> dict[str, set[str]]:
        ch = {c: set() for c in self.concepts}
        for child, ps in self.parents.items():
            for p in ps:
                ch[p].add(child)
        return ch

    @cached_property
    def ancestors(self) -> dict[str, frozenset[str]]:
        """Reflexive-transitive is-a closure: concept -> all its subsumers."""
        memo: dict[str, frozenset[str]] = {}

        def up(c):
            if c not in memo:
                acc = {c}
                for p in self.parents[c]:
                    acc |= up(p)
                memo[c] = frozenset(acc)
            return memo[c]

        for c in self.concepts:
            up(c)
        return memo

    @cached_property
    def descendants(self) -> dict[str, frozenset[str]]:
        down = {c: set() for c in self.concepts}
        for c, ups in self.ancestors.items():
            for a in ups:
                down[a].add(c)
        return {c: frozenset(v) for c, v in down.items()}

    def _check_is_a_acyclic(self):
        state = {}
        parents = {c: [] for c in self.concepts}
        for e in self.edges:
            if e.relation == IS_A:
                parents[e.source].append(e.target)
        for root in self.concepts:
            if root in state:
                continue
            stack = [(root, iter(parents[root]))]
            path = [root]
            state[root] = 1
            while stack:
                node, it = stack[-1]
                nxt = next(it, None)
                if nxt is None:
                    state[node] = 2
                    stack.pop()
                    path.pop()
                elif state.get(nxt) == 1:
                    cycle = path[path.index(nxt):] + [nxt]
                    raise OntologyError("is-a cycle: " + " -> ".join(cycle))
                elif nxt not in state:
                    state[nxt] = 1
                    path.append(nxt)
                    stack.append((nxt, iter(parents[nxt])))

    def require(self, *cids):
        for c in cids:
            if c not in self.concepts:
                raise OntologyError(f"unknown concept {c!r}")

    def label(self, cid: str) -> str:
        return self.concepts[cid].label or cid

    def to_dict(self) -> dict:
        return {
            "concepts": [
                {"id": c.id, "label": c.label, **({"covering": True} if c.covering else {})}
                for c in self.concepts.values()
            ],
            "edges": [
                {"from": e.source, "to": e.target, "relation": e.relation, "weight": e.weight}
                for e in self.edges
            ],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Ontology":
        try:
            concepts = [
                Concept(str(c["id"]), str(c.get("label", c["id"])), bool(c.get("covering", False)))
                for c in d["concepts"]
            ]
            edges = [
                Edge(str(e["from"]), str(e["to"]), str(e.get("relation", IS_A)), float(e.get("weight", 1.0)))
                for e in d.get("edges", [])
            ]
        except (KeyError, TypeError) as exc:
            raise OntologyError(f"malformed ontology document: {exc}") from None
        return cls(concepts, edges)


def load_ontology(path) -> Ontology:
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise OntologyError(f"{path}: invalid JSON ({exc})") from None
    return Ontology.from_dict(doc)


def concept_distance(o: Ontology, c1: str, c2: str) -> float:
    """Hop count over edges taken in either direction; ``math.inf`` if disconnected."""
    o.require(c1, c2)
    if c1 == c2:
        return 0
    seen = {c1}
    frontier = deque([(c1, 0)])
    while frontier:
        node, d = frontier.popleft()
        for nb in o.neighbours[node]:
            if nb == c2:
                return d + 1
            if nb not in seen:
                seen.add(nb)
                frontier.append((nb, d + 1))
    return math.inf


def distances_from(o: Ontology, source: str) -> dict[str, int]:
    """BFS hop distances from ``source`` to every reachable concept."""
    dist = {source: 0}
    frontier = deque([source])
    while frontier:
        node = frontier.popleft()
        for nb in o.neighbours[node]:
            if nb not in dist:
                dist[nb] = dist[node] + 1
                frontier.append(nb)
    return dist


def matchers(o: Ontology, frontier: Iterable[str], target: str) -> list[str]:
    """Frontier concepts with an outgoing edge to ``target``."""
    return sorted(c for c in frontier if target in o.out_edges[c])


def matching_successors(o: Ontology, frontier, visited) -> set[str]:
    """Unvisited concepts reached by outgoing edges from two or more frontier concepts."""
    counts: dict[str, int] = {}
    for c in set(frontier):
        for t in o.out_edges[c]:
            counts[t] = counts.get(t, 0) + 1
    visited = set(visited)
    return {t for t, n in counts.items() if n >= 2 and t not in visited}


def subsumes(o: Ontology, general: str, specific: str) -> bool:
    o.require(general, specific)
    return general in o.ancestors[specific]


def _difference_candidates(o: Ontology, c_p: str, c_n: str) -> set[str]:
    below_n = o.descendants[c_n]
    out = set()
    for d in o.descendants[c_p]:
        if d in below_n:
            continue
        # a covering concept is the union of its children; if any part of it
        # falls under c_n it is not wholly outside c_n
        if o.concepts[d].covering and o.descendants[d] & below_n:
            continue
        out.add(d)
    return out


def maximal(o: Ontology, concepts) -> set[str]:
    """Elements of ``concepts`` not strictly subsumed by another element."""
    concepts = set(concepts)
    return {c for c in concepts if not any(a != c and a in concepts for a in o.ancestors[c])}


def concept_difference(o: Ontology, c_p: str, c_n: str) -> frozenset[str]:
    """Most general named concepts subsumed by ``c_p`` but not by ``c_n``."""
    o.require(c_p, c_n)
    return frozenset(maximal(o, _difference_candidates(o, c_p, c_n)))
