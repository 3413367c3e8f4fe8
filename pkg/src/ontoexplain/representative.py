"""Representative training points: boundary (global) and neighbourhood (local) evidence."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .classifiers import LRModel
from .data_model import Dataset, TestQuery, max_variance_feature
from .errors import EvidenceError
from .hull import convex_hull

GLOBAL, LOCAL = "global", "local"
POSITIVE, NEGATIVE = "positive", "negative"


@dataclass(frozen=True)
class SelectionParams:
    """Selection thresholds; ``None`` thresholds resolve to data-driven defaults.

    ``t_g``/``t_l`` default to the 20th percentile of the respective distance
    distribution, ``t_d`` to (spread-feature range) / (2 * m_bins).
    """

    t_g: float | None = None
    t_l: float | None = None
    t_d: float | None = None
    m_bins: int = 8
    max_per_step: int = 8
    seed: int = 0
    strategy: str = "bins"  # "bins" | "variance_split"
    spread_feature: int | None = None
    num_directions: int = 500
    default_percentile: float = 20.0

    def __post_init__(self):
        for name in ("t_g", "t_l", "t_d"):
            v = getattr(self, name)
            if v is not None and v < 0:
                raise ValueError(f"{name} must be >= 0")
        if self.m_bins < 1 or self.max_per_step < 1:
            raise ValueError("m_bins and max_per_step must be >= 1")
        if self.strategy not in ("bins", "variance_split"):
            raise ValueError(f"unknown strategy {self.strategy!r}")


@dataclass(frozen=True)
class WeightedPoint:
    row_index: int
    weight: float
    kind: str
    polarity: str

    def __post_init__(self):
        if not 0 < self.weight <= 1:
            raise ValueError(f"weight {self.weight} outside (0, 1]")


@dataclass(frozen=True)
class EvidenceSet:
    positive: tuple[WeightedPoint, ...]
    negative: tuple[WeightedPoint, ...]
    model_kind: str
    flags: tuple[str, ...] = ()

    def rows(self) -> set[int]:
        return {p.row_index for p in self.positive + self.negative}

    def selects(self, row: int) -> bool:
        """The 0/1 selection indicator over training rows."""
        return row in self.rows()

    def group(self, polarity: str, kind: str) -> tuple[WeightedPoint, ...]:
        pts = self.positive if polarity == POSITIVE else self.negative
        return tuple(p for p in pts if p.kind == kind)


def _percentile(values, q):
    values = np.asarray(values, dtype=float)
    return float(np.percentile(values, q)) if len(values) else 0.0


def _mask_rows(m, exclude):
    mask = np.ones(m, dtype=bool)
    if exclude is not None:
        mask[exclude] = False
    return mask


def _take_nearest(rows, dist, cap, kind, polarity):
    order = sorted(zip(dist, rows))[:cap]
    picked = [WeightedPoint(int(r), 1.0 / (1.0 + float(d)), kind, polarity) for d, r in order]
    return sorted(picked, key=lambda p: p.row_index)


def _predicted(model, ds):
    if model is None:
        return ds.labels
    return model.predict_labels(ds.points)


def select_lr_global(model: LRModel, ds: Dataset, label: int, params: SelectionParams,
                     exclude: int | None = None, polarity: str = POSITIVE,
                     predicted=None) -> list[WeightedPoint]:
    """Rows within ``t_g`` of the hyperplane whose predicted label is ``label``."""
    dist = model.boundary_distances(ds.points)
    t_g = params.t_g if params.t_g is not None else _percentile(dist, params.default_percentile)
    pred = model.predict_labels(ds.points) if predicted is None else predicted
    keep = _mask_rows(ds.m, exclude) & (dist <= t_g) & (pred == label)
    rows = np.flatnonzero(keep)
    return _take_nearest(rows, dist[rows], params.max_per_step, GLOBAL, polarity)


def select_local(ds: Dataset, x0: TestQuery, label: int, params: SelectionParams, model=None,
                 exclude: int | None = None, polarity: str = POSITIVE,
                 predicted=None) -> list[WeightedPoint]:
    """Rows within ``t_l`` of the test point whose predicted label is ``label``."""
    dist = np.sqrt(((ds.points - np.asarray(x0.point, dtype=float)) ** 2).sum(axis=1))
    mask = _mask_rows(ds.m, exclude)
    t_l = params.t_l if params.t_l is not None else _percentile(dist[mask], params.default_percentile)
    pred = (_predicted(model, ds) if predicted is None else predicted)
    keep = mask & (dist <= t_l) & (pred == label)
    rows = np.flatnonzero(keep)
    return _take_nearest(rows, dist[rows], params.max_per_step, LOCAL, polarity)


def _bin_sample(values, rows, params, rng):
    lo, hi = float(values.min()), float(values.max())
    m = params.m_bins
    width = (hi - lo) / m
    t_d = params.t_d if params.t_d is not None else width / 2
    centres = lo + (np.arange(m) + 0.5) * width
    chosen: list[int] = []
    for v in centres:
        window = [int(r) for r, x in zip(rows, values) if abs(x - v) <= t_d and int(r) not in chosen]
        if window:
            chosen.append(window[int(rng.integers(len(window)))])
    return chosen


def _variance_split(points, rows, cells):
    """Median splits along features ranked by variance until ``cells`` groups remain.

    Each group contributes the point nearest its centroid; no sampling.
    """
    order = np.argsort(-points.var(axis=0), kind="stable")
    groups = [(np.arange(len(rows)), 0)]
    while len(groups) < cells:
        splittable = [i for i, (g, _) in enumerate(groups) if len(g) > 1]
        if not splittable:
            break
        i = max(splittable, key=lambda j: (len(groups[j][0]), -j))
        g, depth = groups.pop(i)
        f = order[depth % len(order)]
        srt = g[np.argsort(points[g, f], kind="stable")]
        half = len(srt) // 2
        groups[i:i] = [(srt[:half], depth + 1), (srt[half:], depth + 1)]
    chosen = []
    for g, _ in groups:
        c = points[g].mean(axis=0)
        k = g[int(np.argmin(((points[g] - c) ** 2).sum(axis=1)))]
        chosen.append(int(rows[k]))
    return chosen


def select_knn_global(ds: Dataset, x0: TestQuery, label: int, params: SelectionParams, model=None,
                      exclude: int | None = None, polarity: str = POSITIVE,
                      predicted=None) -> tuple[list[WeightedPoint], list[str]]:
    """Boundary evidence from the hull of the class, spread along the widest feature.

    Returns the weighted points and any flags raised (e.g. hull fallback).
    """
    flags: list[str] = []
    pred = (_predicted(model, ds) if predicted is None else predicted)
    mask = _mask_rows(ds.m, exclude) & (pred == label)
    class_rows = np.flatnonzero(mask)
    if len(class_rows) == 0:
        return [], flags
    P = ds.points[class_rows]
    if len(class_rows) <= ds.n:
        flags.append(f"{polarity}: too few class points for a hull; using all {len(class_rows)}")
        cand = class_rows
    else:
        h = convex_hull(P, params.num_directions, params.seed)
        if not h.is_exact:
            flags.append(f"{polarity}: approximate hull ({len(h)} vertices)")
        cand = class_rows[list(h.vertex_indices)]
    v = params.spread_feature if params.spread_feature is not None else max_variance_feature(ds)
    values = ds.points[cand, v]
    rng = np.random.default_rng(params.seed + (0 if polarity == POSITIVE else 1))
    if params.strategy == "bins":
        chosen = _bin_sample(values, cand, params, rng)
    else:
        chosen = _variance_split(ds.points[cand], cand, min(params.m_bins, len(cand)))
    x = np.asarray(x0.point, dtype=float)
    dist = {r: float(np.sqrt(((ds.points[r] - x) ** 2).sum())) for r in set(chosen)}
    picked = sorted(dist, key=lambda r: (dist[r], r))[: params.max_per_step]
    pts = [WeightedPoint(r, 1.0 / (1.0 + dist[r]), GLOBAL, polarity) for r in picked]
    return sorted(pts, key=lambda p: p.row_index), flags


def build_evidence_sets(model, ds: Dataset, x0: TestQuery, params: SelectionParams) -> EvidenceSet:
    """Positive evidence carries the predicted label of ``x0``; negative the other one."""
    if x0.predicted_label is None:
        raise ValueError("test query has no predicted label")
    pred = model.predict_labels(ds.points)
    y0 = int(x0.predicted_label)
    groups = {}
    flags: list[str] = []
    for polarity, label in ((POSITIVE, y0), (NEGATIVE, 1 - y0)):
        kw = dict(exclude=x0.row_index, polarity=polarity, predicted=pred)
        if isinstance(model, LRModel):
            glob = select_lr_global(model, ds, label, params, **kw)
        else:
            glob, fl = select_knn_global(ds, x0, label, params, model, **kw)
            flags.extend(fl)
        loc = select_local(ds, x0, label, params, model, **kw)
        seen = {p.row_index for p in glob}
        groups[polarity] = tuple(glob) + tuple(p for p in loc if p.row_index not in seen)
    if not groups[POSITIVE] and not groups[NEGATIVE]:
        raise EvidenceError("no representative points; relax thresholds")
    return EvidenceSet(groups[POSITIVE], groups[NEGATIVE], model.kind, tuple(flags))
