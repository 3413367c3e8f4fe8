"""Convex hulls: exact in 2-D/3-D, direction-sampled in any dimension.

Hull vertices are reported as row indices into the input matrix. Coincident
rows are collapsed onto their lowest index before construction.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateInputError

CONTAIN_TOL = 1e-9


@dataclass(frozen=True)
class Facet:
    vertices: tuple[int, ...]
    normal: np.ndarray  # unit length, outward
    offset: float


@dataclass(frozen=True)
class ConvexHull:
    vertex_indices: tuple[int, ...]
    facets: tuple[Facet, ...] = ()
    is_exact: bool = True
    dim: int = 0
    # vertex row -> every input row coincident with it
    aliases: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.vertex_indices)


def _dedupe(P):
    """Return (kept row indices, map row -> representative row)."""
    _, first, inverse = np.unique(P, axis=0, return_index=True, return_inverse=True)
    inverse = np.asarray(inverse).reshape(-1)
    rep = first[inverse]
    keep = np.sort(first)
    return keep, rep


def _aliases(vertices, rep):
    out = {}
    for v in vertices:
        out[int(v)] = tuple(int(i) for i in np.flatnonzero(rep == v))
    return out


def _cross2(o, a, b):
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def _hull_2d(P, idx):
    """Monotone chain over rows ``idx``; collinear points are dropped."""
    order = sorted(idx, key=lambda i: (P[i, 0], P[i, 1]))
    lower, upper = [], []
    for i in order:
        while len(lower) >= 2 and _cross2(P[lower[-2]], P[lower[-1]], P[i]) <= 0:
            lower.pop()
        lower.append(i)
    for i in reversed(order):
        while len(upper) >= 2 and _cross2(P[upper[-2]], P[upper[-1]], P[i]) <= 0:
            upper.pop()
        upper.append(i)
    ring = lower[:-1] + upper[:-1]
    if len(ring) < 3:
        raise DegenerateInputError("dimension-deficient input: all points are collinear")
    facets = []
    for a, b in zip(ring, ring[1:] + ring[:1]):
        e = P[b] - P[a]
        nrm = np.array([e[1], -e[0]])
        nrm = nrm / np.linalg.norm(nrm)
        facets.append(Facet((a, b), nrm, float(nrm @ P[a])))
    return ring, facets


class _Hull3D:
    """Incremental 3-D hull over a triangulated boundary."""

    def __init__(self, P, idx):
        self.P = P
        scale = float(np.abs(P[idx]).max()) or 1.0
        self.eps = 1e-12 * scale
        self.faces = {}  # id -> (a, b, c), counter-clockwise seen from outside
        self.normals = {}
        self.offsets = {}
        self.edge_face = {}  # directed edge -> face id
        self.next_id = 0
        self._build(idx)

    def _plane(self, a, b, c):
        P = self.P
        n = np.cross(P[b] - P[a], P[c] - P[a])
        nn = np.linalg.norm(n)
        return n / nn, float(n @ P[a]) / nn

    def _add_face(self, a, b, c):
        f = self.next_id
        self.next_id += 1
        self.faces[f] = (a, b, c)
        self.normals[f], self.offsets[f] = self._plane(a, b, c)
        for e in ((a, b), (b, c), (c, a)):
            self.edge_face[e] = f
        return f

    def _remove_face(self, f):
        a, b, c = self.faces.pop(f)
        del self.normals[f], self.offsets[f]
        for e in ((a, b), (b, c), (c, a)):
            if self.edge_face.get(e) == f:
                del self.edge_face[e]

    def _initial_simplex(self, idx):
        P = self.P
        Q = P[idx]
        i0 = idx[int(np.argmin(Q[:, 0]))]
        d = np.linalg.norm(Q - P[i0], axis=1)
        i1 = idx[int(np.argmax(d))]
        if d.max() <= self.eps:
            raise DegenerateInputError("dimension-deficient input: all points coincide")
        u = P[i1] - P[i0]
        area = np.linalg.norm(np.cross(Q - P[i0], u), axis=1)
        i2 = idx[int(np.argmax(area))]
        if area.max() <= self.eps * np.linalg.norm(u):
            raise DegenerateInputError("dimension-deficient input: all points are collinear")
        n = np.cross(P[i1] - P[i0], P[i2] - P[i0])
        vol = (Q - P[i0]) @ n
        i3 = idx[int(np.argmax(np.abs(vol)))]
        if abs(vol).max() <= self.eps * np.linalg.norm(n):
            raise DegenerateInputError("dimension-deficient input: all points are coplanar")
        return i0, i1, i2, i3

    def _build(self, idx):
        P = self.P
        s = self._initial_simplex(idx)
        centre = P[list(s)].mean(axis=0)
        for a, b, c in ((s[0], s[1], s[2]), (s[0], s[1], s[3]), (s[0], s[2], s[3]), (s[1], s[2], s[3])):
            n = np.cross(P[b] - P[a], P[c] - P[a])
            if n @ (centre - P[a]) > 0:
                b, c = c, b
            self._add_face(a, b, c)
        done = set(s)
        for i in idx:
            if i in done:
                continue
            self._insert(i)

    def _insert(self, i):
        p = self.P[i]
        ids = np.fromiter(self.faces.keys(), dtype=int)
        N = np.array([self.normals[f] for f in ids])
        off = np.array([self.offsets[f] for f in ids])
        vis = ids[N @ p - off > self.eps]
        if len(vis) == 0:
            return
        visible = set(vis.tolist())
        horizon = []
        for f in visible:
            a, b, c = self.faces[f]
            for e in ((a, b), (b, c), (c, a)):
                if self.edge_face.get((e[1], e[0])) not in visible:
                    horizon.append(e)
        for f in visible:
            self._remove_face(f)
        for a, b in horizon:
            self._add_face(a, b, i)

    def extreme_vertices(self):
        """Vertices touching at least three distinct facet planes."""
        planes = {}
        for f, tri in self.faces.items():
            key = self.normals[f]
            for v in tri:
                planes.setdefault(v, []).append(key)
        out = []
        for v, normals in planes.items():
            distinct = []
            for n in normals:
                if not any(np.linalg.norm(n - m) < 1e-9 for m in distinct):
                    distinct.append(n)
                if len(distinct) >= 3:
                    out.append(v)
                    break
        return sorted(out)

    def facets(self):
        return [Facet(self.faces[f], self.normals[f], self.offsets[f]) for f in sorted(self.faces)]


def convex_hull_exact(points) -> ConvexHull:
    P = np.asarray(points, dtype=float)
    if P.ndim != 2 or P.shape[1] not in (2, 3):
        raise ValueError("exact hulls are available for 2-D and 3-D points only")
    d = P.shape[1]
    if P.shape[0] < d + 1:
        raise DegenerateInputError(f"dimension-deficient input: need at least {d + 1} points")
    keep, rep = _dedupe(P)
    idx = [int(i) for i in keep]
    if len(idx) < d + 1:
        raise DegenerateInputError("dimension-deficient input: too few distinct points")
    if d == 2:
        ring, facets = _hull_2d(P, idx)
        verts = tuple(ring)
    else:
        h = _Hull3D(P, idx)
        verts = tuple(h.extreme_vertices())
        facets = h.facets()
    return ConvexHull(verts, tuple(facets), True, d, _aliases(verts, rep))


def sample_directions(num_directions: int, dim: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    U = rng.standard_normal((num_directions, dim))
    return U / np.linalg.norm(U, axis=1, keepdims=True)


def convex_hull_approx(points, num_directions: int = 500, seed: int = 0) -> ConvexHull:
    """Union of the argmax points over seeded random unit directions."""
    P = np.atleast_2d(np.asarray(points, dtype=float))
    if P.shape[0] < 1 or num_directions < 1:
        raise ValueError("need at least one point and one direction")
    keep, rep = _dedupe(P)
    U = sample_directions(num_directions, P.shape[1], seed)
    Q = P[keep]
    best = np.argmax(Q @ U.T, axis=0)
    verts = tuple(sorted({int(keep[b]) for b in best}))
    return ConvexHull(verts, (), False, P.shape[1], _aliases(verts, rep))


def hull_contains(hull: ConvexHull, x) -> bool:
    if not hull.is_exact:
        raise ValueError("containment needs an exact hull with facets")
    x = np.asarray(x, dtype=float)
    return all(float(f.normal @ x) <= f.offset + CONTAIN_TOL for f in hull.facets)


def convex_hull(points, num_directions: int = 500, seed: int = 0) -> ConvexHull:
    """Exact hull where available, otherwise the sampled approximation.

    Degenerate low-dimensional inputs fall back to the approximation too.
    """
    P = np.atleast_2d(np.asarray(points, dtype=float))
    if P.shape[1] in (2, 3):
        try:
            return convex_hull_exact(P)
        except DegenerateInputError:
            pass
    return convex_hull_approx(P, num_directions, seed)


def class_hulls(points, labels, num_directions: int = 500, seed: int = 0) -> dict[int, ConvexHull]:
    """One hull per class; vertex indices refer to rows of ``points``.

    Together these form the kNN decision-boundary representation.
    """
    P = np.asarray(points, dtype=float)
    labels = np.asarray(labels)
    out = {}
    for lab in sorted(set(labels.tolist())):
        rows = np.flatnonzero(labels == lab)
        h = convex_hull(P[rows], num_directions, seed)
        out[int(lab)] = ConvexHull(
            tuple(int(rows[v]) for v in h.vertex_indices),
            h.facets if not h.is_exact else tuple(
                Facet(tuple(int(rows[v]) for v in f.vertices), f.normal, f.offset) for f in h.facets),
            h.is_exact,
            h.dim,
            {int(rows[k]): tuple(int(rows[a]) for a in v) for k, v in h.aliases.items()},
        )
    return out
