"""Delaunay triangulation via the lower convex hull of lifted points.

Points in R^k are lifted to the paraboloid in R^(k+1); the incremental
beneath-beyond algorithm with conflict lists builds their convex hull, and
the downward-facing facets project back to the Delaunay cells. Every
visibility decision is an exact orientation sign (float filter with exact
integer fallback), so the output is the true triangulation whenever the
input is in general position; degeneracies encountered along the way are
reported as errors naming the offending subset.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations

import numpy as np

from .geometry import (
    EPS,
    GeneralPositionError,
    GeometryError,
    PointSet,
    Sign,
    _filtered_det_signs,
    exact_det_sign,
    is_affinely_independent,
    jitter_points,
    lifted_floats,
    orient,
)


@dataclass(frozen=True)
class BuildStats:
    facets_created: int
    exact_fallbacks: int


@dataclass(frozen=True)
class DelaunayGraph:
    """Undirected Delaunay adjacency with cached Euclidean edge lengths."""

    n: int
    dim: int
    adjacency: tuple[tuple[int, ...], ...]
    edge_lengths: dict[tuple[int, int], float]
    simplices: tuple[tuple[int, ...], ...]
    insertion_seed: int
    jitter_seed: int | None
    stats: BuildStats = field(compare=False, default=BuildStats(0, 0))

    def incident_edges(self, i: int) -> list[tuple[int, float]]:
        """E(x_i): (neighbor index, edge length) pairs, sorted by neighbor."""
        if not 0 <= i < self.n:
            raise IndexError(f"point index {i} out of range [0, {self.n})")
        return [(j, self.edge_lengths[(min(i, j), max(i, j))]) for j in self.adjacency[i]]

    def edges(self) -> list[tuple[int, int]]:
        return sorted(self.edge_lengths)

    def edge_set(self) -> set[tuple[int, int]]:
        return set(self.edge_lengths)

    def max_edge_length(self) -> float:
        return max(self.edge_lengths.values())

    def is_connected(self) -> bool:
        seen = {0}
        stack = [0]
        while stack:
            for j in self.adjacency[stack.pop()]:
                if j not in seen:
                    seen.add(j)
                    stack.append(j)
        return len(seen) == self.n


def incident_edges(graph: DelaunayGraph, i: int) -> list[tuple[int, float]]:
    return graph.incident_edges(i)


def max_edge_length(graph: DelaunayGraph) -> float:
    return graph.max_edge_length()


class _Facet:
    __slots__ = ("verts", "ref", "neighbors", "conflicts", "uid")

    def __init__(self, verts: tuple[int, ...], uid: int):
        self.verts = verts
        self.ref = 0
        self.neighbors: dict[tuple[int, ...], _Facet] = {}
        self.conflicts: set[int] = set()
        self.uid = uid


class _HullBuilder:
    """Incremental convex hull of the lifted points in R^(k+1)."""

    def __init__(self, ps: PointSet, insertion_seed: int):
        self.ps = ps
        self.coords = ps.coords
        self.lifted = lifted_floats(ps)
        self.d = ps.dim + 1
        self.n = ps.n
        self.facets: set[_Facet] = set()
        self.point_conflicts: dict[int, set[_Facet]] = {}
        self._lift_fr: dict[int, tuple[Fraction, ...]] = {}
        self._uid = 0
        self.fallbacks = 0
        self.created = 0
        rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(insertion_seed)))
        self.order = [int(i) for i in rng.permutation(self.n)]
        mbig = float(np.abs(self.lifted).max())
        self.entry_abs = 32.0 * EPS * max(mbig, 1e-300)
        self.o: np.ndarray | None = None
        self._o_fr: tuple[Fraction, ...] | None = None

    # -- exact helpers ------------------------------------------------------

    def _lift_exact(self, i: int) -> tuple[Fraction, ...]:
        row = self._lift_fr.get(i)
        if row is None:
            cs = [Fraction(x) for x in self.coords[i]]
            row = tuple(cs + [sum(c * c for c in cs)])
            self._lift_fr[i] = row
        return row

    def _exact_sign(self, verts: tuple[int, ...], query) -> int:
        """Exact sign of det([v - v0 rows; query - v0]) in lifted space."""
        base = self._lift_exact(verts[0])
        rows = [[a - b for a, b in zip(self._lift_exact(v), base)] for v in verts[1:]]
        if isinstance(query, int):
            top = self._lift_exact(query)
        else:
            top = query  # already exact Fractions (the interior point)
        rows.append([a - b for a, b in zip(top, base)])
        self.fallbacks += 1
        return exact_det_sign(rows)

    def _lifted_independent(self, idxs: list[int]) -> bool:
        j = len(idxs) - 1
        if j <= 0:
            return True
        if j > self.d:
            return False
        base = self._lift_exact(idxs[0])
        rows = [[a - b for a, b in zip(self._lift_exact(v), base)] for v in idxs[1:]]
        for cols in combinations(range(self.d), j):
            if exact_det_sign([[row[c] for c in cols] for row in rows]) != 0:
                return True
        return False

    # -- batched visibility -------------------------------------------------

    def _batch_signs(self, facet_rows: np.ndarray, repeats: list[int],
                     bases: np.ndarray, tops: np.ndarray,
                     facet_list: list[_Facet], queries: list) -> np.ndarray:
        """Certified det signs for stacked (facet, query) pairs.

        facet_rows: (F, d-1, d) difference rows per facet; repeats: pair count
        per facet; bases: (F, d) lifted base vertex; tops: (M, d) lifted query
        rows. queries holds the query label per pair (point index or 'o').
        """
        m = tops.shape[0]
        mats = np.empty((m, self.d, self.d))
        mats[:, : self.d - 1, :] = np.repeat(facet_rows, repeats, axis=0)
        mats[:, self.d - 1, :] = tops - np.repeat(bases, repeats, axis=0)
        signs, bad = _filtered_det_signs(mats, entry_abs=self.entry_abs)
        if bad.any():
            owner = np.repeat(np.arange(len(facet_list)), repeats)
            for idx in np.nonzero(bad)[0]:
                f = facet_list[int(owner[idx])]
                q = queries[idx]
                signs[idx] = self._exact_sign(f.verts, self._o_fr if q == "o" else q)
        return signs

    def _zero_conflict(self, facet: _Facet, q: int):
        """A query exactly on a facet plane: cospherical unless the facet is
        a vertical wall (its projection is affinely dependent)."""
        if orient(self.coords[list(facet.verts)]) is not Sign.ZERO:
            subset = tuple(sorted(facet.verts + (q,)))
            raise GeneralPositionError(
                "cospherical", subset,
                f"points {subset} lie on a common sphere; jitter to proceed")

    # -- construction -------------------------------------------------------

    def _facet_rows(self, verts: tuple[int, ...]) -> np.ndarray:
        pts = self.lifted[list(verts)]
        return pts[1:] - pts[0]

    def _new_facet(self, verts: tuple[int, ...]) -> _Facet:
        self._uid += 1
        self.created += 1
        return _Facet(verts, self._uid)

    def _init_simplex(self) -> list[int]:
        chosen: list[int] = []
        for i in self.order:
            if self._lifted_independent(chosen + [i]):
                chosen.append(i)
                if len(chosen) == self.d + 1:
                    return chosen
        # every remaining point is affinely dependent on the chosen lifted
        # ones: the whole set is cospherical or fails to span
        from .geometry import affinely_independent_subset

        if len(affinely_independent_subset(self.coords)) < self.ps.dim + 1:
            raise GeneralPositionError(
                "affine_span", tuple(range(self.n)),
                "points do not span the ambient space")
        spare = next(i for i in self.order if i not in chosen)
        subset = tuple(sorted(chosen + [spare]))
        raise GeneralPositionError(
            "cospherical", subset,
            f"points {subset} are cospherical; jitter to proceed")

    def build(self) -> list[tuple[int, ...]]:
        simplex = self._init_simplex()
        self.o = self.lifted[simplex].mean(axis=0)
        self._o_fr = tuple(
            sum(self._lift_exact(v)[c] for v in simplex) / (self.d + 1)
            for c in range(self.d))

        # initial facets: all d-subsets of the initial simplex
        init_facets = []
        for omit in simplex:
            verts = tuple(sorted(v for v in simplex if v != omit))
            init_facets.append(self._new_facet(verts))
        for fa, fb in combinations(init_facets, 2):
            ridge = tuple(sorted(set(fa.verts) & set(fb.verts)))
            fa.neighbors[ridge] = fb
            fb.neighbors[ridge] = fa
        self.facets.update(init_facets)

        rows = np.stack([self._facet_rows(f.verts) for f in init_facets])
        bases = np.stack([self.lifted[f.verts[0]] for f in init_facets])
        refs = self._batch_signs(rows, [1] * len(init_facets), bases,
                                 np.stack([self.o] * len(init_facets)),
                                 init_facets, ["o"] * len(init_facets))
        for f, r in zip(init_facets, refs):
            if r == 0:
                raise RuntimeError("interior reference point landed on a facet plane")
            f.ref = int(r)

        in_simplex = set(simplex)
        pending = [i for i in self.order if i not in in_simplex]
        if pending:
            counts = [len(pending)] * len(init_facets)
            tops = np.tile(self.lifted[pending], (len(init_facets), 1))
            labels = pending * len(init_facets)
            signs = self._batch_signs(rows, counts, bases, tops, init_facets, labels)
            off = 0
            for f in init_facets:
                block = signs[off:off + len(pending)]
                off += len(pending)
                for q, s in zip(pending, block):
                    if s == 0:
                        self._zero_conflict(f, q)
                    elif s == -f.ref:
                        f.conflicts.add(q)
        for q in pending:
            self.point_conflicts[q] = {f for f in init_facets if q in f.conflicts}

        for p in pending:
            self._insert(p)

        return self._lower_simplices()

    def _insert(self, p: int):
        visible = self.point_conflicts.pop(p)
        if not visible:
            raise GeneralPositionError(
                "degenerate_flat", (p,),
                f"point {p} is not strictly outside the partial hull; jitter to proceed")

        horizon = []
        for f in visible:
            for ridge, g in f.neighbors.items():
                if g not in visible:
                    horizon.append((ridge, f, g))

        new_facets: list[_Facet] = []
        candidates: list[list[int]] = []
        half_ridges: dict[tuple[int, ...], tuple[_Facet, tuple[int, ...]]] = {}
        for ridge, f_vis, g_inv in horizon:
            verts = tuple(sorted(ridge + (p,)))
            nf = self._new_facet(verts)
            nf.neighbors[ridge] = g_inv
            g_inv.neighbors[ridge] = nf
            cands = (f_vis.conflicts | g_inv.conflicts)
            cands.discard(p)
            new_facets.append(nf)
            candidates.append(sorted(cands))
            for omit in ridge:
                key = tuple(sorted(set(verts) - {omit}))
                other = half_ridges.pop(key, None)
                if other is None:
                    half_ridges[key] = (nf, key)
                else:
                    of, _ = other
                    nf.neighbors[key] = of
                    of.neighbors[key] = nf
        if half_ridges:
            stray = sorted({v for key, _ in half_ridges.items() for v in key})
            raise GeneralPositionError(
                "degenerate_flat", tuple(stray),
                "hull boundary is not simplicial around points "
                f"{tuple(stray)}; jitter to proceed")

        rows = np.stack([self._facet_rows(f.verts) for f in new_facets])
        bases = np.stack([self.lifted[f.verts[0]] for f in new_facets])
        refs = self._batch_signs(rows, [1] * len(new_facets), bases,
                                 np.stack([self.o] * len(new_facets)),
                                 new_facets, ["o"] * len(new_facets))
        for f, r in zip(new_facets, refs):
            if r == 0:
                raise RuntimeError("interior reference point landed on a facet plane")
            f.ref = int(r)

        counts = [len(c) for c in candidates]
        if sum(counts):
            flat = [q for block in candidates for q in block]
            tops = self.lifted[flat]
            signs = self._batch_signs(rows, counts, bases, tops, new_facets, flat)
            off = 0
            for f, block in zip(new_facets, candidates):
                for q, s in zip(block, signs[off:off + len(block)]):
                    if s == 0:
                        self._zero_conflict(f, q)
                    elif s == -f.ref:
                        f.conflicts.add(q)
                        self.point_conflicts[q].add(f)
                off += len(block)

        for f in visible:
            for q in f.conflicts:
                if q in self.point_conflicts:
                    self.point_conflicts[q].discard(f)
            self.facets.discard(f)
        self.facets.update(new_facets)

    def _lower_simplices(self) -> list[tuple[int, ...]]:
        """Facets whose outward normal points downward project to Delaunay cells."""
        facets = sorted(self.facets, key=lambda f: f.verts)
        k = self.ps.dim
        mats = np.stack([
            self.coords[list(f.verts[1:])] - self.coords[f.verts[0]] for f in facets])
        signs, bad = _filtered_det_signs(mats)
        for idx in np.nonzero(bad)[0]:
            signs[idx] = int(orient(self.coords[list(facets[idx].verts)]))
        lower = [f.verts for f, s in zip(facets, signs) if int(s) == f.ref]
        covered = {v for verts in lower for v in verts}
        if len(covered) != self.n:
            missing = sorted(set(range(self.n)) - covered)
            raise RuntimeError(f"points {missing} missing from the lower hull")
        return lower


def delaunay(points, *, jitter_seed: int | None = None,
             insertion_seed: int = 0) -> DelaunayGraph:
    """Delaunay triangulation of distinct points in general position.

    For n <= k+1 affinely independent points the result is the complete
    graph (all Voronoi cells meet). Degenerate inputs raise
    GeneralPositionError; opt-in jitter (seeded, 1e-9 x bbox diameter)
    resolves them at the cost of exactness of the coordinates.
    """
    if jitter_seed is not None:
        ps = jitter_points(points, jitter_seed)
    elif isinstance(points, PointSet):
        ps = points
    else:
        ps = PointSet(np.asarray(points, dtype=np.float64))
    if ps.n < 2:
        raise GeometryError("triangulation needs at least 2 points")

    k = ps.dim
    if ps.n <= k + 1:
        if not is_affinely_independent(ps.coords):
            raise GeneralPositionError(
                "affine_span", tuple(range(ps.n)),
                "small point set is affinely dependent; no unique dual graph")
        simplices = [tuple(range(ps.n))] if ps.n == k + 1 else []
        edges = list(combinations(range(ps.n), 2))
        stats = BuildStats(0, 0)
    else:
        builder = _HullBuilder(ps, insertion_seed)
        simplices = sorted(builder.build())
        edges = sorted({pair for verts in simplices for pair in combinations(verts, 2)})
        stats = BuildStats(builder.created, builder.fallbacks)

    ii = np.fromiter((e[0] for e in edges), dtype=np.int64, count=len(edges))
    jj = np.fromiter((e[1] for e in edges), dtype=np.int64, count=len(edges))
    lengths = np.linalg.norm(ps.coords[ii] - ps.coords[jj], axis=1)
    edge_lengths = {e: float(l) for e, l in zip(edges, lengths)}

    adj: list[list[int]] = [[] for _ in range(ps.n)]
    for i, j in edges:
        adj[i].append(j)
        adj[j].append(i)
    if ps.n >= 2 and any(not a for a in adj):
        missing = [i for i, a in enumerate(adj) if not a]
        raise RuntimeError(f"points {missing} have no incident edges")

    return DelaunayGraph(
        n=ps.n,
        dim=k,
        adjacency=tuple(tuple(sorted(a)) for a in adj),
        edge_lengths=edge_lengths,
        simplices=tuple(simplices),
        insertion_seed=insertion_seed,
        jitter_seed=jitter_seed,
        stats=stats,
    )
