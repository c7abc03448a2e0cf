import numpy as np
import pytest

from delo import (
    DuplicatePointError,
    GeneralPositionError,
    GeometryError,
    PointSet,
    delaunay,
    incident_edges,
    max_edge_length,
)
from delo.oracle import delaunay_bruteforce

from conftest import random_pointset


def test_triangle_is_complete_with_expected_lengths():
    g = delaunay([(0, 0), (3, 0), (0, 4)])
    assert g.edges() == [(0, 1), (0, 2), (1, 2)]
    assert sorted(g.edge_lengths.values()) == [3.0, 4.0, 5.0]
    assert g.simplices == ((0, 1, 2),)


def test_four_point_example_matches_oracle():
    pts = [(0, 0), (1, 0), (0, 1), (0.9, 0.9)]
    g = delaunay(pts)
    assert g.edge_set() == delaunay_bruteforce(pts)
    assert g.edges() == [(0, 1), (0, 2), (0, 3), (1, 3), (2, 3)]
    assert (1, 2) not in g.edge_set()


def test_4d_minimal_sample_matches_oracle(rng):
    pts = rng.uniform(-1, 1, (6, 4))
    g = delaunay(pts)
    assert g.edge_set() == delaunay_bruteforce(pts)


def test_incident_edges_triangle():
    g = delaunay([(0, 0), (3, 0), (0, 4)])
    assert g.incident_edges(0) == [(1, 3.0), (2, 4.0)]
    assert incident_edges(g, 0) == g.incident_edges(0)


def test_incident_edges_two_points():
    g = delaunay([(0.0,), (7.0,)])
    assert g.incident_edges(0) == [(1, 7.0)]
    assert g.incident_edges(1) == [(0, 7.0)]


def test_incident_edges_index_error():
    g = delaunay([(0, 0), (3, 0), (0, 4)])
    with pytest.raises(IndexError):
        g.incident_edges(3)


def test_incident_edges_match_oracle_random(rng):
    pts = rng.uniform(-1, 1, (10, 2))
    g = delaunay(pts)
    assert g.edge_set() == delaunay_bruteforce(pts)


def test_max_edge_length():
    assert max_edge_length(delaunay([(0, 0), (3, 0), (0, 4)])) == 5.0
    assert max_edge_length(delaunay([(0.0,), (7.0,)])) == 7.0


def test_max_edge_shrinks_with_sample_size():
    # qualitative form of the vanishing longest edge over a disk
    meds = {}
    for n in (50, 500):
        lams = []
        for rep in range(20):
            rng = np.random.default_rng(1000 + rep)
            pts = rng.normal(size=(n, 2))
            pts = pts / np.linalg.norm(pts, axis=1)[:, None] * np.sqrt(rng.uniform(0, 1, n))[:, None]
            lams.append(delaunay(pts).max_edge_length())
        meds[n] = float(np.median(lams))
    assert meds[500] < meds[50]


def test_small_sets_complete_graph():
    assert delaunay([(0, 0, 0), (1, 2, 2)]).edges() == [(0, 1)]
    g = delaunay([(0, 0, 0), (1, 0, 0), (0, 1, 0)])  # n = 3 < k+1 = 4
    assert g.edges() == [(0, 1), (0, 2), (1, 2)]
    assert g.simplices == ()
    g2 = delaunay([(0, 0), (1, 0), (0, 1)])  # n = k+1
    assert g2.simplices == ((0, 1, 2),)


def test_small_affinely_dependent_set_refused():
    with pytest.raises(GeneralPositionError) as exc:
        delaunay([(0, 0), (1, 1), (2, 2)])
    assert exc.value.kind == "affine_span"


def test_cocircular_refused_with_subset():
    with pytest.raises(GeneralPositionError) as exc:
        delaunay([(0, 0), (1, 0), (0, 1), (1, 1)])
    assert exc.value.kind == "cospherical"
    assert exc.value.subset == (0, 1, 2, 3)


def test_jitter_mode_resolves_cocircularity():
    g = delaunay([(0, 0), (1, 0), (0, 1), (1, 1)], jitter_seed=11)
    assert g.jitter_seed == 11
    assert len(g.edges()) == 5
    assert g.is_connected()


def test_needs_two_points():
    with pytest.raises(GeometryError):
        delaunay([(0, 0)])


def test_duplicate_points_rejected():
    with pytest.raises(DuplicatePointError):
        delaunay([(0, 0), (1, 1), (0, 0)])


def test_collinear_subset_is_handled():
    # a collinear triple inside a spanning set is legal input
    g = delaunay([(0, 0), (1, 1), (2, 2), (3, 0.0)])
    assert g.is_connected()
    assert g.edge_set() == delaunay_bruteforce([(0, 0), (1, 1), (2, 2), (3, 0.0)])


@pytest.mark.parametrize("k,n,seed", [(1, 12, 0), (2, 25, 1), (3, 25, 2), (4, 20, 3)])
def test_structural_invariants_random(k, n, seed):
    g = delaunay(random_pointset(seed, n, k))
    # symmetry and no self-loops
    for i, nbrs in enumerate(g.adjacency):
        assert i not in nbrs
        for j in nbrs:
            assert i in g.adjacency[j]
    assert g.is_connected()
    # nearest neighbor is adjacent
    coords = random_pointset(seed, n, k).coords
    for i in range(n):
        d = np.linalg.norm(coords - coords[i], axis=1)
        d[i] = np.inf
        assert int(np.argmin(d)) in g.adjacency[i]
    # every edge appears in a simplex
    from_simplices = {tuple(sorted(p)) for s in g.simplices
                      for p in __import__("itertools").combinations(s, 2)}
    assert from_simplices == g.edge_set()


def test_insertion_order_does_not_change_output():
    ps = random_pointset(7, 40, 2)
    base = delaunay(ps)
    for seed in (1, 2, 3):
        g = delaunay(ps, insertion_seed=seed)
        assert g.edge_set() == base.edge_set()
        assert g.simplices == base.simplices
        assert g.edge_lengths == base.edge_lengths


def test_euler_counts_2d(rng):
    for _ in range(5):
        n = int(rng.integers(10, 200))
        ps = PointSet(rng.uniform(-1, 1, (n, 2)))
        g = delaunay(ps)
        h = _hull_vertex_count(ps.coords)
        assert len(g.edge_lengths) == 3 * n - 3 - h
        assert len(g.simplices) == 2 * n - 2 - h


def _hull_vertex_count(coords: np.ndarray) -> int:
    """Convex hull vertex count via a monotone chain with exact turns."""
    from delo import Sign, orient

    pts = sorted(map(tuple, coords))

    def chain(seq):
        out = []
        for p in seq:
            while len(out) >= 2 and orient([out[-2], out[-1], p]) is not Sign.POSITIVE:
                out.pop()
            out.append(p)
        return out

    lower = chain(pts)
    upper = chain(reversed(pts))
    return len(lower) + len(upper) - 2


def test_1d_delaunay_is_path():
    xs = [3.0, 1.0, 2.0, 0.0, 10.0]
    g = delaunay([(x,) for x in xs])
    order = np.argsort(xs)
    expected = {tuple(sorted((int(order[i]), int(order[i + 1])))) for i in range(4)}
    assert g.edge_set() == expected


def test_interior_point_fan():
    # one point inside a triangle: three cells fan around it
    g = delaunay([(0, 0), (4, 0), (0, 4), (1, 1)])
    assert g.edge_set() == {(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)}
    assert len(g.simplices) == 3
