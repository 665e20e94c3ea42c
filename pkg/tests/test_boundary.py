import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cubeperc.boundary import (
    best_direction,
    check_path_bundle,
    density_cutoff,
    density_report,
    direction_bound_holds,
    displacements,
    disjoint_path_upper_bound,
    exact_short_path_packing,
    find_disjoint_short_paths,
    is_maximal_bundle,
    random_subsets,
    sidon_sum,
    sidon_sums_all_subsets,
)
from cubeperc.errors import InvariantViolation
from cubeperc.hypercube import CubeGeometry, OccupancySet, boundary_external, distance_counts
from cubeperc.sampling import TrialSeed, sample_occupancy


def test_sidon_examples():
    g = CubeGeometry(3)
    assert sidon_sum(g, OccupancySet.empty(g)) == 0
    assert sidon_sum(g, OccupancySet.from_vertices(g, [5])) == 1
    assert sidon_sum(g, OccupancySet.full(g)) == 64


def test_sidon_all_subsets_n3():
    sums, sizes = sidon_sums_all_subsets(3)
    assert sums.size == 256
    assert np.array_equal(sums, sizes ** 2)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 11), st.integers(0, 2 ** 32), st.floats(0, 1))
def test_sidon_routes_agree(n, seed, p):
    g = CubeGeometry(n)
    A = OccupancySet(g, np.random.default_rng(seed).random(g.size) < p)
    slow = sidon_sum(g, A, method="slow")
    assert slow == sidon_sum(g, A, method="autocorrelation") == A.cardinality ** 2


def test_sidon_bad_method():
    g = CubeGeometry(2)
    with pytest.raises(ValueError):
        sidon_sum(g, OccupancySet.empty(g), method="fast")


def test_direction_examples():
    g = CubeGeometry(4)
    full = OccupancySet.full(g)
    assert displacements(full).tolist() == [0, 0, 0, 0]
    assert best_direction(g, full) == (1, 0)
    single = OccupancySet.from_vertices(g, [6])
    assert best_direction(g, single) == (1, 1)
    half = OccupancySet(g, (g.indices & 8) == 0)
    i, value = best_direction(g, half)
    assert (i, value) == (4, 8)


def test_direction_bound_exact_arithmetic():
    # |A| = 2^(n-1): bound is 2^(n-2)/n exactly
    assert direction_bound_holds(1, 2, 2)
    assert not direction_bound_holds(0, 1, 3)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 10), st.integers(0, 2 ** 32), st.floats(0, 1))
def test_direction_bound_random(n, seed, p):
    g = CubeGeometry(n)
    A = OccupancySet(g, np.random.default_rng(seed).random(g.size) < p)
    i, value = best_direction(g, A)
    assert 1 <= i <= n
    assert value * n * g.size >= A.cardinality * (g.size - A.cardinality)


def test_density_report():
    g = CubeGeometry(10)
    occ = sample_occupancy(10, 0.3, TrialSeed(1, 0))
    rep = density_report(g, occ, 1, 0.1)
    assert np.array_equal(rep.per_vertex_counts, distance_counts(occ, 2))
    assert rep.histogram.sum() == g.size
    assert rep.d_delta_size == int(np.count_nonzero(rep.per_vertex_counts < rep.threshold))
    assert density_cutoff(10, 1, 0.0) == pytest.approx(0.5 / 16)


def test_density_counts_brute_force():
    g = CubeGeometry(6)
    occ = sample_occupancy(6, 0.4, TrialSeed(2, 0))
    counts = distance_counts(occ, 2)
    for v in range(g.size):
        assert counts[v] == sum(1 for a in occ if bin(a ^ v).count("1") == 2)


def _split(g, rng):
    a = rng.random(g.size) < rng.uniform(0.05, 0.4)
    b = (rng.random(g.size) < rng.uniform(0.05, 0.4)) & ~a
    return OccupancySet(g, a), OccupancySet(g, b)


def test_paths_against_oracles():
    rng = np.random.default_rng(17)
    checked = 0
    for _ in range(200):
        n = int(rng.integers(3, 6))
        g = CubeGeometry(n)
        A, B = _split(g, rng)
        if A.cardinality == 0 or B.cardinality == 0:
            continue
        bundle = find_disjoint_short_paths(g, A, B)
        check_path_bundle(g, bundle, boundary_external(A), boundary_external(B), forbidden=A | B)
        assert is_maximal_bundle(g, bundle, A, B)
        best = exact_short_path_packing(g, A, B)
        assert len(bundle) <= best <= disjoint_path_upper_bound(g, A, B)
        # a maximal family meets every path in the optimum, each of its paths at most 4 times
        assert 4 * len(bundle) >= best
        checked += 1
    assert checked > 100


def test_path_bundle_rejects_long_path():
    from cubeperc.boundary import PathBundle
    g = CubeGeometry(4)
    A = OccupancySet.from_vertices(g, [0])
    B = OccupancySet.from_vertices(g, [15])
    bad = PathBundle(((1, 3, 7, 5, 13),), (1,), (13,), "small-ball")
    with pytest.raises(InvariantViolation):
        check_path_bundle(g, bad, boundary_external(A), boundary_external(B))


def test_paths_reject_overlap():
    g = CubeGeometry(3)
    A = OccupancySet.from_vertices(g, [0])
    with pytest.raises(ValueError):
        find_disjoint_short_paths(g, A, A)


def test_random_subsets_reproducible():
    g = CubeGeometry(5)
    assert random_subsets(g, 5, 3) == random_subsets(g, 5, 3)
