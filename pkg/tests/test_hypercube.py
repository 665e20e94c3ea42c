from itertools import product
from math import comb

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cubeperc.errors import DegenerateLayoutError, GeometryMismatchError
from cubeperc.hypercube import (
    CubeGeometry,
    OccupancySet,
    ball,
    ball_size,
    boundary_external,
    boundary_literal,
    floor_n23,
    hamming_distance,
    is_dense,
    make_layout,
    neighbor,
    order_key,
    order_less,
    order_rank,
    sphere,
    vertex_from_bits,
)


def brute_sphere(A, j):
    n = A.geometry.n
    return {v for v in range(1 << n) if any(bin(v ^ a).count("1") == j for a in A)}


def brute_ball(A, j):
    n = A.geometry.n
    return {v for v in range(1 << n) if any(bin(v ^ a).count("1") <= j for a in A)}


def test_neighbor_unit_and_pattern():
    g3 = CubeGeometry(3)
    assert neighbor(g3, 0, 1) == vertex_from_bits((1, 0, 0))
    g2 = CubeGeometry(2)
    v = vertex_from_bits((1, 1))
    w = neighbor(g2, v, 2)
    assert w == vertex_from_bits((1, 0))
    assert hamming_distance(g2, v, w) == 1


def test_neighbor_range():
    with pytest.raises(IndexError):
        neighbor(CubeGeometry(3), 0, 4)
    with pytest.raises(IndexError):
        neighbor(CubeGeometry(3), 0, 0)


@given(st.integers(1, 16).flatmap(lambda n: st.tuples(st.just(n), st.integers(0, (1 << n) - 1), st.integers(1, n))))
def test_neighbor_involution_and_weight(case):
    n, v, i = case
    g = CubeGeometry(n)
    w = neighbor(g, v, i)
    assert neighbor(g, w, i) == v
    assert abs(bin(w).count("1") - bin(v).count("1")) == 1
    assert bin(v ^ w).count("1") == 1 and (v ^ w) == 1 << (i - 1)


def test_hamming_basics():
    g = CubeGeometry(3)
    assert hamming_distance(g, 5, 5) == 0
    assert hamming_distance(g, 0, 7) == 3
    with pytest.raises(GeometryMismatchError):
        hamming_distance(g, 0, 1, other=CubeGeometry(4))


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_triangle_inequality_exhaustive(n):
    g = CubeGeometry(n)
    N = 1 << n
    for u, v, w in product(range(N), repeat=3):
        d = lambda a, b: hamming_distance(g, a, b)
        assert d(u, w) <= d(u, v) + d(v, w)
        assert d(u, v) == d(v, u)


@pytest.mark.parametrize("n", range(1, 9))
def test_sphere_and_ball_sizes_exhaustive(n):
    g = CubeGeometry(n)
    for v in (0, (1 << n) - 1, 5 % (1 << n)):
        A = OccupancySet.from_vertices(g, [v])
        for j in range(n + 1):
            assert sphere(A, j).cardinality == comb(n, j)
            assert ball(A, j).cardinality == ball_size(n, j) == sum(comb(n, i) for i in range(j + 1))


def test_sphere_small_cases():
    g = CubeGeometry(3)
    A = OccupancySet.from_vertices(g, [0])
    assert sphere(A, 0) == A
    assert sphere(A, 1).cardinality == 3


def test_ball_seven_is_cumulative():
    n = 10
    A = OccupancySet.from_vertices(CubeGeometry(n), [3])
    assert ball(A, 7).cardinality == sum(comb(n, i) for i in range(8))
    assert ball(A, 7).cardinality != comb(n, 7)


def test_ball_full_radius_and_two_point_example():
    g = CubeGeometry(4)
    A = OccupancySet.from_vertices(g, [0b0000, 0b1111])
    assert ball(A, 4) == OccupancySet.full(g)
    assert ball(A, 1).cardinality == 10


def test_sphere_literal_semantics():
    # 0 and 3 are at distance 2, so each lies in S(A, 2) although both are in A
    g = CubeGeometry(3)
    A = OccupancySet.from_vertices(g, [0, 3])
    s2 = sphere(A, 2)
    assert 0 in s2 and 3 in s2


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 7).flatmap(lambda n: st.tuples(st.just(n), st.sets(st.integers(0, (1 << n) - 1)),
                                                     st.integers(0, n))))
def test_sphere_ball_match_brute_force(case):
    n, verts, j = case
    A = OccupancySet.from_vertices(CubeGeometry(n), verts)
    assert set(sphere(A, j).vertices().tolist()) == brute_sphere(A, j)
    assert set(ball(A, j).vertices().tolist()) == brute_ball(A, j)


def test_boundary_examples():
    g = CubeGeometry(5)
    single = OccupancySet.from_vertices(g, [9])
    assert boundary_literal(single).cardinality == 5
    assert boundary_external(single).cardinality == 5
    full = OccupancySet.full(g)
    assert boundary_literal(full) == full
    assert boundary_external(full).cardinality == 0

    g2 = CubeGeometry(2)
    A = OccupancySet.from_vertices(g2, [0b00, 0b01])
    assert boundary_literal(A) == OccupancySet.full(g2)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_half_cube_external_boundary(n):
    g = CubeGeometry(n)
    top = 1 << (n - 1)
    half = OccupancySet(g, (g.indices & top) == 0)
    assert boundary_external(half) == half.complement()


def test_boundary_decomposition_random_sets():
    g = CubeGeometry(10)
    rng = np.random.default_rng(11)
    for _ in range(1000):
        A = OccupancySet(g, rng.random(g.size) < rng.uniform(0, 0.3))
        lit, ext = boundary_literal(A), boundary_external(A)
        assert not np.any(ext.members & A.members)
        assert lit == ext | (A & lit)


def test_order_examples():
    g = CubeGeometry(3)
    e1, e2, e3 = 1, 2, 4
    for v in range(1, 8):
        assert order_less(g, 0, v)
    assert order_less(g, e1, e2) and order_less(g, e2, e3)
    for a in (e1, e2, e3):
        for b in (3, 5, 6):
            assert order_less(g, a, b)


def test_order_x1_most_significant():
    # equal weight: the word with a 1 at the first differing coordinate x_i comes first
    g = CubeGeometry(4)
    assert order_less(g, vertex_from_bits((1, 0, 0, 1)), vertex_from_bits((0, 1, 1, 0)))


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_order_is_strict_total(n):
    g = CubeGeometry(n)
    N = 1 << n
    for u in range(N):
        assert not order_less(g, u, u)
        for v in range(N):
            if u != v:
                assert order_less(g, u, v) != order_less(g, v, u)
    ranked = sorted(range(N), key=lambda v: order_key(v, n))
    rank = order_rank(g)
    assert [int(x) for x in np.argsort(rank)] == ranked
    for a, b, c in product(range(N), repeat=3):
        if order_less(g, a, b) and order_less(g, b, c):
            assert order_less(g, a, c)


def test_is_dense():
    g = CubeGeometry(3)
    A = OccupancySet.from_vertices(g, [1, 6])
    for ell in range(4):
        assert is_dense(A, A, ell)
    assert not is_dense(OccupancySet.empty(g), OccupancySet.full(g), 3)
    assert is_dense(OccupancySet.from_vertices(g, [0]), OccupancySet.full(g), 3)
    assert not is_dense(OccupancySet.from_vertices(g, [0]), OccupancySet.full(g), 2)


def test_occupancy_set_cardinality_and_immutability():
    g = CubeGeometry(6)
    arr = np.zeros(64, dtype=bool)
    arr[[1, 2, 3]] = True
    A = OccupancySet(g, arr)
    arr[5] = True
    assert A.cardinality == 3 == int(A.members.sum())
    with pytest.raises(ValueError):
        A.members[0] = True


def test_floor_n23_exact():
    assert floor_n23(1, 1, 64) == 16
    assert floor_n23(1, 1, 27) == 9
    for n in range(1, 3000):
        for p, q in ((1, 4), (3, 4), (1, 12), (2, 5)):
            j = floor_n23(p, q, n)
            assert (j * q) ** 3 <= p ** 3 * n ** 2 < ((j + 1) * q) ** 3


def test_layout_examples():
    L = make_layout(64, 1)
    assert (L.nu_n, L.iota_n, L.z_n, L.m, L.target) == (4, 5, 9, 52, 4)
    L2 = make_layout(64, 2)
    assert (L2.nu_n, L2.iota_n, L2.z_n) == (1, 6, 8)
    with pytest.raises(DegenerateLayoutError):
        make_layout(27, 3)


def test_layout_block_units():
    L = make_layout(64, 1)
    assert [L.block_unit(1, s) for s in range(1, 5)] == [1, 2, 3, 4]
    assert [L.block_unit(2, s) for s in range(1, 6)] == [5, 6, 7, 8, 9]
    assert list(L.tail_units) == list(range(10, 65))


def test_layout_blocks_disjoint_and_cover_on_log_grid():
    ns = sorted({int(round(x)) for x in np.geomspace(32, 2 ** 15, 40)})
    for k in range(2, 7):
        for n in ns:
            try:
                L = make_layout(n, k)
            except DegenerateLayoutError:
                continue
            assert L.z_n == k * L.nu_n + L.iota_n
            blocks = [set(L.block(r)) for r in range(1, k + 2)] + [set(L.tail_units)]
            for a in range(len(blocks)):
                for b in range(a + 1, len(blocks)):
                    assert not blocks[a] & blocks[b]
            assert set().union(*blocks) == set(range(1, n + 1))
            assert L.m == n - floor_n23(3, 4, n)
