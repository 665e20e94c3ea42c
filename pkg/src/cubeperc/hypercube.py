"""
Exact combinatorial geometry of the binary n-cube.

Vertices are plain ints: bit ``i`` holds coordinate ``x_{i+1}``.  Vertex sets
are dense boolean arrays of length ``2**n`` wrapped in :class:`OccupancySet`.
Coordinate indices in the public API are 1-based, matching ``x_1..x_n``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from math import comb
from typing import Iterable, Sequence

import numpy as np

from .errors import DegenerateLayoutError, GeometryMismatchError, ResourceCapError

DENSE_CAP = 30


@dataclass(frozen=True)
class CubeGeometry:
    n: int

    def __post_init__(self):
        if not isinstance(self.n, (int, np.integer)) or self.n < 1:
            raise ValueError(f"dimension must be a positive integer, got {self.n!r}")

    @property
    def size(self) -> int:
        return 1 << self.n

    @property
    def mask(self) -> int:
        return (1 << self.n) - 1

    def check_vertex(self, v: int) -> int:
        if not 0 <= v < self.size:
            raise ValueError(f"vertex {v} outside Q_2^{self.n}")
        return int(v)

    def check_dense(self):
        if self.n > DENSE_CAP:
            raise ResourceCapError(f"dense vertex sets are capped at n <= {DENSE_CAP} (got n={self.n})")

    @cached_property
    def indices(self) -> np.ndarray:
        self.check_dense()
        idx = np.arange(self.size, dtype=np.int64)
        idx.setflags(write=False)
        return idx

    @cached_property
    def weights(self) -> np.ndarray:
        w = popcount_array(self.indices)
        w.setflags(write=False)
        return w


@dataclass(frozen=True, eq=False)
class OccupancySet:
    """An immutable vertex subset of Q_2^n stored as a dense bit array."""

    geometry: CubeGeometry
    members: np.ndarray = field(repr=False)

    def __post_init__(self):
        self.geometry.check_dense()
        arr = np.asarray(self.members, dtype=bool)
        if arr.shape != (self.geometry.size,):
            raise ValueError(f"member array must have shape ({self.geometry.size},), got {arr.shape}")
        if arr.flags.writeable:
            arr = arr.copy()
            arr.setflags(write=False)
        object.__setattr__(self, "members", arr)

    @cached_property
    def cardinality(self) -> int:
        return int(np.count_nonzero(self.members))

    def __len__(self) -> int:
        return self.cardinality

    def __contains__(self, v: int) -> bool:
        return 0 <= v < self.geometry.size and bool(self.members[v])

    def __iter__(self):
        return iter(self.vertices().tolist())

    def __eq__(self, other) -> bool:
        if not isinstance(other, OccupancySet):
            return NotImplemented
        return self.geometry == other.geometry and np.array_equal(self.members, other.members)

    def __hash__(self):
        return hash((self.geometry, self.members.tobytes()))

    def vertices(self) -> np.ndarray:
        return np.flatnonzero(self.members)

    def _same(self, other: "OccupancySet"):
        if self.geometry != other.geometry:
            raise GeometryMismatchError(f"n={self.geometry.n} vs n={other.geometry.n}")

    def __or__(self, other: "OccupancySet") -> "OccupancySet":
        self._same(other)
        return OccupancySet(self.geometry, self.members | other.members)

    def __and__(self, other: "OccupancySet") -> "OccupancySet":
        self._same(other)
        return OccupancySet(self.geometry, self.members & other.members)

    def __sub__(self, other: "OccupancySet") -> "OccupancySet":
        self._same(other)
        return OccupancySet(self.geometry, self.members & ~other.members)

    def complement(self) -> "OccupancySet":
        return OccupancySet(self.geometry, ~self.members)

    def translate(self, g: int) -> "OccupancySet":
        """The set ``g + A``."""
        g = self.geometry.check_vertex(g)
        return OccupancySet(self.geometry, self.members[self.geometry.indices ^ g])

    @classmethod
    def empty(cls, geometry: CubeGeometry) -> "OccupancySet":
        geometry.check_dense()
        return cls(geometry, np.zeros(geometry.size, dtype=bool))

    @classmethod
    def full(cls, geometry: CubeGeometry) -> "OccupancySet":
        geometry.check_dense()
        return cls(geometry, np.ones(geometry.size, dtype=bool))

    @classmethod
    def from_vertices(cls, geometry: CubeGeometry, vertices: Iterable[int]) -> "OccupancySet":
        geometry.check_dense()
        arr = np.zeros(geometry.size, dtype=bool)
        vs = [geometry.check_vertex(v) for v in vertices]
        arr[vs] = True
        return cls(geometry, arr)


def popcount(v: int) -> int:
    return bin(v).count("1")


def popcount_array(a: np.ndarray) -> np.ndarray:
    a = np.asarray(a, dtype=np.uint64)
    out = np.zeros(a.shape, dtype=np.int64)
    for shift in range(0, 64, 8):
        out += _BYTE_POPCOUNT[(a >> np.uint64(shift)) & np.uint64(0xFF)]
    return out


_BYTE_POPCOUNT = np.array([bin(i).count("1") for i in range(256)], dtype=np.int64)


def vertex_from_bits(bits: Sequence[int]) -> int:
    """Build a vertex from the coordinate word ``(x_1, ..., x_n)``."""
    return sum(1 << i for i, b in enumerate(bits) if b)


def vertex_to_bits(v: int, n: int) -> tuple[int, ...]:
    return tuple((v >> i) & 1 for i in range(n))


def unit(i: int) -> int:
    """The unit vector ``e_i`` (1-based coordinate)."""
    return 1 << (i - 1)


def neighbor(geometry: CubeGeometry, v: int, i: int) -> int:
    if not 1 <= i <= geometry.n:
        raise IndexError(f"coordinate index {i} outside 1..{geometry.n}")
    return geometry.check_vertex(v) ^ (1 << (i - 1))


def hamming_distance(geometry: CubeGeometry, u: int, v: int, other: CubeGeometry | None = None) -> int:
    if other is not None and other != geometry:
        raise GeometryMismatchError(f"n={geometry.n} vs n={other.n}")
    return popcount(geometry.check_vertex(u) ^ geometry.check_vertex(v))


# Walsh-Hadamard machinery: XOR-convolution counts |{a in A : d(v, a) = j}|.

def fwht(a: np.ndarray) -> np.ndarray:
    """Unnormalised Walsh-Hadamard transform over the last axis (length 2**n)."""
    a = np.array(a, dtype=np.int64, copy=True)
    size = a.shape[-1]
    lead = a.shape[:-1]
    h = 1
    while h < size:
        a = a.reshape(lead + (size // (2 * h), 2, h))
        x, y = a[..., 0, :], a[..., 1, :]
        a = np.stack((x + y, x - y), axis=-2)
        h *= 2
    return a.reshape(lead + (size,))


def xor_convolve(f: np.ndarray, g: np.ndarray) -> np.ndarray:
    """``(f * g)(v) = sum_a f(a) g(v ^ a)``, exact in int64."""
    size = f.shape[-1]
    out = fwht(fwht(f) * fwht(g))
    return out // size


def distance_counts(A: OccupancySet, j: int) -> np.ndarray:
    """For every vertex v, the number of ``a in A`` with ``d(v, a) == j``."""
    geo = A.geometry
    shell = (geo.weights == j).astype(np.int64)
    return xor_convolve(A.members.astype(np.int64), shell)


def sphere(A: OccupancySet, j: int) -> OccupancySet:
    """``S(A, j) = {v : exists a in A with d(v, a) == j}``.

    Literal reading: a member of ``A`` can lie in ``S(A, 2)`` through a
    different ``a``.  This is not "distance to the set equals j".
    """
    n = A.geometry.n
    if not 0 <= j <= n:
        raise ValueError(f"radius {j} outside 0..{n}")
    if j == 0:
        return A
    if j == 1:
        return boundary_literal(A)
    return OccupancySet(A.geometry, distance_counts(A, j) > 0)


def ball(A: OccupancySet, j: int) -> OccupancySet:
    """``B(A, j)``: union of the spheres of radius 0..j."""
    geo = A.geometry
    if j < 0:
        raise ValueError(f"negative radius {j}")
    j = min(j, geo.n)
    if j == geo.n:
        return OccupancySet(geo, np.full(geo.size, A.cardinality > 0))
    shell = (geo.weights <= j).astype(np.int64)
    return OccupancySet(geo, xor_convolve(A.members.astype(np.int64), shell) > 0)


def boundary_literal(A: OccupancySet) -> OccupancySet:
    """``d(A) = {v : exists a in A, d(v, a) == 1}``; may intersect A."""
    geo = A.geometry
    idx = geo.indices
    out = np.zeros(geo.size, dtype=bool)
    for i in range(geo.n):
        out |= A.members[idx ^ (1 << i)]
    return OccupancySet(geo, out)


def boundary_external(A: OccupancySet) -> OccupancySet:
    """Vertices outside A with a neighbour in A."""
    return OccupancySet(A.geometry, boundary_literal(A).members & ~A.members)


def is_dense(A: OccupancySet, B: OccupancySet, radius: int) -> bool:
    """True iff every vertex of B is within ``radius`` of some vertex of A."""
    A._same(B)
    if B.cardinality == 0:
        return True
    if A.cardinality == 0:
        return False
    return not np.any(B.members & ~ball(A, radius).members)


def sphere_size(n: int, j: int) -> int:
    return comb(n, j) if 0 <= j <= n else 0


def ball_size(n: int, j: int) -> int:
    return sum(comb(n, i) for i in range(0, min(j, n) + 1))


# Linear order: weight first, then lexicographic with x_1 most significant and
# the word carrying the 1 at the first difference coming first.

def _reverse_bits(v: int, n: int) -> int:
    return int(format(v, f"0{n}b")[::-1], 2) if n else 0


def order_key(v: int, n: int) -> tuple[int, int]:
    """Sort key realising the linear order on Q_2^n."""
    return popcount(v), _reverse_bits(~v & ((1 << n) - 1), n)


def order_less(geometry: CubeGeometry, u: int, v: int, other: CubeGeometry | None = None) -> bool:
    if other is not None and other != geometry:
        raise GeometryMismatchError(f"n={geometry.n} vs n={other.n}")
    n = geometry.n
    return order_key(geometry.check_vertex(u), n) < order_key(geometry.check_vertex(v), n)


def order_rank(geometry: CubeGeometry) -> np.ndarray:
    """``rank[v]`` is the position of v in the linear order (0 for the origin)."""
    idx = geometry.indices
    n = geometry.n
    rev = np.zeros(geometry.size, dtype=np.int64)
    comp = idx ^ geometry.mask
    for i in range(n):
        rev |= ((comp >> i) & 1) << (n - 1 - i)
    perm = np.lexsort((rev, geometry.weights))
    rank = np.empty(geometry.size, dtype=np.int64)
    rank[perm] = np.arange(geometry.size)
    return rank


def sorted_by_order(vertices: Iterable[int], n: int, origin: int = 0) -> list[int]:
    """Sort vertices in the linear order of their translates ``v - origin``."""
    return sorted(vertices, key=lambda v: order_key(v ^ origin, n))


def floor_n23(p: int, q: int, n: int) -> int:
    """``floor(p/q * n**(2/3))`` computed exactly."""
    if p < 0 or q <= 0 or n < 0:
        raise ValueError("floor_n23 needs p >= 0, q > 0, n >= 0")
    j = int(p * n ** (2 / 3) / q)
    bound = p ** 3 * n ** 2
    while j > 0 and (j * q) ** 3 > bound:
        j -= 1
    while ((j + 1) * q) ** 3 <= bound:
        j += 1
    return j


@dataclass(frozen=True)
class CoordinateLayout:
    """Block partition of the coordinates used by the growth constructions.

    Coordinates ``1..k*nu`` form the stage blocks ``B_1..B_k`` (``nu`` each),
    the next ``iota`` form block ``k+1``, and ``z+1..n`` is the tail used by
    the gamma-process.
    """

    n: int
    k: int
    u_n: float
    nu_n: int
    iota_n: int
    z_n: int
    m: int
    target: int

    def block_unit(self, r: int, s: int) -> int:
        """1-based coordinate index of ``e_s^{(r)}``."""
        if 1 <= r <= self.k:
            if not 1 <= s <= self.nu_n:
                raise IndexError(f"s={s} outside 1..{self.nu_n}")
            return s + (r - 1) * self.nu_n
        if r == self.k + 1:
            if not 1 <= s <= self.iota_n:
                raise IndexError(f"s={s} outside 1..{self.iota_n}")
            return s + self.k * self.nu_n
        raise IndexError(f"block r={r} outside 1..{self.k + 1}")

    def block(self, r: int) -> range:
        if 1 <= r <= self.k:
            return range((r - 1) * self.nu_n + 1, r * self.nu_n + 1)
        if r == self.k + 1:
            return range(self.k * self.nu_n + 1, self.z_n + 1)
        raise IndexError(f"block r={r} outside 1..{self.k + 1}")

    @property
    def tail_units(self) -> range:
        return range(self.z_n + 1, self.n + 1)

    def as_dict(self) -> dict:
        return {
            "n": self.n, "k": self.k, "u_n": self.u_n, "nu_n": self.nu_n,
            "iota_n": self.iota_n, "z_n": self.z_n, "m": self.m, "target": self.target,
        }


def make_layout(n: int, k: int) -> CoordinateLayout:
    if n < 1 or k < 1:
        raise ValueError(f"need n >= 1 and k >= 1, got n={n}, k={k}")
    nu = floor_n23(1, 2 * k * (k + 1), n)
    iota = floor_n23(k, 2 * k + 1, n)
    if nu == 0 or iota == 0:
        raise DegenerateLayoutError(f"degenerate layout for n={n}, k={k}: nu_n={nu}, iota_n={iota}")
    z = k * nu + iota
    return CoordinateLayout(
        n=n, k=k, u_n=n ** (-1 / 3), nu_n=nu, iota_n=iota, z_n=z,
        m=n - floor_n23(3, 4, n), target=floor_n23(1, 4, n),
    )
