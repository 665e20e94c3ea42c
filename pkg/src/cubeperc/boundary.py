"""
Boundary identities for translations of Q_2^n and the short-path structure
between two vertex sets.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np
from numba import njit

from .errors import InvariantViolation
from .hypercube import (
    CubeGeometry,
    OccupancySet,
    ball,
    boundary_external,
    distance_counts,
    fwht,
)

SLOW_SIDON_CAP = 12


@njit(cache=True, nogil=True)
def _sidon_direct(members, occupied):
    total = 0
    for g in range(members.shape[0]):
        for v in occupied:
            if members[v ^ g]:
                total += 1
    return total


def _sidon_slow(A: OccupancySet) -> int:
    # literal double sum over translations g and vertices v
    return int(_sidon_direct(np.ascontiguousarray(A.members), np.flatnonzero(A.members)))


def _sidon_autocorrelation(A: OccupancySet) -> int:
    # autocorrelation of the indicator via Walsh-Hadamard: r = H(H(a)^2) / 2^n
    h = fwht(A.members.astype(np.int64))
    r = fwht(h * h) // A.geometry.size
    return int(r.sum())


def sidon_sum(geometry: CubeGeometry, A: OccupancySet, method: str = "auto") -> int:
    """``sum over g of |A & (g + A)|``; equals ``|A|**2`` for translations of F_2^n."""
    if A.geometry != geometry:
        raise ValueError("set belongs to a different geometry")
    if method == "auto":
        method = "slow" if geometry.n <= SLOW_SIDON_CAP else "autocorrelation"
    if method == "slow":
        return _sidon_slow(A)
    if method == "autocorrelation":
        return _sidon_autocorrelation(A)
    raise ValueError(f"unknown method {method!r}")


def sidon_sums_all_subsets(n: int) -> tuple[np.ndarray, np.ndarray]:
    """``(sums, sizes)`` for every subset of Q_2^n, subsets indexed by bitmask.

    Feasible for n <= 4 (65536 subsets).
    """
    size = 1 << n
    if size > 16:
        raise ValueError("exhaustive subset sweep only for n <= 4")
    masks = np.arange(1 << size, dtype=np.int64)
    bits = ((masks[:, None] >> np.arange(size)) & 1).astype(bool)
    idx = np.arange(size)
    sums = np.zeros(masks.size, dtype=np.int64)
    for g in range(size):
        sums += np.count_nonzero(bits & bits[:, idx ^ g], axis=1)
    return sums, bits.sum(axis=1)


def displacements(A: OccupancySet) -> np.ndarray:
    """``|(A + e_i) \\ A|`` for i = 1..n (entry i-1)."""
    members = A.members
    idx = A.geometry.indices
    return np.array([A.cardinality - np.count_nonzero(members & members[idx ^ (1 << i)])
                     for i in range(A.geometry.n)], dtype=np.int64)


def direction_bound_holds(displaced: int, size: int, n: int) -> bool:
    """``displaced >= size (1 - size/2^n) / n`` in exact integers."""
    return displaced * n * (1 << n) >= size * ((1 << n) - size)


def best_direction(geometry: CubeGeometry, A: OccupancySet) -> tuple[int, int]:
    """The unit direction moving most of A off itself, and how many it moves.

    Raises :class:`InvariantViolation` if the isoperimetric lower bound
    ``|A| (1 - |A|/2^n) / n`` fails.
    """
    if A.geometry != geometry:
        raise ValueError("set belongs to a different geometry")
    disp = displacements(A)
    i = int(np.argmax(disp))
    value = int(disp[i])
    if not direction_bound_holds(value, A.cardinality, geometry.n):
        raise InvariantViolation(f"direction bound violated: {value} < |A|(1-|A|/2^n)/n with |A|={A.cardinality}")
    return i + 1, value


@dataclass(frozen=True)
class DensityReport:
    delta: float
    k: int
    per_vertex_counts: np.ndarray
    histogram: np.ndarray
    threshold: float
    d_delta_size: int


def density_cutoff(n: int, k: int, delta: float) -> float:
    return 0.5 * (k / (2 * (k + 1))) ** 2 * n ** delta


def density_report(geometry: CubeGeometry, gamma_nk: OccupancySet, k: int, delta: float) -> DensityReport:
    """Per-vertex ``|S(v, 2) & Gamma_nk|`` and the deficient set ``D_delta``."""
    counts = distance_counts(gamma_nk, 2)
    cutoff = density_cutoff(geometry.n, k, delta)
    hist = np.bincount(counts, minlength=1)
    return DensityReport(delta=delta, k=k, per_vertex_counts=counts, histogram=hist,
                         threshold=cutoff, d_delta_size=int(np.count_nonzero(counts < cutoff)))


@dataclass(frozen=True)
class PathBundle:
    paths: tuple[tuple[int, ...], ...]
    endpoints_a: tuple[int, ...]
    endpoints_b: tuple[int, ...]
    case: str
    maximal: bool = True

    def __len__(self):
        return len(self.paths)


def check_path_bundle(geometry: CubeGeometry, bundle: PathBundle, boundary_a: OccupancySet,
                      boundary_b: OccupancySet, forbidden: OccupancySet | None = None):
    seen: set[int] = set()
    for path in bundle.paths:
        if not 1 <= len(path) <= 4:
            raise InvariantViolation(f"path {path} has more than 3 edges")
        for u, v in zip(path, path[1:]):
            if bin(u ^ v).count("1") != 1:
                raise InvariantViolation(f"path {path} steps between non-adjacent vertices")
        if path[0] not in boundary_a or path[-1] not in boundary_b:
            raise InvariantViolation(f"path {path} does not join the two boundaries")
        if forbidden is not None and any(v in forbidden for v in path):
            raise InvariantViolation(f"path {path} runs through a split vertex")
        if seen.intersection(path) or len(set(path)) != len(path):
            raise InvariantViolation("paths are not vertex disjoint")
        seen.update(path)


def _distance_to(geometry: CubeGeometry, targets: np.ndarray, free: np.ndarray, depth: int) -> np.ndarray:
    """BFS distance (capped at depth+1) from ``targets`` through ``free`` vertices."""
    idx = geometry.indices
    dist = np.full(geometry.size, depth + 1, dtype=np.int64)
    frontier = targets & free
    dist[frontier] = 0
    reached = frontier.copy()
    for d in range(1, depth + 1):
        nxt = np.zeros(geometry.size, dtype=bool)
        for i in range(geometry.n):
            nxt |= frontier[idx ^ (1 << i)]
        nxt &= free & ~reached
        dist[nxt] = d
        reached |= nxt
        frontier = nxt
    return dist


def _split_case(A: OccupancySet) -> str:
    return "small-ball" if 3 * ball(A, 2).cardinality <= 2 * A.geometry.size else "large-ball"


def find_disjoint_short_paths(geometry: CubeGeometry, split_a: OccupancySet, split_b: OccupancySet,
                              max_edges: int = 3) -> PathBundle:
    """Greedy maximal family of vertex-disjoint paths with at most ``max_edges``
    edges from the external boundary of ``split_a`` to that of ``split_b``.

    Path vertices avoid both split sets.  Starts are scanned in index order
    and each takes a shortest available path, so at the end no further path
    fits among unused vertices.
    """
    if split_a.cardinality == 0 or split_b.cardinality == 0:
        raise ValueError("both sides of the split must be nonempty")
    if np.any(split_a.members & split_b.members):
        raise ValueError("split sides must be disjoint")
    n = geometry.n
    da = boundary_external(split_a).members
    db = boundary_external(split_b).members
    free = ~(split_a.members | split_b.members)
    dist = _distance_to(geometry, db, free, max_edges)
    used = np.zeros(geometry.size, dtype=bool)

    def search(v, path, budget):
        if db[v]:
            return path
        if budget == 0:
            return None
        for i in range(n):
            w = v ^ (1 << i)
            # stale distances only underestimate, so pruning on them is safe
            if free[w] and not used[w] and dist[w] < budget and w not in path:
                found = search(w, path + (w,), budget - 1)
                if found is not None:
                    return found
        return None

    paths = []
    for x in np.flatnonzero(da & free & (dist <= max_edges)).tolist():
        if used[x]:
            continue
        found = None
        for budget in range(int(dist[x]), max_edges + 1):
            found = search(x, (x,), budget)
            if found is not None:
                break
        if found is not None:
            used[list(found)] = True
            paths.append(found)
    return PathBundle(
        paths=tuple(paths),
        endpoints_a=tuple(p[0] for p in paths),
        endpoints_b=tuple(p[-1] for p in paths),
        case=_split_case(split_a),
    )


def _all_short_paths(geometry: CubeGeometry, split_a: OccupancySet, split_b: OccupancySet, max_edges: int = 3):
    da = boundary_external(split_a).members
    db = boundary_external(split_b).members
    free = ~(split_a.members | split_b.members)
    out = []

    def extend(path):
        if db[path[-1]]:
            out.append(path)
        if len(path) > max_edges:
            return
        for i in range(geometry.n):
            w = path[-1] ^ (1 << i)
            if free[w] and w not in path:
                extend(path + (w,))

    for x in np.flatnonzero(da & free).tolist():
        extend((x,))
    return out


def is_maximal_bundle(geometry: CubeGeometry, bundle: PathBundle, split_a: OccupancySet,
                      split_b: OccupancySet, max_edges: int = 3) -> bool:
    """No further short path fits among vertices the bundle leaves unused."""
    used = {v for p in bundle.paths for v in p}
    return not any(used.isdisjoint(p) for p in _all_short_paths(geometry, split_a, split_b, max_edges))


def exact_short_path_packing(geometry: CubeGeometry, split_a: OccupancySet, split_b: OccupancySet,
                             max_edges: int = 3) -> int:
    """Maximum number of vertex-disjoint short paths, by exhaustive search.

    Only the vertex set of a path matters, and a minimal path never contains
    a shorter one, so candidates are reduced to inclusion-minimal vertex sets.
    Exponential; meant for tiny instances.
    """
    sets = {frozenset(p) for p in _all_short_paths(geometry, split_a, split_b, max_edges)}
    minimal = [s for s in sets if not any(t < s for t in sets)]
    minimal.sort(key=lambda s: (len(s), sorted(s)))
    best = 0

    def pack(i, used, count):
        nonlocal best
        best = max(best, count)
        if count + (len(minimal) - i) <= best:
            return
        for j in range(i, len(minimal)):
            s = minimal[j]
            if used.isdisjoint(s):
                pack(j + 1, used | s, count + 1)

    pack(0, frozenset(), 0)
    return best


def disjoint_path_upper_bound(geometry: CubeGeometry, split_a: OccupancySet, split_b: OccupancySet) -> int:
    """Vertex-disjoint paths of any length between the two boundaries (max-flow).

    Bounds the short-path packing from above.
    """
    import networkx as nx

    da = boundary_external(split_a).members
    db = boundary_external(split_b).members
    free = ~(split_a.members | split_b.members)
    g = nx.DiGraph()
    for v in np.flatnonzero(free).tolist():
        g.add_edge(("in", v), ("out", v), capacity=1)
        for i in range(geometry.n):
            w = v ^ (1 << i)
            if free[w]:
                g.add_edge(("out", v), ("in", w), capacity=1)
        if da[v]:
            g.add_edge("s", ("in", v), capacity=1)
        if db[v]:
            g.add_edge(("out", v), "t", capacity=1)
    if "s" not in g or "t" not in g:
        return 0
    return int(nx.maximum_flow_value(g, "s", "t"))


def random_subsets(geometry: CubeGeometry, count: int, seed: int) -> list[OccupancySet]:
    """Random subsets with a per-set density drawn uniformly from (0, 1)."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        p = rng.uniform()
        out.append(OccupancySet(geometry, rng.random(geometry.size) < p))
    return out


__all__ = [
    "DensityReport", "PathBundle", "best_direction", "check_path_bundle", "density_cutoff",
    "density_report", "direction_bound_holds", "displacements", "disjoint_path_upper_bound",
    "exact_short_path_packing", "find_disjoint_short_paths", "is_maximal_bundle", "random_subsets",
    "sidon_sum", "sidon_sums_all_subsets",
]
