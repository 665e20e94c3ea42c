"""
Connected components of induced subgraphs of Q_2^n.

The production path is a compiled union-find (union by size, path halving)
over occupied vertices and their higher-indexed neighbours.  A breadth-first
flood fill is kept as an independent oracle.
"""

from __future__ import annotations

import csv
from collections import Counter, deque
from dataclasses import dataclass, field
from typing import Iterable, TextIO

import numpy as np
from numba import njit

from .hypercube import CubeGeometry, OccupancySet


@njit(cache=True, nogil=True)
def _find(parent, x):
    while parent[x] != x:
        parent[x] = parent[parent[x]]
        x = parent[x]
    return x


@njit(cache=True, nogil=True)
def _union_find_labels(occ, n):
    size = occ.shape[0]
    parent = np.arange(size)
    weight = np.ones(size, dtype=np.int64)
    for v in range(size):
        if not occ[v]:
            continue
        for i in range(n):
            w = v ^ (1 << i)
            if w > v and occ[w]:
                a = _find(parent, v)
                b = _find(parent, w)
                if a != b:
                    if weight[a] < weight[b]:
                        a, b = b, a
                    parent[b] = a
                    weight[a] += weight[b]
    labels = np.full(size, -1, dtype=np.int64)
    for v in range(size):
        if occ[v]:
            labels[v] = _find(parent, v)
    return labels


def component_labels(geometry: CubeGeometry, occupied: OccupancySet) -> np.ndarray:
    """Root label per vertex (``-1`` for unoccupied vertices)."""
    if occupied.geometry != geometry:
        raise ValueError("occupancy set belongs to a different geometry")
    return _union_find_labels(occupied.members, geometry.n)


@dataclass(frozen=True)
class ComponentReport:
    sizes: tuple[int, ...]
    threshold: int = 1
    threshold_complement: int = 0
    c1: int = field(init=False)
    c2: int = field(init=False)
    count: int = field(init=False)
    total: int = field(init=False)

    def __post_init__(self):
        sizes = tuple(sorted((int(s) for s in self.sizes), reverse=True))
        object.__setattr__(self, "sizes", sizes)
        object.__setattr__(self, "c1", sizes[0] if sizes else 0)
        object.__setattr__(self, "c2", sizes[1] if len(sizes) > 1 else 0)
        object.__setattr__(self, "count", len(sizes))
        object.__setattr__(self, "total", sum(sizes))

    def histogram(self) -> list[tuple[int, int]]:
        """``(size, multiplicity)`` pairs, largest size first."""
        return sorted(Counter(self.sizes).items(), reverse=True)


def _report_from_sizes(sizes: Iterable[int], threshold: int) -> ComponentReport:
    sizes = [int(s) for s in sizes]
    small = sum(s for s in sizes if s < threshold)
    return ComponentReport(tuple(sizes), threshold=threshold, threshold_complement=small)


def analyze(geometry: CubeGeometry, occupied: OccupancySet, threshold: int = 1) -> ComponentReport:
    labels = component_labels(geometry, occupied)
    roots = labels[labels >= 0]
    if roots.size == 0:
        return _report_from_sizes([], threshold)
    counts = np.bincount(roots)
    return _report_from_sizes(counts[counts > 0], threshold)


def component_sizes_per_vertex(geometry: CubeGeometry, occupied: OccupancySet) -> np.ndarray:
    """Size of the component containing each vertex (0 if unoccupied)."""
    labels = component_labels(geometry, occupied)
    out = np.zeros(geometry.size, dtype=np.int64)
    mask = labels >= 0
    if mask.any():
        counts = np.bincount(labels[mask], minlength=geometry.size)
        out[mask] = counts[labels[mask]]
    return out


def component_of(geometry: CubeGeometry, occupied: OccupancySet, v: int) -> OccupancySet:
    v = geometry.check_vertex(v)
    if v not in occupied:
        raise ValueError(f"vertex {v} is not occupied")
    labels = component_labels(geometry, occupied)
    return OccupancySet(geometry, labels == labels[v])


def flood_fill_sizes(geometry: CubeGeometry, occupied: OccupancySet) -> list[int]:
    """Component sizes by plain BFS; testing oracle, O(n 2^n) Python loops."""
    occ = occupied.members
    seen = np.zeros(geometry.size, dtype=bool)
    sizes = []
    for s in np.flatnonzero(occ).tolist():
        if seen[s]:
            continue
        seen[s] = True
        queue = deque([s])
        count = 0
        while queue:
            v = queue.popleft()
            count += 1
            for i in range(geometry.n):
                w = v ^ (1 << i)
                if occ[w] and not seen[w]:
                    seen[w] = True
                    queue.append(w)
        sizes.append(count)
    return sorted(sizes, reverse=True)


def flood_fill_report(geometry: CubeGeometry, occupied: OccupancySet, threshold: int = 1) -> ComponentReport:
    return _report_from_sizes(flood_fill_sizes(geometry, occupied), threshold)


def largest_fraction(report: ComponentReport, denominator: float | None = None) -> float:
    """``c1 / denominator``; the denominator defaults to ``|Gamma|``."""
    if report.total == 0:
        raise ValueError("largest fraction of an empty occupancy set is undefined")
    denom = report.total if denominator is None else denominator
    if denom == 0:
        raise ValueError("zero denominator")
    return report.c1 / denom


def isolated_count(geometry: CubeGeometry, occupied: OccupancySet) -> int:
    occ = occupied.members
    idx = geometry.indices
    has_neighbor = np.zeros(geometry.size, dtype=bool)
    for i in range(geometry.n):
        has_neighbor |= occ[idx ^ (1 << i)]
    return int(np.count_nonzero(occ & ~has_neighbor))


HISTOGRAM_COLUMNS = ("trial", "size", "multiplicity")


def write_histogram_csv(stream: TextIO, reports: Iterable[tuple[int, ComponentReport]]):
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(HISTOGRAM_COLUMNS)
    for trial, report in reports:
        for size, mult in report.histogram():
            writer.writerow((trial, size, mult))
