"""
Executable versions of the subcomponent constructions.

The gamma-process grows a tree inside the tail sub-cube spanned by the
coordinates ``z_n+1..n``; :func:`grow_subcomponent` then stacks translates
of gamma-subcomponents along the stage blocks ``B_1..B_k``.  Occupancy is
queried lazily through :class:`OccupancyOracle`, so nothing here needs the
full ``2**n`` vertex set.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Protocol

import numpy as np

from . import branching
from .components import component_sizes_per_vertex
from .errors import InvariantViolation
from .hypercube import CoordinateLayout, CubeGeometry, OccupancySet, make_layout, order_key
from .sampling import PercolationParams, STREAM_PRIMARY, TrialSeed, vertex_uniform
from .stats import wilson_interval


class Oracle(Protocol):
    def __call__(self, v: int) -> bool: ...


class OccupancyOracle:
    """Memoised per-vertex coins; agrees bit-for-bit with the dense sampler."""

    def __init__(self, lam: float, seed: TrialSeed, stream: int = STREAM_PRIMARY):
        if not 0.0 <= lam <= 1.0:
            raise ValueError(f"lambda={lam} outside [0, 1]")
        self.lam = lam
        self.seed = seed
        self._key = seed.stream_key(stream)
        self.memo: dict[int, bool] = {}

    @classmethod
    def from_params(cls, params: PercolationParams, seed: TrialSeed) -> "OccupancyOracle":
        return cls(params.lam, seed)

    def __call__(self, v: int) -> bool:
        hit = self.memo.get(v)
        if hit is None:
            hit = vertex_uniform(self._key, v) < self.lam
            self.memo[v] = hit
        return hit


class ConstantOracle:
    def __init__(self, value: bool):
        self.value = bool(value)

    def __call__(self, v: int) -> bool:
        return self.value


class SetOracle:
    """Oracle backed by a dense :class:`OccupancySet`."""

    def __init__(self, occupied: OccupancySet):
        self.members = occupied.members

    def __call__(self, v: int) -> bool:
        return bool(self.members[v])


@dataclass
class GammaOutcome:
    success: bool
    component: list[int]
    queried: int
    directions_used: list[int]
    target: int
    parents: dict[int, int] = field(default_factory=dict, repr=False)
    short_of_directions: bool = False


def gamma_process(geometry: CubeGeometry, layout: CoordinateLayout, start: int, oracle: Oracle,
                  target: int | None = None, check_start: bool = False) -> GammaOutcome:
    """Grow a tree of ``target`` occupied vertices from ``start`` along unused
    tail directions.

    The start is taken as occupied (the process runs conditioned on it)
    unless ``check_start`` is set.  Each expansion examines the ``m``
    smallest still-available neighbours; the next vertex to expand is the
    smallest unexpanded member of the tree.
    """
    if layout.n != geometry.n:
        raise ValueError("layout and geometry dimensions differ")
    start = geometry.check_vertex(start)
    if check_start and not oracle(start):
        raise ValueError(f"start vertex {start} is not occupied")
    target = layout.target if target is None else target
    n = geometry.n
    available = [d - 1 for d in layout.tail_units]
    component = [start]
    parents = {start: -1}
    expanded: set[int] = set()
    used: list[int] = []
    queried = 0
    short = False

    while len(component) < target:
        frontier = [v for v in component if v not in expanded]
        if not frontier:
            return GammaOutcome(False, component, queried, used, target, parents, short)
        v = min(frontier, key=lambda w: order_key(w ^ start, n))
        expanded.add(v)
        candidates = sorted(available, key=lambda b: order_key((v ^ start) | (1 << b), n))
        if len(candidates) < layout.m:
            short = True
        for b in candidates[:layout.m]:
            w = v ^ (1 << b)
            queried += 1
            if oracle(w):
                component.append(w)
                parents[w] = v
                available.remove(b)
                used.append(b + 1)
                if len(component) >= target:
                    break
    return GammaOutcome(True, component, queried, used, target, parents, short)


def count_internal_edges(vertices) -> int:
    members = set(vertices)
    edges = 0
    for v in members:
        x = v
        while x:
            low = x & -x
            if v ^ low in members:
                edges += 1
            x ^= low
    # every edge seen from its endpoint holding the differing bit
    return edges


def check_gamma_outcome(layout: CoordinateLayout, start: int, outcome: GammaOutcome):
    """Structural assertions: tree, tail directions only, target on success."""
    comp = outcome.component
    if len(set(comp)) != len(comp):
        raise InvariantViolation("gamma component repeats a vertex")
    if outcome.success and len(comp) != outcome.target:
        raise InvariantViolation(f"success with size {len(comp)} != target {outcome.target}")
    tail_mask = sum(1 << (d - 1) for d in layout.tail_units)
    for v in comp:
        if (v ^ start) & ~tail_mask:
            raise InvariantViolation(f"vertex {v} leaves the tail sub-cube of {start}")
    if count_internal_edges(comp) != len(comp) - 1:
        raise InvariantViolation("gamma component is not an induced tree")
    if len(set(outcome.directions_used)) != len(outcome.directions_used):
        raise InvariantViolation("a tail direction was consumed twice")
    if len(outcome.directions_used) != len(comp) - 1:
        raise InvariantViolation("direction bookkeeping out of step with the tree")


@dataclass
class GrowthOutcome:
    stages: int
    c0: GammaOutcome
    added_sets: list[list[list[int]]]
    stage_hits: list[int]
    stage_counts: list[int]
    phi_n: float | None = None

    @property
    def total_size(self) -> int:
        return len(self.c0.component) + sum(len(c) for stage in self.added_sets for c in stage)

    @property
    def success(self) -> bool:
        return all(c > 0 for c in self.stage_counts)

    def vertices(self) -> list[int]:
        out = list(self.c0.component)
        for stage in self.added_sets:
            for c in stage:
                out.extend(c)
        return out


class StageZeroFailure(ValueError):
    def __init__(self, outcome: GammaOutcome):
        super().__init__("gamma-process failed at the start vertex")
        self.outcome = outcome


def grow_subcomponent(geometry: CubeGeometry, layout: CoordinateLayout, k: int, start: int,
                      oracle: Oracle) -> GrowthOutcome:
    """Stage-wise growth from a gamma-subcomponent ``C(0)`` at ``start``.

    At stage i every set kept at stage i-1 is translated by each unit of
    block ``B_i``; the smallest occupied vertex of a translate seeds a fresh
    gamma-process, and successful ones are kept for stage i+1.
    """
    if not 0 <= k <= layout.k:
        raise ValueError(f"k={k} outside 0..{layout.k}")
    c0 = gamma_process(geometry, layout, start, oracle)
    if not c0.success:
        raise StageZeroFailure(c0)
    n = geometry.n
    previous = [c0.component]
    added: list[list[list[int]]] = []
    hits: list[int] = []
    counts: list[int] = []
    for i in range(1, k + 1):
        stage_sets = []
        stage_hits = 0
        for c_alpha in previous:
            for s in range(1, layout.nu_n + 1):
                e = 1 << (layout.block_unit(i, s) - 1)
                translate = sorted((x ^ e for x in c_alpha), key=lambda w: order_key(w ^ start, n))
                hit = next((w for w in translate if oracle(w)), None)
                if hit is None:
                    continue
                stage_hits += 1
                g = gamma_process(geometry, layout, hit, oracle)
                if g.success:
                    stage_sets.append(g.component)
        added.append(stage_sets)
        hits.append(stage_hits)
        counts.append(len(stage_sets))
        previous = stage_sets
        if not stage_sets:
            # later stages have nothing to translate
            for _ in range(i + 1, k + 1):
                added.append([])
                hits.append(0)
                counts.append(0)
            break
    return GrowthOutcome(stages=k, c0=c0, added_sets=added, stage_hits=hits, stage_counts=counts)


def check_growth_outcome(outcome: GrowthOutcome, oracle: Oracle):
    """Pairwise disjointness and connectivity of the grown union."""
    seen: set[int] = set(outcome.c0.component)
    for stage in outcome.added_sets:
        for c in stage:
            cs = set(c)
            if cs & seen:
                raise InvariantViolation("added gamma-subcomponents overlap")
            seen |= cs
    if not all(oracle(v) for v in seen - {outcome.c0.component[0]}):
        raise InvariantViolation("grown set contains an unoccupied vertex")
    start = outcome.c0.component[0]
    nbits = max(seen).bit_length()
    reached = {start}
    queue = deque([start])
    while queue:
        v = queue.popleft()
        for b in range(nbits):
            w = v ^ (1 << b)
            if w in seen and w not in reached:
                reached.add(w)
                queue.append(w)
    if reached != seen:
        raise InvariantViolation("grown set is not connected to C(0)")


def _pi(n: int, chi: float, regime: str) -> float:
    return branching.pi_chi(n, chi, regime).asymptotic


def phi_n(n: int, k: int, chi: float, regime: str = "constant") -> float:
    """``pi(chi) * nu_n * (1 - exp(-(1 + chi) u_n / 4))``."""
    if chi <= 0:
        raise ValueError(f"chi must be positive, got {chi}")
    layout = make_layout(n, k)
    return _pi(n, chi, regime) * layout.nu_n * (-math.expm1(-(1 + chi) * layout.u_n / 4))


def pi_k(n: int, k: int, chi: float, rho_k: float = 1.0, regime: str = "constant") -> float:
    """``pi(chi) * (1 - exp(-rho_k phi_n))``; ``rho_k`` is a free constant."""
    if rho_k <= 0:
        raise ValueError(f"rho_k must be positive, got {rho_k}")
    return _pi(n, chi, regime) * (-math.expm1(-rho_k * phi_n(n, k, chi, regime)))


def size_threshold(n: int, k: int, chi: float, c_k: float = 1.0, regime: str = "constant") -> float:
    """Stage-k size cutoff ``c_k (u_n n) phi_n^k`` (``c_k`` is a free constant)."""
    return c_k * n ** (2 / 3) * phi_n(n, k, chi, regime) ** k


def extract_gamma_nk(geometry: CubeGeometry, occupied: OccupancySet, threshold: float) -> OccupancySet:
    """Occupied vertices whose component has at least ``threshold`` vertices."""
    sizes = component_sizes_per_vertex(geometry, occupied)
    return OccupancySet(geometry, occupied.members & (sizes >= threshold))


@dataclass(frozen=True)
class RateEstimate:
    successes: int
    trials: int
    estimate: float
    ci: tuple[float, float]

    @classmethod
    def from_counts(cls, successes: int, trials: int) -> "RateEstimate":
        return cls(successes, trials, successes / trials, wilson_interval(successes, trials))


@dataclass(frozen=True)
class SuccessRates:
    gamma: RateEstimate
    growth: RateEstimate | None
    gamma_sizes: tuple[int, ...]


def success_rate(params: PercolationParams, layout: CoordinateLayout, trials: int, master_seed: int,
                 k: int | None = None, check: bool = True, target: int | None = None,
                 on_trial: Callable[[int, GammaOutcome, GrowthOutcome | None], None] | None = None) -> SuccessRates:
    """Monte Carlo success frequencies of the gamma-process and of the growth.

    Trial t runs at the origin with its own oracle seeded by ``(master_seed, t)``.
    The gamma-process of trial t is exactly the ``C(0)`` of its growth run.
    Overriding ``target`` estimates the gamma rate alone.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    geo = CubeGeometry(params.n)
    stages = layout.k if k is None else k
    g_ok = grow_ok = 0
    sizes = []
    for t in range(trials):
        oracle = OccupancyOracle(params.lam, TrialSeed(master_seed, t))
        g = gamma_process(geo, layout, 0, oracle, target=target)
        if check:
            check_gamma_outcome(layout, 0, g)
        sizes.append(len(g.component))
        growth = None
        if g.success:
            g_ok += 1
            if target is None:
                growth = grow_subcomponent(geo, layout, stages, 0, oracle)
                if check:
                    check_growth_outcome(growth, oracle)
                grow_ok += growth.success
        if on_trial is not None:
            on_trial(t, g, growth)
    growth_rate = RateEstimate.from_counts(grow_ok, trials) if target is None else None
    return SuccessRates(RateEstimate.from_counts(g_ok, trials), growth_rate, tuple(sizes))


def truncated_gw_success(n: int, lam: float, m: int, target: int, runs: int, master_seed: int) -> tuple[int, int]:
    """Independent oracle: does a ``Binomial(m, lam)`` GW tree reach ``target`` vertices?"""
    return branching.gw_survival_frequency(branching.Binomial(m, lam), runs, master_seed,
                                           generation_cap=max(target, 1) + 1, total_cap=target)
