"""
Seeded vertex percolation on Q_2^n.

Every vertex coin is a pure function of ``(master_seed, trial_index, stream,
vertex)``: a splitmix64-style hash, never a sequential stream.  The scalar
path (:func:`vertex_uniform`) and the vectorised path (:func:`uniforms`)
produce identical bits, so a lazily queried oracle and a dense sample agree.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .hypercube import CubeGeometry, OccupancySet

MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB
_TRIAL_SALT = 0xD1B54A32D192ED03
_STREAM_SALT = 0x8CB92BA72F3D8DD7

STREAM_PRIMARY = 0
STREAM_SPRINKLE = 1


def mix64(z: int) -> int:
    z &= MASK64
    z = ((z ^ (z >> 30)) * _M1) & MASK64
    z = ((z ^ (z >> 27)) * _M2) & MASK64
    return z ^ (z >> 31)


def _mix64_array(z: np.ndarray) -> np.ndarray:
    z = z ^ (z >> np.uint64(30))
    z = z * np.uint64(_M1)
    z = z ^ (z >> np.uint64(27))
    z = z * np.uint64(_M2)
    return z ^ (z >> np.uint64(31))


def parse_seed(text: str | int) -> int:
    """Accept a 64-bit unsigned seed in decimal or ``0x`` hex."""
    if isinstance(text, (int, np.integer)):
        value = int(text)
    else:
        s = str(text).strip().lower().replace("_", "")
        value = int(s, 16) if s.startswith("0x") else int(s, 10)
    if not 0 <= value <= MASK64:
        raise ValueError(f"seed {text!r} is not a 64-bit unsigned integer")
    return value


@dataclass(frozen=True)
class TrialSeed:
    master_seed: int
    trial_index: int = 0

    def __post_init__(self):
        object.__setattr__(self, "master_seed", parse_seed(self.master_seed))
        if self.trial_index < 0:
            raise ValueError(f"trial_index must be nonnegative, got {self.trial_index}")

    def stream_key(self, stream: int = STREAM_PRIMARY) -> int:
        key = mix64(self.master_seed ^ _GOLDEN)
        key = mix64(key ^ mix64(self.trial_index * _TRIAL_SALT + 1))
        return mix64(key ^ mix64((stream + 1) * _STREAM_SALT))

    def numpy_seed(self, stream: int = STREAM_PRIMARY) -> int:
        """Seed for a numpy Generator derived from the same counter key."""
        return self.stream_key(stream)


def vertex_uniform(key: int, vertex: int) -> float:
    x = mix64(key + (vertex + 1) * _GOLDEN)
    return (x >> 11) * (1.0 / (1 << 53))


def uniforms(key: int, vertices: np.ndarray) -> np.ndarray:
    v = np.asarray(vertices, dtype=np.uint64)
    x = np.uint64(key) + (v + np.uint64(1)) * np.uint64(_GOLDEN)
    x = _mix64_array(x)
    return (x >> np.uint64(11)).astype(np.float64) * (1.0 / (1 << 53))


@dataclass(frozen=True)
class PercolationParams:
    """``lambda = (1 + chi) / n``.  ``chi`` may be negative for subcritical runs."""

    n: int
    chi: float
    delta: float | None = None

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"n must be positive, got {self.n}")
        if self.chi < -1:
            raise ValueError(f"chi must be >= -1, got {self.chi}")
        if not 0.0 <= self.lam <= 1.0:
            raise ValueError(f"lambda=(1+chi)/n={self.lam} outside [0, 1]")

    @property
    def lam(self) -> float:
        return (1 + self.chi) / self.n

    @classmethod
    def from_schedule(cls, n: int, delta: float) -> "PercolationParams":
        return cls(n=n, chi=chi_schedule(n, delta), delta=delta)


def _check_probability(p: float, name: str = "lambda"):
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"{name}={p} outside [0, 1]")


def sample_occupancy(n: int, lam: float, seed: TrialSeed, stream: int = STREAM_PRIMARY) -> OccupancySet:
    _check_probability(lam)
    geo = CubeGeometry(n)
    geo.check_dense()
    if lam == 0.0:
        return OccupancySet.empty(geo)
    if lam == 1.0:
        return OccupancySet.full(geo)
    u = uniforms(seed.stream_key(stream), geo.indices)
    return OccupancySet(geo, u < lam)


def sample_induced(params: PercolationParams, seed: TrialSeed) -> OccupancySet:
    return sample_occupancy(params.n, params.lam, seed)


def sample_two_round(n: int, lambda1: float, lambda2: float, seed: TrialSeed) -> tuple[OccupancySet, OccupancySet]:
    """First round at ``lambda1``, then an independent round at ``lambda2``.

    The first round is exactly ``sample_occupancy(n, lambda1, seed)``.
    """
    _check_probability(lambda1, "lambda1")
    _check_probability(lambda2, "lambda2")
    first = sample_occupancy(n, lambda1, seed, STREAM_PRIMARY)
    second = sample_occupancy(n, lambda2, seed, STREAM_SPRINKLE)
    return first, first | second


def two_round_inclusion(lambda1: float, lambda2: float) -> float:
    """``1 - (1 - l1)(1 - l2)``, written so that it never rounds above ``l1 + l2``."""
    return lambda1 + lambda2 - lambda1 * lambda2


def chi_schedule(n: int, delta: float) -> float:
    if not 0 < delta < 1 / 3:
        raise ValueError(f"delta must lie in (0, 1/3), got {delta}")
    return float(n) ** (-1 / 3 + delta)
