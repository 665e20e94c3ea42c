"""Small statistical helpers shared by the experiment drivers."""

from __future__ import annotations

import math

import numpy as np
from scipy import stats as _st


def wilson_interval(successes: int, trials: int, z: float = 1.959963984540054) -> tuple[float, float]:
    if trials <= 0:
        raise ValueError("trials must be positive")
    p = successes / trials
    denom = 1 + z * z / trials
    centre = (p + z * z / (2 * trials)) / denom
    half = z * math.sqrt(p * (1 - p) / trials + z * z / (4 * trials * trials)) / denom
    return max(0.0, centre - half), min(1.0, centre + half)


def normal_interval(values, z: float = 1.959963984540054) -> tuple[float, float]:
    a = np.asarray(values, dtype=float)
    if a.size == 0:
        return (math.nan, math.nan)
    mean = float(a.mean())
    if a.size < 2:
        return (mean, mean)
    half = z * float(a.std(ddof=1)) / math.sqrt(a.size)
    return mean - half, mean + half


def binomial_sigma(p: float, trials: int) -> float:
    """Standard error of a frequency estimate of ``p`` from ``trials`` draws."""
    return math.sqrt(p * (1 - p) / trials)


def chi2_uniformity_pvalue(counts) -> float:
    return float(_st.chisquare(np.asarray(counts, dtype=float)).pvalue)
