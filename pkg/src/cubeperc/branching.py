"""
Galton-Watson machinery: offspring laws, extinction fixed points, the
Poisson survival function alpha(eps), pi(chi), the rooted-tree comparison
process and the Chernoff tail bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy import optimize, stats

from .errors import ConvergenceError
from .hypercube import floor_n23

DEFAULT_TOL = 1e-12
DEFAULT_MAX_ITER = 10_000_000


@dataclass(frozen=True)
class Binomial:
    m: int
    p: float

    def __post_init__(self):
        if self.m < 0 or not 0.0 <= self.p <= 1.0:
            raise ValueError(f"invalid Binomial({self.m}, {self.p})")

    @property
    def mean(self) -> float:
        return self.m * self.p

    def draw_total(self, rng: np.random.Generator, parents: int) -> int:
        """Total offspring of ``parents`` independent individuals."""
        return int(rng.binomial(self.m * parents, self.p))


@dataclass(frozen=True)
class Poisson:
    mu: float

    def __post_init__(self):
        if self.mu < 0:
            raise ValueError(f"invalid Poisson({self.mu})")

    @property
    def mean(self) -> float:
        return self.mu

    def draw_total(self, rng: np.random.Generator, parents: int) -> int:
        return int(rng.poisson(self.mu * parents))


OffspringLaw = Union[Binomial, Poisson]


def pmf(law: OffspringLaw, ell: int) -> float:
    if ell < 0:
        return 0.0
    if isinstance(law, Binomial):
        return float(stats.binom.pmf(ell, law.m, law.p))
    return float(stats.poisson.pmf(ell, law.mu))


def pgf(law: OffspringLaw, q: float) -> float:
    """``E[q**xi]``."""
    if not 0.0 <= q <= 1.0:
        raise ValueError(f"pgf argument {q} outside [0, 1]")
    if isinstance(law, Binomial):
        return (1.0 - law.p + law.p * q) ** law.m
    return math.exp(law.mu * (q - 1.0))


def total_variation(a: OffspringLaw, b: OffspringLaw, support: int | None = None) -> float:
    if support is None:
        support = int(max(a.mean, b.mean) * 10 + 60)
    ks = np.arange(support + 1)

    def masses(law):
        if isinstance(law, Binomial):
            return stats.binom.pmf(ks, law.m, law.p)
        return stats.poisson.pmf(ks, law.mu)

    pa, pb = masses(a), masses(b)
    # mass beyond the support counts fully towards the distance
    tail = abs((1 - pa.sum()) - (1 - pb.sum()))
    return 0.5 * (float(np.abs(pa - pb).sum()) + tail)


@dataclass(frozen=True)
class SurvivalResult:
    survival: float
    extinction: float
    iterations: int
    residual: float


def _is_deterministic_single_child(law: OffspringLaw) -> bool:
    return isinstance(law, Binomial) and law.m == 1 and law.p == 1.0


def survival_probability(law: OffspringLaw, tol: float = DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER) -> SurvivalResult:
    """Extinction as the smallest fixed point of the PGF, by iteration from 0."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    if _is_deterministic_single_child(law):
        return SurvivalResult(1.0, 0.0, 0, 0.0)
    if law.mean <= 1.0:
        return SurvivalResult(0.0, 1.0, 0, abs(1.0 - pgf(law, 1.0)))
    q = 0.0
    for it in range(1, max_iter + 1):
        nxt = pgf(law, q)
        if abs(nxt - q) < tol:
            q = nxt
            return SurvivalResult(1.0 - q, q, it, abs(q - pgf(law, q)))
        q = nxt
    raise ConvergenceError(f"no convergence for {law} in {max_iter} iterations", abs(q - pgf(law, q)))


def alpha_of_epsilon(eps: float, tol: float = 1e-15) -> float:
    """The root in (0, 1) of ``alpha = 1 - exp(-(1 + eps) alpha)``."""
    if eps <= 0:
        raise ValueError(f"eps must be positive, got {eps}")
    c = 1.0 + eps

    def f(a):
        return a - 1.0 + math.exp(-c * a)

    # f vanishes at 0, dips below zero, and is positive at 1
    lo = math.log(c) / c
    return optimize.brentq(f, lo, 1.0, xtol=tol, rtol=4 * np.finfo(float).eps, maxiter=500)


def offspring_trials(n: int) -> int:
    """``m = n - floor(3/4 n^(2/3))``, the per-vertex examination budget."""
    return n - floor_n23(3, 4, n)


@dataclass(frozen=True)
class PiChi:
    finite_n: float
    asymptotic: float
    regime: str
    residual: float


def pi_chi(n: int, chi: float, regime: str = "constant", tol: float = DEFAULT_TOL) -> PiChi:
    if chi <= 0:
        raise ValueError(f"chi must be positive, got {chi}")
    if regime not in ("constant", "vanishing"):
        raise ValueError(f"unknown regime {regime!r}")
    res = survival_probability(Binomial(offspring_trials(n), (1 + chi) / n), tol)
    asym = alpha_of_epsilon(chi) if regime == "constant" else 2.0 * chi
    return PiChi(finite_n=res.survival, asymptotic=asym, regime=regime, residual=res.residual)


@dataclass(frozen=True)
class GWTrace:
    generation_sizes: tuple[int, ...]
    survived: bool

    @property
    def total(self) -> int:
        return sum(self.generation_sizes)


def simulate_gw(law: OffspringLaw, generation_cap: int, total_cap: int, seed) -> GWTrace:
    """One Galton-Watson run.

    Stops when the line dies out, when ``generation_cap`` generations have
    been produced, or when the running total reaches ``total_cap``; the last
    two count as survival.
    """
    if generation_cap < 1 or total_cap < 1:
        raise ValueError("caps must be positive")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    sizes = [1]
    total = 1
    if total >= total_cap:
        return GWTrace(tuple(sizes), True)
    for _ in range(generation_cap):
        z = law.draw_total(rng, sizes[-1])
        sizes.append(z)
        total += z
        if z == 0:
            return GWTrace(tuple(sizes), False)
        if total >= total_cap:
            return GWTrace(tuple(sizes), True)
    return GWTrace(tuple(sizes), True)


def gw_survival_frequency(law: OffspringLaw, runs: int, master_seed: int,
                          generation_cap: int = 10_000, total_cap: int = 1_000_000) -> tuple[int, int]:
    """``(survivors, runs)`` over independently seeded runs.

    Run ``i`` uses ``default_rng([master_seed, i])`` so any subset of runs can
    be replayed alone.
    """
    survivors = 0
    for i in range(runs):
        trace = simulate_gw(law, generation_cap, total_cap, np.random.default_rng([master_seed, i]))
        survivors += trace.survived
    return survivors, runs


def tree_component_survival(n: int, lam: float, tol: float = DEFAULT_TOL, conditioned: bool = True) -> float:
    """Survival of the root component in the n-regular rooted tree.

    The root has ``Binomial(n, lam)`` children and every other vertex
    ``Binomial(n - 1, lam)``.  ``conditioned`` takes the root as selected;
    otherwise the answer is multiplied by ``lam``.
    """
    if not 0.0 <= lam <= 1.0:
        raise ValueError(f"lambda={lam} outside [0, 1]")
    if n < 1:
        raise ValueError("n must be positive")
    interior = survival_probability(Binomial(n - 1, lam), tol) if n > 1 else SurvivalResult(0.0, 1.0, 0, 0.0)
    q = interior.extinction
    surv = 1.0 - pgf(Binomial(n, lam), q)
    return surv if conditioned else lam * surv


def chernoff_exponent(eta: float) -> float:
    """``c_eta = min(-ln(e^eta (1+eta)^-(1+eta)), eta^2/2)``."""
    if eta <= 0:
        raise ValueError(f"eta must be positive, got {eta}")
    return min((1 + eta) * math.log1p(eta) - eta, eta * eta / 2)


def chernoff_bound(eta: float, expectation: float) -> float:
    if expectation < 0:
        raise ValueError("expectation must be nonnegative")
    return 2.0 * math.exp(-chernoff_exponent(eta) * expectation)
