"""
Desk-scale experiment drivers: giant-component sweeps, two-round sprinkling
and concentration of the small-component mass.

Every trial is a pure function of ``(config, trial_index)``; trials may run on
a thread pool, and results are re-ordered by index before aggregation, so
outputs are identical for any worker count.
"""

from __future__ import annotations

import csv
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable, Sequence, TextIO, TypeVar

import numpy as np

from . import branching
from .components import ComponentReport, analyze, component_labels, isolated_count
from .constructions import size_threshold
from .errors import DegenerateLayoutError, InvariantViolation, ResourceCapError
from .hypercube import DENSE_CAP, CubeGeometry
from .sampling import TrialSeed, sample_occupancy, sample_two_round, two_round_inclusion
from .stats import normal_interval

T = TypeVar("T")

CSV_COLUMNS = ("experiment", "n", "chi", "k", "trial", "seed", "gamma_size", "c1", "c2", "u_n", "lambda", "runtime_ms")
LAMBDA_GATE = 0.5


def run_indexed(fn: Callable[[int], T], count: int, threads: int = 1) -> list[T]:
    """``[fn(0), ..., fn(count-1)]``, optionally on a thread pool."""
    if threads <= 1 or count <= 1:
        return [fn(i) for i in range(count)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, range(count)))


@dataclass
class TrialRow:
    experiment: str
    n: int
    chi: float
    k: int
    trial: int
    seed: int
    gamma_size: int | None = None
    c1: int | None = None
    c2: int | None = None
    u_n: int | None = None
    lam: float | None = None
    runtime_ms: float | None = None

    def values(self) -> tuple:
        return (self.experiment, self.n, self.chi, self.k, self.trial, self.seed, self.gamma_size,
                self.c1, self.c2, self.u_n, self.lam, self.runtime_ms)


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_rows_csv(stream: TextIO, rows: Sequence[TrialRow]):
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for row in rows:
        writer.writerow([_fmt(v) for v in row.values()])


@dataclass
class ExperimentConfig:
    n_grid: list[int]
    chi_grid: list[float]
    k: int = 1
    trials: int = 50
    master_seed: int = 0
    component_threshold: float | None = None
    delta: float = 0.1
    rho_k: float = 1.0
    c_k: float = 1.0
    threads: int = 1
    record_runtime: bool = False


@dataclass
class CellSummary:
    n: int
    chi: float
    lam: float
    trials: int
    threshold: float
    mean_c1_fraction: float
    ci: tuple[float, float]
    mean_c1_gamma_fraction: float
    mean_ratio_c2_c1: float
    mean_u_fraction: float
    max_c1: int
    predictor_pi: float | None
    predictor_alpha: float | None
    predictor_two_chi: float | None

    def as_dict(self) -> dict:
        d = asdict(self)
        d["ci"] = list(self.ci)
        return d


@dataclass
class CellError:
    n: int
    chi: float
    kind: str
    message: str


@dataclass
class SweepResult:
    cells: list[CellSummary] = field(default_factory=list)
    rows: list[TrialRow] = field(default_factory=list)
    errors: list[CellError] = field(default_factory=list)


def default_threshold(n: int, k: int, chi: float, c_k: float = 1.0) -> float:
    """Stage-k size cutoff when computable, else 1 (no component counts as small)."""
    if chi <= 0:
        return 1.0
    try:
        return max(1.0, float(math.ceil(size_threshold(n, k, chi, c_k))))
    except DegenerateLayoutError:
        return 1.0


def _predictors(chi: float) -> tuple[float | None, float | None, float | None]:
    if chi <= 0:
        return None, None, None
    alpha = branching.alpha_of_epsilon(chi)
    return alpha, alpha, 2.0 * chi


def _check_cell(n: int, chi: float):
    if n > DENSE_CAP:
        raise ResourceCapError(f"n={n} exceeds the dense cap {DENSE_CAP}")
    lam = (1 + chi) / n
    if not 0 <= lam <= LAMBDA_GATE:
        raise ValueError(f"lambda={lam} fails the sanity gate 0 <= lambda <= {LAMBDA_GATE}")
    return lam


def _sweep_trial(n: int, chi: float, lam: float, threshold: float, config: ExperimentConfig, t: int):
    t0 = time.perf_counter()
    geo = CubeGeometry(n)
    occ = sample_occupancy(n, lam, TrialSeed(config.master_seed, t))
    report = analyze(geo, occ, threshold=threshold)
    if report.total != occ.cardinality:
        raise InvariantViolation(f"component sizes sum to {report.total}, |Gamma|={occ.cardinality}")
    runtime = round((time.perf_counter() - t0) * 1000, 3) if config.record_runtime else None
    return report, runtime


def giant_sweep(config: ExperimentConfig, experiment: str = "giant-sweep") -> SweepResult:
    result = SweepResult()
    for n in config.n_grid:
        for chi in config.chi_grid:
            try:
                lam = _check_cell(n, chi)
            except ResourceCapError as exc:
                result.errors.append(CellError(n, chi, "resource-cap", str(exc)))
                continue
            except ValueError as exc:
                result.errors.append(CellError(n, chi, "rejected", str(exc)))
                continue
            threshold = (config.component_threshold if config.component_threshold is not None
                         else default_threshold(n, config.k, chi, config.c_k))
            outs = run_indexed(lambda t: _sweep_trial(n, chi, lam, threshold, config, t),
                               config.trials, config.threads)
            reports = [r for r, _ in outs]
            for t, (rep, runtime) in enumerate(outs):
                result.rows.append(TrialRow(experiment, n, chi, config.k, t, config.master_seed, None,
                                            rep.c1, rep.c2, rep.threshold_complement, lam, runtime))
            result.cells.append(summarize_cell(n, chi, lam, threshold, reports))
    return result


def summarize_cell(n: int, chi: float, lam: float, threshold: float, reports: Sequence[ComponentReport]) -> CellSummary:
    expected = lam * (1 << n)
    fractions = [r.c1 / expected for r in reports]
    gamma_fractions = [r.c1 / r.total if r.total else 0.0 for r in reports]
    ratios = [r.c2 / r.c1 if r.c1 else 0.0 for r in reports]
    u_fractions = [r.threshold_complement / r.total if r.total else 0.0 for r in reports]
    pi, alpha, two_chi = _predictors(chi)
    return CellSummary(
        n=n, chi=chi, lam=lam, trials=len(reports), threshold=threshold,
        mean_c1_fraction=float(np.mean(fractions)),
        ci=normal_interval(fractions),
        mean_c1_gamma_fraction=float(np.mean(gamma_fractions)),
        mean_ratio_c2_c1=float(np.mean(ratios)),
        mean_u_fraction=float(np.mean(u_fractions)),
        max_c1=max(r.c1 for r in reports),
        predictor_pi=pi, predictor_alpha=alpha, predictor_two_chi=two_chi,
    )


def subcritical_expected_components(n: int, eps: float, ell: int) -> float:
    """Upper bound ``2^n (1 - eps)^ell / (ell n)`` on the expected number of
    components of size ``ell`` at ``lambda = (1 - eps)/n``."""
    if not 0 < eps < 1:
        raise ValueError(f"eps must lie in (0, 1), got {eps}")
    if ell < 1:
        raise ValueError("component size must be positive")
    return math.exp(n * math.log(2) + ell * math.log1p(-eps) - math.log(ell * n))


def minimal_kappa(eps: float, below: float = 0.25) -> int:
    """Smallest integer kappa with ``(1 - eps)**kappa < below``."""
    if not 0 < eps < 1:
        raise ValueError(f"eps must lie in (0, 1), got {eps}")
    kappa = max(1, math.ceil(math.log(below) / math.log1p(-eps)))
    while (1 - eps) ** kappa >= below:
        kappa += 1
    while kappa > 1 and (1 - eps) ** (kappa - 1) < below:
        kappa -= 1
    return kappa


@dataclass
class SprinkleSummary:
    n: int
    chi: float
    trials: int
    lambda1: float
    lambda2: float
    inclusion: float
    merge_frequency: float
    improved_frequency: float
    mean_pre_ratio: float
    mean_post_ratio: float
    rows: list[TrialRow] = field(default_factory=list, repr=False)

    def as_dict(self) -> dict:
        d = asdict(self)
        d.pop("rows")
        return d


def _top_two_roots(labels: np.ndarray) -> tuple[int, int] | None:
    roots = labels[labels >= 0]
    if roots.size == 0:
        return None
    counts = np.bincount(roots)
    present = np.flatnonzero(counts)
    if present.size < 2:
        return None
    order = sorted(present.tolist(), key=lambda r: (-counts[r], r))
    return order[0], order[1]


def sprinkle_experiment(n: int, chi: float, trials: int, seed: int, threads: int = 1,
                        lambda2: float | None = None) -> SprinkleSummary:
    """Round one at ``(1 + chi/2)/n``, round two at ``(chi/2)/n``.

    Records whether the two largest round-one components end up in one
    component after the second round, and the runner-up ratio before/after.
    """
    geo = CubeGeometry(n)
    geo.check_dense()
    lam1 = (1 + chi / 2) / n
    lam2 = (chi / 2) / n if lambda2 is None else lambda2
    inclusion = two_round_inclusion(lam1, lam2)
    if inclusion > lam1 + lam2 + 1e-15:
        raise InvariantViolation("two-round inclusion exceeds lambda1 + lambda2")

    def trial(t):
        first, combined = sample_two_round(n, lam1, lam2, TrialSeed(seed, t))
        pre_labels = component_labels(geo, first)
        post_labels = component_labels(geo, combined)
        pre = analyze(geo, first)
        post = analyze(geo, combined)
        top = _top_two_roots(pre_labels)
        merged = bool(top and post_labels[top[0]] == post_labels[top[1]])
        return pre, post, merged

    outs = run_indexed(trial, trials, threads)
    pre_ratios = [p.c2 / p.c1 if p.c1 else 0.0 for p, _, _ in outs]
    post_ratios = [q.c2 / q.c1 if q.c1 else 0.0 for _, q, _ in outs]
    rows = [TrialRow("sprinkle", n, chi, 0, t, seed, None, q.c1, q.c2, None, inclusion)
            for t, (_, q, _) in enumerate(outs)]
    return SprinkleSummary(
        n=n, chi=chi, trials=trials, lambda1=lam1, lambda2=lam2, inclusion=inclusion,
        merge_frequency=sum(m for _, _, m in outs) / trials,
        improved_frequency=sum(b <= a for a, b in zip(pre_ratios, post_ratios)) / trials,
        mean_pre_ratio=float(np.mean(pre_ratios)),
        mean_post_ratio=float(np.mean(post_ratios)),
        rows=rows,
    )


@dataclass
class UConcentrationSummary:
    n: int
    chi: float
    k: int
    threshold: float
    trials: int
    mean_u: float
    deviation_frequency: float
    u_values: list[int]
    isolated: list[int]
    rows: list[TrialRow] = field(default_factory=list, repr=False)

    def as_dict(self) -> dict:
        d = asdict(self)
        d.pop("rows")
        return d


def u_concentration(n: int, chi: float, k: int, threshold: float, trials: int, seed: int,
                    threads: int = 1) -> UConcentrationSummary:
    """Empirical frequency of ``| |U| - mean |U| | > mean |U| / n``."""
    geo = CubeGeometry(n)
    lam = _check_cell(n, chi)

    def trial(t):
        occ = sample_occupancy(n, lam, TrialSeed(seed, t))
        rep = analyze(geo, occ, threshold=threshold)
        iso = isolated_count(geo, occ)
        if threshold >= 2 and iso > rep.threshold_complement:
            raise InvariantViolation(f"{iso} isolated vertices but |U|={rep.threshold_complement}")
        return rep, iso

    outs = run_indexed(trial, trials, threads)
    us = [r.threshold_complement for r, _ in outs]
    mean_u = float(np.mean(us))
    deviations = sum(abs(u - mean_u) > mean_u / n for u in us)
    rows = [TrialRow("u-concentration", n, chi, k, t, seed, None, r.c1, r.c2, r.threshold_complement, lam)
            for t, (r, _) in enumerate(outs)]
    return UConcentrationSummary(n=n, chi=chi, k=k, threshold=threshold, trials=trials, mean_u=mean_u,
                                 deviation_frequency=deviations / trials, u_values=us,
                                 isolated=[i for _, i in outs], rows=rows)
