import io
import math

import pytest

from cubeperc.errors import ResourceCapError
from cubeperc.experiments import (
    CSV_COLUMNS,
    ExperimentConfig,
    TrialRow,
    giant_sweep,
    minimal_kappa,
    run_indexed,
    sprinkle_experiment,
    subcritical_expected_components,
    u_concentration,
    write_rows_csv,
)


def test_run_indexed_order_independent_of_threads():
    f = lambda i: i * i
    assert run_indexed(f, 50, 1) == run_indexed(f, 50, 4) == [i * i for i in range(50)]


def test_sweep_reproducible_across_threads():
    cfg = ExperimentConfig(n_grid=[10, 12], chi_grid=[0.3], trials=6, master_seed=3)
    a = giant_sweep(cfg)
    cfg.threads = 3
    b = giant_sweep(cfg)
    assert [c.as_dict() for c in a.cells] == [c.as_dict() for c in b.cells]
    assert [r.values() for r in a.rows] == [r.values() for r in b.rows]


def test_sweep_cap_and_gate_errors():
    res = giant_sweep(ExperimentConfig(n_grid=[31, 4], chi_grid=[1.5], trials=2))
    kinds = sorted(e.kind for e in res.errors)
    assert kinds == ["rejected", "resource-cap"]
    assert res.cells == []


def test_sweep_row_fields():
    res = giant_sweep(ExperimentConfig(n_grid=[10], chi_grid=[0.2], trials=3, master_seed=1))
    buf = io.StringIO()
    write_rows_csv(buf, res.rows)
    lines = buf.getvalue().splitlines()
    assert lines[0] == ",".join(CSV_COLUMNS)
    assert len(lines) == 4
    assert lines[1].endswith(",")  # runtime left empty by default
    cell = res.cells[0]
    assert cell.predictor_two_chi == pytest.approx(0.4)
    assert cell.ci[0] <= cell.mean_c1_fraction <= cell.ci[1]


def test_csv_float_repr():
    buf = io.StringIO()
    write_rows_csv(buf, [TrialRow("x", 10, 0.1, 1, 0, 0, lam=0.1 + 0.2)])
    assert "0.30000000000000004" in buf.getvalue()


def test_subcritical_bound_and_kappa():
    assert minimal_kappa(0.4) == 3
    assert 0.6 ** 3 < 0.25 <= 0.6 ** 2
    v = subcritical_expected_components(20, 0.4, 200)
    assert v == pytest.approx(2 ** 20 * 0.6 ** 200 / 4000)
    with pytest.raises(ValueError):
        minimal_kappa(1.0)


def test_sprinkle_reproducible():
    a = sprinkle_experiment(10, 0.6, 5, seed=2)
    b = sprinkle_experiment(10, 0.6, 5, seed=2, threads=2)
    assert a.as_dict() == b.as_dict()
    assert a.inclusion <= a.lambda1 + a.lambda2
    assert 0 <= a.merge_frequency <= 1


def test_u_concentration_isolated_bound():
    s = u_concentration(10, 0.3, 1, threshold=3, trials=10, seed=4)
    assert all(i <= u for i, u in zip(s.isolated, s.u_values))
    assert 0 <= s.deviation_frequency <= 1
    with pytest.raises(ResourceCapError):
        u_concentration(31, 0.3, 1, 3, 1, 0)
