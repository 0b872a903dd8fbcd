import pytest

from prophet_samples.checks import (
    ROW_HEADER,
    SUITES,
    CheckRow,
    lp_reduction_cases,
    run_suite,
    suite_close2,
    suite_csz,
    suite_dkw,
    suite_eps_small,
    suite_eq_iid,
    suite_estimation,
    suite_geom_mean,
    suite_payoff,
)
from prophet_samples.errors import ParameterError


def test_row_margin_and_status():
    row = CheckRow("s", "c", 1.0, 1.0 + 1e-13, 1e-12)
    assert row.passed and row.margin == pytest.approx(-1e-13)
    assert not CheckRow("s", "c", 0.0, 1.0, 1e-12).passed
    assert row.line().endswith(",PASS") and len(row.line().split(",")) == len(ROW_HEADER.split(","))


@pytest.mark.parametrize("suite", [suite_csz, suite_eps_small, suite_payoff, suite_eq_iid])
def test_small_suites_pass(suite):
    rows = suite(cases=8, seed=1)
    assert rows and all(r.passed for r in rows)


def test_geom_mean_small():
    assert all(r.passed for r in suite_geom_mean(vectors=200, seed=1))


def test_close2_rows_come_in_pairs():
    rows = suite_close2(cases=10, seed=1)
    stated = [r for r in rows if "factor" not in r.case]
    relaxed = [r for r in rows if "factor" in r.case]
    assert len(stated) == len(relaxed) == 10
    assert all(r.passed for r in relaxed)


def test_estimation_and_dkw_small():
    assert all(r.passed for r in suite_estimation(trials=40, seed=2))
    assert all(r.passed for r in suite_dkw(trials=50, k=2000, seed=2))


def test_lp_reduction_cases_small():
    cases = lp_reduction_cases(cases=3, seed=4)
    for c in cases:
        for model in {m for m, _ in c.delta}:
            assert c.delta[(model, True)] == pytest.approx(c.delta[(model, False)], abs=1e-6)


def test_run_suite_names():
    assert set(SUITES) == {"csz", "eps_small", "geom_mean", "payoff", "close2", "eq_iid", "estimation", "dkw",
                           "lp_reduction"}
    with pytest.raises(ParameterError):
        run_suite("nope")
