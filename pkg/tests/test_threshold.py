import math

import numpy as np
import pytest

from critbubble.exceptions import DomainError, UnreliableValueError
from critbubble.specfn import DimPair, sobolev_constant
from critbubble.threshold import (
    TABLE_COLUMNS,
    Verdict,
    analytic_margin,
    analytic_predicate,
    asymptotic_scan,
    bound_report,
    concentrating_quotient,
    eq_bound_sides,
    exact_predicate,
    exact_seminorm,
    g_min,
    g_min_numeric,
    lemma43_quotient,
    log_r_of_n_forms,
    r_of_n,
    r_of_n_forms,
    seminorm_upper_bound,
    threshold_search,
)


def test_g_min_closed_form():
    ell, value = g_min(2.0, 8.0, 1.0, 1.0)
    assert ell == pytest.approx(0.5)
    assert value == pytest.approx(8.0)


def test_g_min_matches_numeric_minimization_on_random_grid():
    rng = np.random.default_rng(20240917)
    coefficients = 10.0 ** rng.uniform(-1.0, 1.0, size=(100, 2))
    exponents = rng.uniform(0.5, 2.0, size=(100, 2))
    for (A, B), (a, b) in zip(coefficients, exponents):
        ell, value = g_min(A, B, a, b)
        numeric_ell, numeric = g_min_numeric(A, B, a, b)
        assert numeric == pytest.approx(value, rel=1e-9), (A, B, a, b)
        assert numeric_ell == pytest.approx(ell, rel=1e-4), (A, B, a, b)


def test_g_min_rejects_nonpositive_input():
    with pytest.raises(DomainError):
        g_min(1.0, 0.0, 1.0, 1.0)


def test_r_of_n_small_dimension():
    assert r_of_n(5) == pytest.approx(0.004273, rel=1e-3)


def test_r_of_n_printed_form_at_five():
    direct, _ = log_r_of_n_forms(5)
    assert math.exp(direct) == pytest.approx(0.004273, rel=1e-3)
    assert math.exp(direct) == pytest.approx(15.0 / 16.0 / sobolev_constant(5) ** 2, rel=1e-10)


@pytest.mark.parametrize("N", [5, 6, 17, 100, 500])
def test_r_of_n_forms_agree(N):
    direct, simplified = r_of_n_forms(N)
    assert direct == pytest.approx(simplified, rel=1e-10)


def test_r_of_n_limit():
    assert abs(r_of_n(400) * math.pi ** 2 * math.e ** 2 - 1.0) <= 0.01


def test_r_of_n_needs_dimension_five():
    with pytest.raises(DomainError):
        r_of_n(4)


def test_gradient_to_l2_ratio_at_five():
    _, ratio = eq_bound_sides(DimPair(5, 0.5))
    assert ratio == pytest.approx(15.0 / 16.0, rel=1e-12)
    assert ratio == pytest.approx(sobolev_constant(5) ** 2 * r_of_n(5), rel=1e-10)


@pytest.mark.parametrize("N", [3, 4])
def test_analytic_bound_needs_dimension_five(N):
    with pytest.raises(DomainError):
        analytic_predicate(DimPair(N, 0.5))


def test_upper_bound_is_positive_and_finite():
    bound = seminorm_upper_bound(DimPair(20, 0.25))
    assert 0.0 < bound < math.inf


def test_analytic_predicate_fails_in_low_dimension():
    assert not analytic_predicate(DimPair(5, 0.5))
    assert analytic_margin(DimPair(5, 0.5)) < 0


@pytest.mark.parametrize("margin,error,verdict", [
    (1.0, 0.0, Verdict.HOLDS),
    (-1.0, 0.0, Verdict.FAILS),
    (1e-3, 1e-3, Verdict.INDETERMINATE),
])
def test_verdict_from_margin(margin, error, verdict):
    assert Verdict.from_margin(margin, error) is verdict


@pytest.mark.parametrize("s", [0.25, 0.5, 0.75])
def test_analytic_threshold_exists(s):
    record = threshold_search(s, "analytic", (5, 500))
    assert record.N0 is not None
    assert not record.failures
    for cell in record.table:
        if cell.key >= record.N0:
            assert cell.value.holds("analytic")


def test_threshold_search_is_independent_of_worker_count():
    serial = threshold_search(0.5, "analytic", (5, 80))
    pooled = threshold_search(0.5, "analytic", (5, 80), workers=2)
    assert serial.N0 == pooled.N0
    assert serial.rows() == pooled.rows()


def test_threshold_rows_follow_table_columns():
    record = threshold_search(0.5, "analytic", (5, 12))
    rows = record.rows()
    assert [row["N"] for row in rows] == list(range(5, 13))
    assert all(set(row) <= set(TABLE_COLUMNS) for row in rows)
    assert record.summary()["mode"] == "analytic"


def test_threshold_search_rejects_low_dimension_in_analytic_mode():
    with pytest.raises(DomainError):
        threshold_search(0.5, "analytic", (4, 10))


def test_threshold_search_rejects_infinite_seminorm_in_exact_mode(spec):
    with pytest.raises(UnreliableValueError):
        threshold_search(0.5, "exact", (3, 6), spec)


def test_threshold_search_rejects_unknown_mode():
    with pytest.raises(DomainError):
        threshold_search(0.5, "guess", (5, 10))


def test_asymptotic_trends():
    table = asymptotic_scan(500)
    assert table.ok
    assert table.sphere_ratio_below(1e-6, 80)
    assert not table.sphere_ratio_below(1e-6, 3)


def test_asymptotic_scan_needs_enough_dimensions():
    with pytest.raises(DomainError):
        asymptotic_scan(9)


def test_concentrating_quotient_tends_to_gradient_level():
    dim = DimPair(8, 0.5)
    reports = [concentrating_quotient(dim, t) for t in (0.0, 0.9, 0.999)]
    assert all(b.quotient < a.quotient for a, b in zip(reports, reports[1:]))
    assert reports[-1].quotient > sobolev_constant(8)


def test_concentrating_quotient_rejects_t_of_one():
    with pytest.raises(DomainError):
        concentrating_quotient(DimPair(8, 0.5), 1.0)


@pytest.mark.slow
def test_exact_report_stays_below_analytic_bound(loose_spec):
    report = bound_report(DimPair(6, 0.5), "exact", loose_spec)
    assert report.lhs_exact < report.lhs_analytic
    assert report.error < 1e-2 * report.lhs_exact


@pytest.mark.slow
def test_exact_seminorm_is_cached(loose_spec):
    first = exact_seminorm(5, 0.75, loose_spec)
    assert exact_seminorm(5, 0.75, loose_spec) is first


def test_analytic_predicate_agrees_with_report_verdict():
    for N in range(5, 40):
        dim = DimPair(N, 0.5)
        report = bound_report(dim, "analytic")
        assert report.predicate_analytic is analytic_predicate(dim)
        assert report.holds("analytic") is analytic_predicate(dim)


def test_analytic_predicate_refuses_margin_inside_error_bar(monkeypatch):
    import critbubble.threshold

    monkeypatch.setattr(critbubble.threshold, "analytic_margin", lambda dim: 1e-12)
    with pytest.raises(UnreliableValueError):
        analytic_predicate(DimPair(30, 0.5))


def test_lemma43_quotient_is_concentrating_quotient():
    assert lemma43_quotient is concentrating_quotient
    dim = DimPair(8, 0.5)
    assert lemma43_quotient(dim, 0.5).quotient == concentrating_quotient(dim, 0.5).quotient


@pytest.mark.parametrize("s,N0", [(0.25, 21), (0.5, 22), (0.75, 24)])
def test_analytic_threshold_values(s, N0):
    assert threshold_search(s, "analytic", (5, 500)).N0 == N0


@pytest.mark.slow
@pytest.mark.parametrize("offset", range(6))
def test_analytic_predicate_implies_exact_predicate(offset, loose_spec):
    N0 = threshold_search(0.5, "analytic", (5, 60)).N0
    dim = DimPair(N0 + offset, 0.5)
    assert analytic_predicate(dim)
    assert analytic_predicate(dim) <= exact_predicate(dim, loose_spec)
