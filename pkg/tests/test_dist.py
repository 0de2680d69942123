import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nbrig import (
    DomainError,
    NbrigParams,
    PrecisionLossError,
    cdf,
    dispersion_report,
    factorial_moment,
    log_pmf,
    mean,
    pmf,
    pmf_direct,
    pmf_recursive,
    pmf_table,
    sample,
    second_moment,
    survival,
    variance,
)
from nbrig.dist import log_pmf_many, pmf_recursive_table, survival_quad, truncation_point

from .oracles import GRID, TABLE1, TABLE2, mp_pmf, quad_pmf

TABLE1_EXPECTED = [103710, 14054.8, 1787.35, 251.933, 40.2211, 7.21741, 1.43701]

params_st = st.builds(
    NbrigParams.of,
    st.floats(0.05, 20.0),
    st.floats(0.1, 200.0),
    st.floats(0.1, 60.0),
)


def closed_form_zero(r, alpha, m):
    return math.sqrt(alpha / (alpha + 2 * r)) * math.exp(alpha / m**2 * (m - m / math.sqrt(alpha) * math.sqrt(alpha + 2 * r)))


@pytest.mark.parametrize("r, alpha, m", [(0.0, 1, 1), (-1, 1, 1), (math.nan, 1, 1), (1, 0, 1), (1, 1, -2)])
def test_params_reject_invalid(r, alpha, m):
    with pytest.raises(DomainError):
        NbrigParams.of(r, alpha, m)


@pytest.mark.parametrize("r, alpha, m", GRID)
def test_zero_count_closed_form(r, alpha, m):
    p = NbrigParams.of(r, alpha, m)
    assert pmf_direct(0, p) == pytest.approx(closed_form_zero(r, alpha, m), rel=1e-14)
    assert pmf_recursive(0, p) == pmf_direct(0, p)


def test_table1_expected_frequencies():
    p = NbrigParams.of(*TABLE1)
    for x, e in enumerate(TABLE1_EXPECTED):
        assert 119853 * pmf_direct(x, p) == pytest.approx(e, rel=5e-3)


@pytest.mark.parametrize("r, alpha, m", GRID)
def test_direct_matches_mpmath(r, alpha, m):
    p = NbrigParams.of(r, alpha, m)
    for x in range(0, 31, 3):
        assert pmf_direct(x, p) == pytest.approx(mp_pmf(x, r, alpha, m), rel=1e-9)


@pytest.mark.parametrize("r, alpha, m", GRID)
def test_recursion_matches_mpmath(r, alpha, m):
    p = NbrigParams.of(r, alpha, m)
    table = pmf_recursive_table(40, p)
    for x in (1, 5, 17, 40):
        assert table[x] == pytest.approx(mp_pmf(x, r, alpha, m), rel=1e-12)


@pytest.mark.parametrize("r, alpha, m", [TABLE1, TABLE2, (0.5, 0.5, 0.5), (1.0, 2.0, 35.8961)])
def test_pmf_matches_mixture_quadrature(r, alpha, m):
    p = NbrigParams.of(r, alpha, m)
    for x in (0, 1, 4, 9):
        assert pmf(x, p) == pytest.approx(quad_pmf(x, r, alpha, m), rel=1e-9)


def test_direct_guard_raises_in_double_precision():
    # with extended precision disabled the alternating sum cannot certify these digits
    p = NbrigParams.of(*TABLE1)
    with pytest.raises(PrecisionLossError):
        pmf_direct(25, p, max_precision=53)


def test_direct_extended_precision_nonnegative_where_float_fails():
    p = NbrigParams.of(*TABLE1)
    vals = [pmf_direct(x, p) for x in range(31)]
    assert all(v >= 0 for v in vals)
    assert vals[30] == pytest.approx(mp_pmf(30, *TABLE1), rel=1e-9)


@pytest.mark.parametrize("r, alpha, m", GRID)
def test_recursion_nonnegative_and_bounded(r, alpha, m):
    t = pmf_recursive_table(60, NbrigParams.of(r, alpha, m))
    assert np.all(t >= 0) and np.all(t <= 1)
    assert math.fsum(t) <= 1 + 1e-12


def test_table2_normalisation():
    t = pmf_recursive_table(200, NbrigParams.of(*TABLE2))
    assert abs(math.fsum(t) - 1) < 1e-8


@pytest.mark.parametrize("x", [0, 1, 7, 30, 90])
def test_log_pmf_consistent(x):
    p = NbrigParams.of(*TABLE1)
    assert math.exp(log_pmf(x, p)) == pytest.approx(pmf(x, p), rel=1e-12)
    assert log_pmf(x, p) == pytest.approx(math.log(pmf_recursive(x, p)), rel=1e-12)


def test_log_pmf_below_double_range():
    # exp of this value underflows; reference from a 900-digit mpmath alternating sum
    p = NbrigParams.of(0.5, 5000.0, 5000.0)
    lp = log_pmf(250, p)
    assert lp == pytest.approx(-839.80889092830585109, rel=1e-12)
    assert pmf(250, p) == 0.0


def test_log_pmf_many_matches_scalar():
    p = NbrigParams.of(*TABLE2)
    xs = [7, 0, 3, 3, 12]
    assert np.array_equal(log_pmf_many(xs, p), [log_pmf(x, p) for x in xs])


@pytest.mark.parametrize("x", [-1, 1.5, "3"])
def test_bad_counts(x):
    with pytest.raises(DomainError):
        pmf_direct(x, NbrigParams.of(*TABLE1))


def test_cdf_limits():
    p = NbrigParams.of(*TABLE2)
    assert cdf(-1, p) == 0.0
    xt = truncation_point(p, tail_tol=1e-12)
    assert abs(cdf(xt, p) - 1) < 1e-9


@pytest.mark.parametrize("r, alpha, m", [TABLE1, TABLE2, (3.4, 2.0, 0.5)])
def test_survival_complements_cdf(r, alpha, m):
    p = NbrigParams.of(r, alpha, m)
    for x in (0, 2, 6):
        assert survival(x, p) + cdf(x, p) == pytest.approx(1.0, abs=1e-12)
        assert survival_quad(x, p) == pytest.approx(1 - cdf(x, p), abs=1e-11)


def test_survival_tail_keeps_relative_accuracy():
    p = NbrigParams.of(*TABLE1)
    x = 20
    direct = math.fsum(pmf_recursive_table(400, p)[x + 1:])
    assert survival(x, p) == pytest.approx(direct, rel=1e-8)


def test_pmf_table_normalised():
    p = NbrigParams.of(*TABLE1)
    t = pmf_table(p)
    assert survival_quad(t.x_max, p) <= 1e-10
    assert abs(math.fsum(t.probs) + t.tail_mass - 1) < 1e-9


def test_factorial_moment_order_one_is_mean():
    for r, alpha, m in GRID:
        if alpha > 2:
            p = NbrigParams.of(r, alpha, m)
            assert factorial_moment(1, p) == pytest.approx(mean(p), rel=1e-12)


def test_factorial_moment_two_brute_force():
    p = NbrigParams.of(*TABLE1)
    t = pmf_table(p, tail_tol=1e-15)
    x = np.arange(len(t.probs))
    brute = math.fsum(x * (x - 1) * t.probs)
    assert factorial_moment(2, p) == pytest.approx(brute, rel=1e-6)


@pytest.mark.parametrize("k", [1, 2, 3])
def test_factorial_moment_boundary(k):
    with pytest.raises(DomainError):
        factorial_moment(k, NbrigParams.of(1.0, 2.0 * k, 1.0))


def test_moment_consistency_analytic():
    for r, alpha, m in GRID:
        if alpha > 4:
            p = NbrigParams.of(r, alpha, m)
            assert factorial_moment(2, p) + mean(p) - mean(p) ** 2 == pytest.approx(variance(p), rel=1e-9)
            assert second_moment(p) - mean(p) ** 2 == pytest.approx(variance(p), rel=1e-9)


def test_mean_vanishes_with_r():
    means = [mean(NbrigParams.of(r, 61.4973, 35.8961)) for r in (1e-2, 1e-4, 1e-8)]
    assert means[0] > means[1] > means[2] > 0
    assert means[2] < 1e-8


def test_moment_domain_errors():
    p = NbrigParams.of(1.0, 3.0, 1.0)
    mean(p)
    with pytest.raises(DomainError):
        variance(p)
    with pytest.raises(DomainError):
        mean(NbrigParams.of(1.0, 2.0, 1.0))


def test_dispersion_table1():
    rep = dispersion_report(NbrigParams.of(*TABLE1))
    assert rep.ratio > 1
    assert rep.variance > rep.nb_matched_variance


def test_dispersion_ratio_decreases_to_nb_limit():
    r, m = 2.0, 3.0
    ratios = [dispersion_report(NbrigParams.of(r, a, m)) for a in (1e2, 1e4, 1e6)]
    assert ratios[0].ratio > ratios[1].ratio > ratios[2].ratio
    # NB(r, exp(-1/m)) dispersion is exp(1/m)
    assert all(d.ratio > math.exp(1 / m) for d in ratios)
    assert ratios[2].ratio == pytest.approx(math.exp(1 / m), rel=1e-4)


def test_sample_deterministic():
    p = NbrigParams.of(*TABLE1)
    a, b = sample(5000, p, seed=7), sample(5000, p, seed=7)
    assert a.tobytes() == b.tobytes()
    assert np.all(a >= 0)


@settings(max_examples=30, deadline=None)
@given(params_st, st.integers(0, 12))
def test_direct_and_recursion_agree(p, x):
    assert pmf_direct(x, p) == pytest.approx(pmf_recursive(x, p), rel=1e-9)


@settings(max_examples=30, deadline=None)
@given(params_st)
def test_partial_sums_never_exceed_one(p):
    t = pmf_recursive_table(25, p)
    assert np.all(t >= 0)
    assert math.fsum(t) <= 1 + 1e-12
