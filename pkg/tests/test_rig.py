import math
import sys

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from nbrig import DomainError, RigParams, rig_log_mgf, rig_mgf, rig_pdf, rig_sample

from .oracles import GRID_ALPHA, GRID_M, mp_mgf, quad_mgf, rig_density

alphas = st.floats(0.05, 500.0)
ms = st.floats(0.05, 100.0)

# 1/sqrt(2 pi) * exp(-9/8), transcribed by hand and evaluated in mpmath at 30 digits
RIG_PDF_HALF = 0.129517595665891727614


@pytest.mark.parametrize("alpha, m", [(0.0, 1.0), (-1.0, 1.0), (1.0, 0.0), (math.inf, 1.0), (1.0, math.nan)])
def test_params_reject_invalid(alpha, m):
    with pytest.raises(DomainError):
        RigParams(alpha, m)


def test_pdf_frozen_value():
    assert rig_pdf(0.5, RigParams(0.5, 0.5)) == pytest.approx(RIG_PDF_HALF, rel=1e-14)


def test_pdf_rejects_nonpositive_argument():
    with pytest.raises(DomainError):
        rig_pdf(0.0, RigParams(1.0, 1.0))
    with pytest.raises(DomainError):
        rig_pdf([1.0, -2.0], RigParams(1.0, 1.0))


def test_pdf_vectorised_matches_scalar():
    p = RigParams(3.0, 0.7)
    zs = np.geomspace(1e-3, 30, 25)
    vec = rig_pdf(zs, p)
    # the reference uses the expanded exponent, good to ~1e-13 deep in the tails
    assert np.allclose(vec, [rig_density(z, 3.0, 0.7) for z in zs], rtol=1e-12, atol=0)


def test_pdf_integrates_to_one_unit_params():
    p = RigParams(1.0, 1.0)
    total = sum(
        integrate.quad(lambda z: rig_pdf(z, p), lo, hi, epsabs=1e-12, limit=400)[0]
        for lo, hi in [(0, 1), (1, 20), (20, np.inf)]
    )
    assert abs(total - 1) < 1e-8


@pytest.mark.parametrize("alpha", GRID_ALPHA)
@pytest.mark.parametrize("m", GRID_M)
def test_pdf_normalised_on_grid(alpha, m):
    p = RigParams(alpha, m)
    c = 1 / m + 1 / alpha
    pts = [0, c / 10, c, 10 * c, np.inf]
    total = sum(
        integrate.quad(lambda z: rig_pdf(z, p), lo, hi, epsabs=1e-12, limit=400)[0]
        for lo, hi in zip(pts[:-1], pts[1:])
    )
    assert abs(total - 1) < 1e-6


def test_mgf_at_zero_is_one():
    for a in GRID_ALPHA:
        for m in GRID_M:
            assert rig_mgf(0.0, RigParams(a, m)) == 1.0
            assert rig_log_mgf(0.0, RigParams(a, m)) == 0.0


def test_mgf_table_params_matches_quadrature():
    a, m = 61.4973, 35.8961
    assert rig_mgf(1.0, RigParams(a, m)) == pytest.approx(quad_mgf(1.0, a, m), rel=1e-7)


@pytest.mark.parametrize("t", [-7.5, -1.0, 0.1, 0.2])
@pytest.mark.parametrize("alpha", GRID_ALPHA)
@pytest.mark.parametrize("m", GRID_M)
def test_mgf_matches_mpmath(t, alpha, m):
    if t >= alpha / 2:
        pytest.skip("outside mgf domain")
    assert rig_mgf(t, RigParams(alpha, m)) == pytest.approx(mp_mgf(t, alpha, m), rel=1e-13)


def test_mgf_blows_up_at_boundary():
    p = RigParams(1.0, 1.0)
    assert rig_mgf(0.5 - 1e-9, p) > 1e3
    vals = [rig_mgf(0.5 - 10.0**-k, p) for k in range(1, 10)]
    assert all(b > a for a, b in zip(vals, vals[1:]))


@pytest.mark.parametrize("t", [0.5, 0.75, math.inf, math.nan])
def test_mgf_domain_error(t):
    with pytest.raises(DomainError):
        rig_mgf(t, RigParams(1.0, 1.0))


@given(alphas, ms, st.floats(0, 1e6), st.integers(0, 500))
def test_negative_arguments_always_finite(alpha, m, r, j):
    v = rig_log_mgf(-(r + j), RigParams(alpha, m))
    assert math.isfinite(v) and v <= 0


@given(alphas, ms, st.floats(-50, 0.999))
def test_log_linear_consistency(alpha, m, frac):
    p = RigParams(alpha, m)
    t = frac * alpha / 2
    lin = rig_mgf(t, p)
    # relative error is only meaningful in the normal floating-point range
    if sys.float_info.min < lin < math.inf:
        assert abs(math.exp(rig_log_mgf(t, p)) - lin) / lin < 1e-12


@given(alphas, ms, st.floats(-20, 0.99), st.floats(-20, 0.99))
def test_mgf_monotone(alpha, m, f1, f2):
    p = RigParams(alpha, m)
    t1, t2 = sorted((f1 * alpha / 2, f2 * alpha / 2))
    if t2 - t1 > 1e-9 * max(1.0, abs(t1)):
        assert rig_log_mgf(t1, p) < rig_log_mgf(t2, p)


def test_sample_mean_matches_mgf_derivative():
    p = RigParams(10.0, 2.0)
    h = 1e-5
    deriv = (rig_mgf(h, p) - rig_mgf(-h, p)) / (2 * h)
    z = rig_sample(10**6, p, seed=1)
    assert abs(z.mean() - deriv) < 4 * z.std() / math.sqrt(len(z))


def test_sample_exponential_moment_matches_mgf():
    p = RigParams(10.0, 2.0)
    ez = np.exp(rig_sample(10**6, p, seed=2))
    assert abs(ez.mean() - rig_mgf(1.0, p)) < 4 * ez.std() / math.sqrt(len(ez))


def test_sample_deterministic_and_positive():
    p = RigParams(0.5, 0.5)
    a = rig_sample(1000, p, seed=42)
    b = rig_sample(1000, p, seed=42)
    assert a.tobytes() == b.tobytes()
    assert np.all(a > 0)
    assert not np.array_equal(a, rig_sample(1000, p, seed=43))


def test_sample_rejects_bad_n():
    with pytest.raises(DomainError):
        rig_sample(0, RigParams(1.0, 1.0), seed=0)


@settings(max_examples=20, deadline=None)
@given(alphas, ms)
def test_mgf_matches_quadrature_property(alpha, m):
    t = -1.3
    assert rig_mgf(t, RigParams(alpha, m)) == pytest.approx(quad_mgf(t, alpha, m), rel=1e-8)
