import io
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from ptcompacton.errors import BeyondSupport, DomainError, FamilyMismatch, InadmissibleParams, UnsupportedFamily
from ptcompacton.params import ModelParams
from ptcompacton.profile import (
    ProfileFamily,
    build_profile,
    custom_profile,
    default_family,
    first_integral_residual,
    half_width,
    hyperelliptic_params,
    inc_beta_forward,
    profile_constants,
    weak_solution_check,
    y_of_z,
    z_of_y,
)
from ptcompacton.specfun import beta_fn, jacobi_cn

SQRT6 = math.sqrt(6.0)


# --- hyperelliptic parameters -------------------------------------------------

@pytest.mark.parametrize("l, p, m", [(3, 1, 2), (5, 1, 4), (6, 2, 4), (8, 2, 6)])
def test_width_independent_exponents(l, p, m):
    a, tau, _, _ = hyperelliptic_params(ModelParams(l, p, m))
    assert tau == pytest.approx(m / 2)
    assert a == pytest.approx(m / (l - 2))


@pytest.mark.parametrize("l, p, m, a_expected", [(6, 2, 4, 1.0), (5, 1, 4, 4.0 / 3.0)])
def test_special_case_powers_and_amplitude(l, p, m, a_expected):
    a, _, amp, _ = hyperelliptic_params(ModelParams(l, p, m, c=1.7))
    assert a == pytest.approx(a_expected)
    # the crest of the first integral fixes A^(l-2) = c l (l-1) / 2
    assert amp ** (l - 2) == pytest.approx(1.7 * l * (l - 1) / 2, rel=1e-14)


def test_hyperelliptic_rejects_inadmissible():
    with pytest.raises(InadmissibleParams):
        hyperelliptic_params(ModelParams(3, 2.5, 2))
    with pytest.raises(InadmissibleParams):
        hyperelliptic_params(ModelParams(3, 0, 2))  # m + p = 2


@settings(max_examples=40, deadline=None)
@given(st.floats(2.2, 12), st.floats(0.2, 2.0), st.sampled_from([2, 4, 6]), st.floats(0.1, 10), st.floats(0.1, 10))
def test_scaling_covariance(l, p, m, c1, c2):
    if p > l:
        return
    _, _, a1, b1 = hyperelliptic_params(ModelParams(l, p, m, c=c1))
    _, _, a2, b2 = hyperelliptic_params(ModelParams(l, p, m, c=c2))
    assert a2 / a1 == pytest.approx((c2 / c1) ** (1 / (l - 2)), rel=1e-10)
    assert b2 / b1 == pytest.approx((c2 / c1) ** ((l - p - m) / (m * (l - 2))), rel=1e-10)


# --- the Z(y) map ----------------------------------------------------------------

def test_z_of_y_endpoints():
    assert z_of_y(2.0, 4, 0.0) == 0.0
    yh = half_width(2.0, 4)
    assert yh == pytest.approx(math.gamma(0.75) * math.gamma(1.25), abs=1e-14)
    assert yh == pytest.approx(math.pi * math.sqrt(2) / 4, abs=1e-14)
    assert z_of_y(2.0, 4, yh) == 1.0
    assert half_width(3.0, 6) == pytest.approx(math.pi / 3, abs=1e-14)
    assert z_of_y(3.0, 6, math.pi / 3) == pytest.approx(1.0, abs=1e-14)


def test_z_of_y_beyond_support():
    with pytest.raises(BeyondSupport):
        z_of_y(2.0, 4, 1.2)
    with pytest.raises(BeyondSupport):
        z_of_y(2.0, 4, -0.1)


def test_forward_map_against_direct_quadrature():
    tau, m = 1.5, 4
    for z in (0.2, 0.7, 0.95):
        ref, _ = quad(lambda x: (1 - x ** (2 * tau)) ** (-1 / m), 0, z, epsabs=1e-13, epsrel=1e-12)
        assert y_of_z(tau, m, z) == pytest.approx(ref, abs=1e-12)


@settings(max_examples=60, deadline=None)
@given(st.floats(0.3, 6.0), st.sampled_from([2, 4, 6, 8]), st.floats(0.0, 1.0))
def test_z_of_y_inverts_forward_map(tau, m, frac):
    y = frac * half_width(tau, m)
    z = z_of_y(tau, m, y)
    assert 0.0 <= z <= 1.0
    assert abs(y_of_z(tau, m, z) - y) <= 1e-10


# --- closed forms ---------------------------------------------------------------

@pytest.mark.parametrize("c", [0.3, 1.0, 2.5])
def test_sin2_closed_form(c):
    prof = build_profile(ModelParams(3, 1, 2, c=c), "closed_sin2", 256)
    exact = 3 * c * np.cos(prof.y / (2 * SQRT6)) ** 2
    assert np.max(np.abs(prof.f - exact)) < 1e-8 * 3 * c
    assert prof.y_half == pytest.approx(math.pi * SQRT6, rel=1e-15)
    assert prof.f[prof.n_half] == pytest.approx(3 * c)
    assert prof.f[0] == 0.0 and prof.f[-1] == 0.0
    assert first_integral_residual(prof) < 1e-10


def test_cn2_closed_form():
    c = 1.3
    prof = build_profile(ModelParams(4, 1, 2, c=c), "closed_cn2", 256)
    beta = (c / 96.0) ** 0.25
    assert prof.A == pytest.approx(math.sqrt(6 * c)) and prof.beta_w == pytest.approx(beta)
    ref = math.sqrt(6 * c) * np.array([jacobi_cn(beta * y, 1 / math.sqrt(2)) for y in prof.y]) ** 2
    assert np.max(np.abs(prof.f - ref)) < 1e-12
    assert first_integral_residual(prof) < 1e-8


@pytest.mark.parametrize("l, closed", [(3, "closed_sin2"), (4, "closed_cn2")])
def test_closed_forms_agree_with_hyperelliptic(l, closed):
    params = ModelParams(l, 1, 2, c=0.8)
    a = build_profile(params, closed, 128)
    b = build_profile(params, "hyperelliptic", 128)
    assert a.y_half == pytest.approx(b.y_half, rel=1e-13)
    assert np.max(np.abs(a.f - b.f)) < 1e-12 * a.A
    assert np.max(np.abs(a.fprime - b.fprime)) < 1e-12 * a.A


def test_derivatives_against_finite_differences():
    prof = build_profile(ModelParams(5, 1, 4, c=1.0), "hyperelliptic", 256)
    y = np.linspace(-0.9, 0.9, 9) * prof.y_half
    y = y[np.abs(y) > 0.05 * prof.y_half]
    h = 1e-5
    f0, fp, fpp = prof.evaluate(y)
    fplus, fpp_, _ = prof.evaluate(y + h)
    fminus, fpm, _ = prof.evaluate(y - h)
    assert np.allclose(fp, (fplus - fminus) / (2 * h), atol=1e-8)
    assert np.allclose(fpp, (fpp_ - fpm) / (2 * h), atol=1e-6)


# --- incomplete-beta parametrizations ----------------------------------------------

def test_inc_beta_forward_zero_and_mismatch():
    assert inc_beta_forward(ModelParams(3, 1, 4), 0.0) == 0.0
    with pytest.raises(FamilyMismatch):
        inc_beta_forward(ModelParams(5, 1, 4), 0.1)
    with pytest.raises(DomainError):
        inc_beta_forward(ModelParams(3, 1, 4, c=1.0), 3.5)


def test_inc_beta_half_width_l3_m4():
    c = 1.0
    params = ModelParams(3, 1, 4, c=c)
    yh = inc_beta_forward(params, 3 * c)
    assert yh == pytest.approx(2**0.25 * 3**0.75 * math.sqrt(c) * beta_fn(0.75, 0.75), rel=1e-14)
    # direct quadrature of dy = df / (c f/2 - f^2/6)^(1/4)
    ref, _ = quad(lambda u: (c * u / 2 - u * u / 6) ** -0.25, 0, 3 * c, epsabs=1e-13, epsrel=1e-13, limit=200)
    assert yh == pytest.approx(ref, abs=1e-9)
    assert yh == pytest.approx(4.593260645425901, rel=1e-13)


def test_inc_beta_l3_m2_reproduces_sin2():
    c = 0.7
    params = ModelParams(3, 1, 2, c=c)
    prof = build_profile(params, "inc_beta_l3p1", 128)
    assert np.max(np.abs(prof.f - 3 * c * np.cos(prof.y / (2 * SQRT6)) ** 2)) < 1e-12


@pytest.mark.parametrize("l, fam, m", [(3, "inc_beta_l3p1", 4), (3, "inc_beta_l3p1", 6), (4, "inc_beta_l4p1", 4)])
def test_inc_beta_agrees_with_hyperelliptic(l, fam, m):
    params = ModelParams(l, 1, m, c=1.4)
    a = build_profile(params, fam, 128)
    b = build_profile(params, "hyperelliptic", 128)
    assert a.y_half == pytest.approx(b.y_half, rel=1e-12)
    assert np.max(np.abs(a.f - b.f)) < 1e-8


# --- residuals and weak-solution checks -------------------------------------------------

@pytest.mark.parametrize("lpm", [(5, 1, 4), (8, 2, 4), (6, 2, 4), (4, 1, 6), (5, 2, 6), (3, 0.5, 2)])
def test_hyperelliptic_first_integral(lpm):
    prof = build_profile(ModelParams(*lpm, c=1.1), "hyperelliptic", 256)
    assert first_integral_residual(prof) < 1e-8
    assert weak_solution_check(prof)


def test_zero_profile_residual():
    params = ModelParams(3, 1, 2)
    y = np.linspace(-5, 5, 257)
    zero = custom_profile(params, y, np.zeros_like(y))
    assert first_integral_residual(zero) == 0.0


def test_p2_profile_has_finite_edge_slope_and_is_weak():
    prof = build_profile(ModelParams(6, 2, 4), "hyperelliptic", 256)
    assert prof.a_exp == 1.0
    # f' at the edge tends to A beta, yet f^p (f')^m still vanishes
    assert abs(prof.fprime[0]) == pytest.approx(prof.A * prof.beta_w, rel=1e-12)
    assert weak_solution_check(prof)


def test_derivative_jump_is_not_weak():
    params = ModelParams(3, 0.0, 4)  # p = 0: flux is (f')^m alone
    y = np.linspace(-1.0, 1.0, 257)
    tent = 1.0 - np.abs(y)  # slope -1 up to the edge: flux does not vanish there
    assert not weak_solution_check(custom_profile(params, y, tent, -np.sign(y)))
    lifted = custom_profile(params, y, 1.0 - y**2 + 0.1)  # jumps at the edge
    assert not weak_solution_check(lifted)


def test_symmetry_and_support():
    prof = build_profile(ModelParams(8, 2, 4, c=2.0), "hyperelliptic", 200)
    assert np.array_equal(prof.f, prof.f[::-1])
    assert np.array_equal(prof.fprime, -prof.fprime[::-1])
    assert prof.f[prof.n_half] == pytest.approx(prof.A) and np.argmax(prof.f) == prof.n_half
    f, fp, _ = prof.evaluate(np.array([-2 * prof.y_half, 1.01 * prof.y_half]))
    assert np.all(f == 0.0) and np.all(fp == 0.0)


def test_family_validation():
    assert default_family(ModelParams(3, 1, 2)) is ProfileFamily.CLOSED_SIN2
    assert default_family(ModelParams(5, 1, 4)) is ProfileFamily.HYPERELLIPTIC
    with pytest.raises(InadmissibleParams):
        build_profile(ModelParams(5, 1, 4), "closed_sin2")
    with pytest.raises(UnsupportedFamily):
        profile_constants(ModelParams(5, 1, 4), "sech2")
    with pytest.raises(InadmissibleParams):
        build_profile(ModelParams(3, 1, 2, alpha=0.5), "closed_sin2")
    with pytest.raises(InadmissibleParams):
        build_profile(ModelParams(5, 2.5, 2))
    with pytest.raises(ValueError):
        build_profile(ModelParams(3, 1, 2), n_grid=32)


def test_csv_output():
    prof = build_profile(ModelParams(6, 2, 4), "hyperelliptic", 64)
    text = prof.to_csv()
    lines = text.splitlines()
    assert lines[0].startswith("# family=hyperelliptic") and "y_half=" in lines[0]
    assert lines[1] == "y,f,fprime,z,Z"
    data = np.loadtxt(io.StringIO(text), delimiter=",", skiprows=2)
    assert data.shape == (129, 5)
    assert np.array_equal(data[:, 1], prof.f)  # 17 significant digits round-trip
