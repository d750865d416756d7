import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from shapecorr.errors import InputError
from shapecorr.integrators import (
    CRANK_NICOLSON,
    EXPLICIT_EULER,
    HEAT,
    IMPLICIT_EULER,
    TWIZELL,
    WAVE,
    SchemeSpec,
    TimeGrid,
    amp_theta,
    amp_twizell,
    damped_wave,
    heat_step_factors,
    iteration_count,
    make_grid,
    mode_blocks,
    model_from_name,
    scheme_from_name,
    time_horizon,
    wave_step_matrices,
)

SCHEMES = [IMPLICIT_EULER, CRANK_NICOLSON, TWIZELL]


def grid(tau, M=10):
    return TimeGrid(t_star=tau * M, M=M, tau=tau)


def richardson(f, h):
    a, b, c = f(h), f(h / 2), f(h / 4)
    ab, bc = (4 * b - a) / 3, (4 * c - b) / 3
    return (16 * bc - ab) / 15


def test_amp_theta_examples():
    assert amp_theta(-1.0, 1.0) == 0.5
    assert amp_theta(-2.0, 0.5) == 0.0
    assert amp_theta(-100.0, 0.5) == pytest.approx(-49 / 51, rel=1e-15)


def test_twizell_parameters():
    s = TWIZELL
    assert s.a == pytest.approx(2 - math.sqrt(2) - 1e-6, abs=1e-16)
    assert abs(s.r1 + s.r2 - s.a) < 1e-14
    assert abs(s.r1 * s.r2 - (s.a - 0.5)) < 1e-14
    assert 0 < s.r1 < s.r2
    with pytest.raises(InputError):
        SchemeSpec.twizell(a=0.7)


def test_amp_twizell_consistency_and_decay():
    assert amp_twizell(0.0, TWIZELL) == 1.0
    val = amp_twizell(-1e6, TWIZELL)
    assert abs(val) < 1e-5
    a, r1, r2 = TWIZELL.a, TWIZELL.r1, TWIZELL.r2
    assert val == pytest.approx((1 - a) / (r1 * r2 * -1e6), rel=1e-4)


def test_twizell_taylor_coefficients():
    # symbolic: z^1 -> (r1 + r2) + (1 - a) = 1 ; z^2 -> r1^2 + r1 r2 + r2^2 + (1 - a)(r1 + r2) = 1/2
    a, r1, r2 = TWIZELL.a, TWIZELL.r1, TWIZELL.r2
    assert (r1 + r2) + (1 - a) == pytest.approx(1.0, abs=1e-14)
    assert r1**2 + r1 * r2 + r2**2 + (1 - a) * (r1 + r2) == pytest.approx(0.5, abs=1e-14)

    def R(z):
        return amp_twizell(z, TWIZELL)

    d1 = richardson(lambda h: (R(h) - R(-h)) / (2 * h), 0.05)
    d2 = richardson(lambda h: (R(h) - 2 * R(0.0) + R(-h)) / h**2, 0.05)
    assert abs(R(0.0) - 1.0) < 1e-10
    assert abs(d1 - 1.0) < 1e-10
    assert abs(d2 / 2 - 0.5) < 1e-10


@pytest.mark.parametrize("scheme", [IMPLICIT_EULER, TWIZELL], ids=lambda s: s.name)
def test_l0_stable(scheme):
    assert abs(scheme.amplification(-1e6)) < 1e-5
    assert scheme.is_l0_stable


def test_crank_nicolson_not_l0_stable():
    assert abs(CRANK_NICOLSON.amplification(-1e6)) > 0.99
    z = -np.logspace(np.log10(2.0) + 1e-9, 8, 500)
    assert np.all(CRANK_NICOLSON.amplification(z) < 0)
    assert not CRANK_NICOLSON.is_l0_stable


@pytest.mark.parametrize("scheme", SCHEMES + [SchemeSpec.theta(0.75)], ids=lambda s: s.name)
def test_a_stability_on_negative_axis(scheme):
    z = np.concatenate([[0.0], -np.logspace(-8, 8, 2000)])
    assert np.all(np.abs(scheme.amplification(z)) <= 1.0 + 1e-15)


@pytest.mark.parametrize("scheme, order", [(IMPLICIT_EULER, 1), (CRANK_NICOLSON, 2), (TWIZELL, 2)],
                         ids=lambda x: getattr(x, "name", str(x)))
def test_order_of_accuracy(scheme, order):
    taus = 2.0 ** -np.arange(3, 10)
    errs = [abs(scheme.amplification(-tau) ** round(1 / tau) - math.exp(-1)) for tau in taus]
    slope = np.polyfit(np.log(taus), np.log(errs), 1)[0]
    assert abs(slope - order) <= 0.15


@settings(max_examples=50, deadline=None)
@given(st.floats(-1e3, 1e3), st.floats(0.01, 0.99))
def test_theta_is_degenerate_twizell(z, a):
    degenerate = SchemeSpec("twizell", a, r1=a, r2=0.0)
    assert amp_twizell(z, degenerate) == pytest.approx(float(amp_theta(z, a)), rel=1e-12, abs=1e-12)


def test_heat_factors_match_amplification(rng):
    lam = -np.sort(rng.uniform(0, 500, 30))
    lam[0] = 0.0
    g = grid(0.07)
    for scheme in SCHEMES:
        f = heat_step_factors(lam, g, scheme)
        assert f[0] == 1.0
        np.testing.assert_array_equal(f, np.array([scheme.amplification(0.07 * x) for x in lam]))
    assert heat_step_factors(np.array([-1.0]), grid(1.0), IMPLICIT_EULER)[0] == 0.5


def test_explicit_euler_warns():
    with pytest.warns(RuntimeWarning, match="explicit Euler"):
        heat_step_factors(np.array([0.0, -100.0]), grid(0.1), EXPLICIT_EULER)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        heat_step_factors(np.array([0.0, -10.0]), grid(0.1), EXPLICIT_EULER)


def test_wave_zero_mode_implicit_euler():
    S = wave_step_matrices(np.array([0.0]), WAVE, grid(0.3), IMPLICIT_EULER)
    np.testing.assert_allclose(S[0], [[1.0, 0.3], [0.0, 1.0]], atol=1e-16)


@pytest.mark.parametrize("scheme", SCHEMES, ids=lambda s: s.name)
def test_wave_zero_mode_stays_constant(scheme):
    S = wave_step_matrices(np.array([0.0]), WAVE, grid(0.5), scheme)[0]
    p = np.array([2.5, 0.0])
    for _ in range(50):
        p = S @ p
    np.testing.assert_allclose(p, [2.5, 0.0], atol=1e-14)


def dense_step_matrix(lam, psi, tau, scheme):
    r = len(lam)
    I = np.eye(2 * r)
    H = np.block([[np.zeros((r, r)), np.eye(r)], [np.diag(lam), -psi * np.eye(r)]])
    num = I + (1 - scheme.a) * tau * H
    if scheme.kind == "theta":
        return np.linalg.solve(I - scheme.a * tau * H, num)
    return np.linalg.solve(I - scheme.r1 * tau * H, np.linalg.solve(I - scheme.r2 * tau * H, num))


@pytest.mark.parametrize("scheme", SCHEMES, ids=lambda s: s.name)
@pytest.mark.parametrize("psi", [0.0, 0.8])
def test_per_mode_equals_dense(rng, scheme, psi):
    r, tau = 8, 0.13
    lam = -np.sort(rng.uniform(0, 60, r))
    lam[0] = 0.0
    model = WAVE if psi == 0 else damped_wave(psi)
    S = wave_step_matrices(lam, model, grid(tau), scheme)
    big = dense_step_matrix(lam, psi, tau, scheme)
    p_dense = np.concatenate([rng.normal(size=r), np.zeros(r)])
    w, v = p_dense[:r].copy(), np.zeros(r)
    for _ in range(100):
        p_dense = big @ p_dense
        w, v = S[:, 0, 0] * w + S[:, 0, 1] * v, S[:, 1, 0] * w + S[:, 1, 1] * v
        np.testing.assert_allclose(np.concatenate([w, v]), p_dense, rtol=0, atol=1e-12)


def energy(lam, p):
    return p[:, 1] ** 2 + np.abs(lam) * p[:, 0] ** 2


@pytest.mark.parametrize("scheme", SCHEMES, ids=lambda s: s.name)
def test_wave_energy(rng, scheme):
    lam = -rng.uniform(0.01, 1000, 40)
    S = wave_step_matrices(lam, WAVE, grid(0.05), scheme)
    p = rng.normal(size=(40, 2))
    e = energy(lam, p)
    for _ in range(100):
        p = np.einsum("mij,mj->mi", S, p)
        e_new = energy(lam, p)
        if scheme is CRANK_NICOLSON:
            np.testing.assert_allclose(e_new, e, rtol=1e-10)
        else:
            assert np.all(e_new <= e * (1 + 1e-12))
        e = e_new


def test_mode_blocks():
    A = mode_blocks(np.array([-2.0]), 0.5)
    np.testing.assert_array_equal(A[0], [[0, 1], [-2, -0.5]])


def test_time_horizon_examples():
    for model in (HEAT, WAVE):
        assert time_horizon(model, 1.7, 5.0, 5.0) == 1.7
    assert time_horizon(HEAT, 1.0, 100.0, 1.0) == pytest.approx(10.0, rel=1e-15)
    assert time_horizon(WAVE, 1.0, 16.0, 1.0) == pytest.approx(2.0, rel=1e-15)
    assert time_horizon(damped_wave(0.3), 1.0, 16.0, 1.0) == pytest.approx(2.0, rel=1e-15)
    with pytest.raises(InputError):
        time_horizon(HEAT, 1.0, 10.0, 0.0)


@pytest.mark.parametrize("c, M", [(1, 100), (5, 20), (10, 10)])
def test_grid_iteration_counts(c, M):
    g = make_grid(HEAT, 400.0, 4.0, c=c)
    assert g.M == M
    assert g.tau * g.M == g.t_star
    assert g.t_star == pytest.approx(10.0, rel=1e-15)
    assert len(g.times) == M + 1


def test_iteration_count_guards():
    with pytest.raises(InputError):
        iteration_count(100, 0.0)
    with pytest.raises(InputError):
        iteration_count(3, 10.0)


def test_name_lookup():
    assert scheme_from_name("crank-nicolson") is CRANK_NICOLSON
    assert scheme_from_name("twizell", 1e-4).a == pytest.approx(2 - math.sqrt(2) - 1e-4)
    assert model_from_name("dampedwave", 0.2).psi == 0.2
    with pytest.raises(InputError):
        model_from_name("dampedwave")
    with pytest.raises(InputError):
        scheme_from_name("rk4")
