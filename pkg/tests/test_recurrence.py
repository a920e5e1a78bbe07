import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from jacobi_edge.params import ParameterModel
from jacobi_edge.phases import deficit, gamma_from_deficit
from jacobi_edge.recurrence import (
    LogScaledPair,
    eta_n,
    log_eta_vec,
    p_sequence,
    phi_trajectory,
    psi_sequence,
    step_p,
)


def naive_p(model, x, n_max):
    p = [1.0, (x - float(model.b(1))) / float(model.a(1))]
    for n in range(1, n_max):
        a0, a1 = float(model.a(n)), float(model.a(n + 1))
        p.append(((x - float(model.b(n + 1))) * p[n] - a0 * p[n - 1]) / a1)
    return np.array(p[: n_max + 1])


@pytest.mark.parametrize("model", [ParameterModel.power_law_b(0.7, 0.8),
                                   ParameterModel.log_law_a(alpha=1.0), ParameterModel.free()])
def test_scaled_sequence_matches_naive_recursion(model):
    for x in (-1.3, 0.4, 1.9):
        ref = naive_p(model, x, 60)
        got = p_sequence(model, x, 60).values()
        assert np.allclose(got, ref, rtol=1e-11, atol=1e-13)


def test_chebyshev_second_kind_values():
    # free case: p_n(2 cos t) = sin((n+1)t)/sin t
    t = 0.7
    n = np.arange(0, 30)
    ref = np.sin((n + 1) * t) / math.sin(t)
    assert np.allclose(p_sequence(ParameterModel.free(), 2 * math.cos(t), 29).values(), ref, atol=1e-12)


def test_no_overflow_far_into_growth():
    m = ParameterModel.power_law_b(1.0, 0.5)
    seq = p_sequence(m, 1.99, 20_000)
    la = seq.log_abs()
    assert np.all(np.isfinite(la)) and la.max() > 700


def test_step_p_matches_sequence():
    m = ParameterModel.power_law_b(1.0, 0.5)
    s = LogScaledPair.start()
    for _ in range(500):
        s = step_p(m, 1.95, s)
    la, lb = s.log_abs()
    ref = p_sequence(m, 1.95, 500).log_abs()
    assert la == pytest.approx(ref[500], rel=1e-12)
    assert lb == pytest.approx(ref[499], rel=1e-12)


def test_eta_free_at_zero_is_one():
    assert eta_n(ParameterModel.free(), 0.0, 1000) == pytest.approx(0.0, abs=1e-12)  # log eta
    v = log_eta_vec(ParameterModel.free(), np.array([0.0, 1.0]), 1001)
    assert abs(v[0]) < 1e-12


def test_gamma_partial_sum_at_the_edge():
    # x = 2, b_n = -n^{-1/2}: gamma_j = arccosh(1 + j^{-1/2}/2); mpmath oracle
    m = ParameterModel.power_law_b(1.0, 0.5)
    g = gamma_from_deficit(deficit(m, np.arange(1, 5), 2.0, 0.0))
    with mpmath.workdps(30):
        ref = mpmath.fsum(mpmath.acosh(1 + mpmath.mpf(j) ** -0.5 / 2) for j in range(1, 5))
    assert float(np.sum(g)) == pytest.approx(float(ref), rel=1e-14)
    assert float(ref) == pytest.approx(3.2161288414996475, rel=1e-15)
    ps = psi_sequence(m, x=2.0, N=4)
    assert np.sum(ps.gamma[1:5]) == pytest.approx(float(ref), rel=1e-14)


@given(st.floats(0.05, 1.0), st.floats(0.2, 1.9), st.integers(5, 3000))
@settings(max_examples=40, deadline=None)
def test_psi_inequalities_b_case(C, beta, target):
    m = ParameterModel.power_law_b(C, beta)
    delta = C * (target + 0.5) ** (-beta)
    ps = psi_sequence(m, delta=delta)
    psi = ps.psi
    n = np.arange(len(psi))
    assert psi[0] == 1.0
    assert np.all(np.diff(psi) >= -1e-10 * psi[:-1])
    assert np.all(psi <= (n + 1) * (1 + 1e-10))
    assert np.all(ps.W <= np.exp(ps.gamma[1: len(ps.W) + 1]) * (1 + 1e-10))


@given(st.floats(0.5, 2.0), st.integers(5, 3000))
@settings(max_examples=30, deadline=None)
def test_psi_inequalities_a_case(alpha, target):
    m = ParameterModel.log_law_a(alpha=alpha)
    delta = 2.0 * float(m.f(math.log(target + 1.5)))
    ps = psi_sequence(m, delta=delta)
    psi = ps.psi
    assert np.all(np.diff(psi) >= -1e-10 * psi[:-1])
    assert np.all(psi <= (np.arange(len(psi)) + 1) * (1 + 1e-10))
    assert np.all(ps.W <= np.exp(ps.gamma[1: len(ps.W) + 1]) * (1 + 1e-10))


def test_psi_times_growth_is_p():
    m = ParameterModel.power_law_b(1.0, 0.5)
    ps = psi_sequence(m, delta=0.05)
    N = len(ps.psi) - 1
    G = np.concatenate([[0.0], np.cumsum(ps.gamma[1: N + 1])])
    lp = p_sequence(m, 1.95, N).log_abs()
    assert np.allclose(np.log(ps.psi) + G, lp, rtol=1e-11)


@pytest.mark.parametrize("model", [ParameterModel.power_law_b(1.0, 0.5), ParameterModel.log_law_a(alpha=1.0)])
def test_phi_ratio_within_exact_radius(model):
    tr = phi_trajectory(model, delta=0.3)
    assert tr.max_violation() <= 1e-12
    assert np.all(tr.im_check < 1e-12)
    assert np.all(tr.radius <= tr.rate + 1e-15)
