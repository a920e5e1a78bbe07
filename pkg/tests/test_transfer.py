import math

import numpy as np
import pytest
from hypothesis import example, given
from hypothesis import strategies as st

from jacobi_edge.params import ParameterModel
from jacobi_edge.transfer import (
    Mat2C,
    consecutive_bound,
    consecutive_norm,
    elliptic_norm_bound,
    kooman_factors,
    log_closed_bound,
    lower_edge_envelope,
    singular_values,
    step_matrix,
    y_norms,
)

kappas = st.floats(1e-3, math.pi / 2 - 1e-3)


@given(st.floats(-5, 5), st.floats(-5, 5), st.floats(-5, 5), st.floats(-5, 5))
@example(0.0, 2.0, 2.0, 5.302968637177284e-05)  # nearly equal singular values
def test_singular_values_match_numpy(a, b, c, d):
    m = np.array([[a, b], [c, d]])
    ref = np.linalg.svd(m, compute_uv=False)
    smax, smin = singular_values(a, b, c, d)
    assert smax == pytest.approx(ref[0], rel=1e-12, abs=1e-12)
    assert smin == pytest.approx(ref[1], rel=1e-9, abs=1e-9)


def test_step_matrix_has_unit_determinant():
    m = ParameterModel.log_law_a(alpha=1.0)
    for n in (1, 5, 100):
        assert abs(step_matrix(m, 1.3, n).det() - 1.0) < 1e-14


@given(kappas, st.floats(0.3, 1.0))
def test_kooman_factorization_reproduces_step(k, a):
    Y, V, Yi = kooman_factors(k, a)
    A = Y @ V @ Yi
    target = Mat2C(2 * math.cos(k), -1.0 / a, a, 0.0)
    assert A.max_abs_diff(target) < 1e-12
    assert (Y @ Yi).max_abs_diff(Mat2C.identity()) < 1e-12


@given(kappas)
def test_y_norms_closed_form(k):
    n, ni = y_norms(k, 1.0)
    assert float(n) == pytest.approx(2 * math.cos(k / 2), rel=1e-12)
    assert float(ni) == pytest.approx(1 / (2 * math.sin(k / 2)), rel=1e-10)


@given(kappas, st.floats(0.0, 0.2))
def test_consecutive_norm_below_bound_b_case(k, dk):
    k1 = min(k + dk, math.pi / 2 - 1e-4)
    assert float(consecutive_norm(k, k1)) <= float(consecutive_bound(k, k1, "b")) * (1 + 1e-13)
    # the Kooman product matches the matrix product directly
    Y0 = kooman_factors(k)[0]
    Y1i = kooman_factors(k1)[2]
    assert float(consecutive_norm(k, k1)) == pytest.approx((Y1i @ Y0).norm(), rel=1e-12)


@given(st.floats(0.01, 0.7), st.floats(0.0, 0.05), st.floats(0.5, 0.99), st.floats(0.0, 0.01))
def test_consecutive_norm_below_bound_a_case(k, dk, a, da):
    # a-case: x/a_n = 2 cos k_n with a increasing and k increasing
    a1 = min(a + da, 1.0)
    k1 = math.acos(min(1.0, a * math.cos(k) / a1))
    assert float(consecutive_norm(k, k1, a, a1)) <= float(consecutive_bound(k, k1, "a")) * (1 + 1e-12)


@pytest.mark.parametrize("model,delta", [(ParameterModel.power_law_b(1.0, 0.5), 0.1),
                                         (ParameterModel.power_law_b(0.3, 1.5), 0.02),
                                         (ParameterModel.log_law_a(alpha=1.0), 0.4)])
def test_norm_chain_nested(model, delta):
    ch = elliptic_norm_bound(model, delta=delta, n_to=None)
    assert ch.max_slack_violation <= 1e-10
    assert ch.det_error < 1e-8
    assert len(ch.n) == 10_001


def test_closed_bound_value():
    k = 0.1
    expect = math.log(2 / math.sin(k)) + math.log(0.3 / k) + 0.3 * (1 / math.sin(0.3) - 1 / 0.3)
    assert log_closed_bound(k, 0.3) == pytest.approx(expect, rel=1e-12)


def test_lower_edge_envelope_brackets_free_case():
    # free case (b = 0 never reached, use a tiny b): bounds hold for the semicircle
    m = ParameterModel.power_law_b(1e-6, 1.0)
    env = lower_edge_envelope(m, -1.0)
    logw = math.log(math.sqrt(3.0) / (2 * math.pi))
    assert env.log_lower <= logw <= env.log_upper
