import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from jacobi_edge.params import ParameterModel, PotentialModel
from jacobi_edge.phases import NoTurningPoint
from jacobi_edge.wkb import (
    CSV_FIELDS,
    EdgeProfile,
    continuum_envelope,
    envelope,
    g_sum,
    gamma_partial_sums,
    turning_point,
)

# frozen from a 30-digit mpmath summation of arccosh(1 + (C j^-beta - delta)/2)
G_B_01 = 23.870004704006867
G_B_001 = 783.76275959447922
# arccosh(x / (2 a_n)) with a_n = 1 - 1/(1 + log(n+1)), x = 1.5
G_A_15 = 7.9604535741441263
# int_0^9 sqrt(1/(x+1) - 0.1) dx
G_C_01 = 3.0011462445322443


def test_g_sum_frozen_values():
    m = ParameterModel.power_law_b(1.0, 0.5)
    assert g_sum(m, delta=0.1) == pytest.approx(G_B_01, rel=1e-13)
    assert g_sum(m, delta=0.01) == pytest.approx(G_B_001, rel=1e-13)
    assert g_sum(ParameterModel.log_law_a(alpha=1.0), 1.5) == pytest.approx(G_A_15, rel=1e-13)
    assert g_sum(PotentialModel.power_law(1.0, 1.0, 1.0), 0.1) == pytest.approx(G_C_01, rel=1e-11)


def test_a_case_weight_is_even():
    m = ParameterModel.log_law_a(alpha=1.0)
    assert g_sum(m, -1.5) == g_sum(m, 1.5)


def test_g_zero_without_hyperbolic_region():
    assert g_sum(ParameterModel.free(), 1.0) == 0.0
    with pytest.raises(NoTurningPoint):
        turning_point(ParameterModel.free(), 1.0)


def test_partial_sums_end_at_g():
    td = turning_point(ParameterModel.power_law_b(1.0, 0.5), delta=0.05)
    G = gamma_partial_sums(td)
    assert G[-1] == pytest.approx(g_sum(td.model, delta=0.05), rel=1e-12)
    assert np.all(np.diff(np.diff(G)) <= 1e-15)  # gamma_n nonincreasing


@given(st.floats(0.05, 1.0), st.floats(0.3, 1.5))
@settings(max_examples=25, deadline=None)
def test_g_increases_toward_the_edge(C, beta):
    m = ParameterModel.power_law_b(C, beta)
    d = C * np.array([50.5, 200.5, 800.5]) ** (-beta)
    g = [g_sum(m, delta=float(v)) for v in d]
    assert g[0] < g[1] < g[2]


@pytest.mark.parametrize("delta", [0.1, 0.01])
def test_envelope_is_finite_and_decomposes(delta):
    ev = envelope(ParameterModel.power_law_b(1.0, 0.5), delta=delta)
    assert math.isfinite(ev.h) and ev.h > 0
    lhs = math.exp(ev.h)
    assert lhs == pytest.approx(ev.C_env * ev.N * delta**0.5 / ev.Delta, rel=1e-12)


def test_envelope_values_frozen():
    m = ParameterModel.power_law_b(1.0, 0.5)
    assert envelope(m, delta=0.1).h == pytest.approx(13.77, abs=0.01)
    assert envelope(m, delta=0.01).h == pytest.approx(24.10, abs=0.01)


def test_envelope_without_turning_point():
    ev = envelope(ParameterModel.free(), 1.0)
    assert ev.N == 0 and math.isfinite(ev.h)


def test_continuum_envelope_infinite_for_singular_potential():
    assert math.isinf(continuum_envelope(PotentialModel.power_law(1.0, 1.0, 0.0), 0.1).h)
    ev = continuum_envelope(PotentialModel.power_law(1.0, 1.0, 1.0), 0.1)
    assert math.isfinite(ev.h) and ev.N == pytest.approx(9.0)


def test_edge_profile_row_schema():
    p = EdgeProfile("power-law-b", 1.9, 0.1, 100, 23.8, 13.7, -50.0, 24.0)
    assert tuple(p.row()) == CSV_FIELDS
    assert p.q_estimate == 25.0 and p.passed
    assert EdgeProfile("x", 1.0, 1.0, 0, 0.0, 1.0).passed is None
