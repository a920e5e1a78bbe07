import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from jacobi_edge import continuum
from jacobi_edge.params import ModelError, PotentialModel


def _constant(c):
    return PotentialModel.custom_c1(lambda x: c + 0.0 * np.asarray(x, dtype=float),
                                    lambda x: 0.0 * np.asarray(x, dtype=float))


def test_free_solution_is_a_sine():
    E = 0.7
    k = math.sqrt(E)
    pot = _constant(0.0)
    tr = continuum.shoot(pot, E, 3 * math.pi / k, samples=(math.pi / k, 1.0))
    u, p = tr.values()
    i = tr.index(1.0)
    assert u[i] == pytest.approx(math.sin(k) / k, rel=1e-9)
    assert p[i] == pytest.approx(math.cos(k), rel=1e-9)
    assert abs(u[tr.index(math.pi / k)]) < 1e-9


def test_rk4_order_is_four():
    pot = PotentialModel.power_law(1.0, 1.0, 1.0)
    assert continuum.convergence_order(pot, 0.3, 10.0, h=0.2) == pytest.approx(4.0, abs=0.1)


def test_turning_point_is_a_node():
    pot = PotentialModel.power_law(1.0, 1.0, 1.0)
    tr = continuum.shoot(pot, 0.1, 12.0)
    assert 9.0 in tr.x and 10.0 in tr.x


def test_rescaling_keeps_values():
    pot = PotentialModel.power_law(1.0, 1.0, 1.0)
    E = 5e-4  # g is about 68, so |u| passes 2^64 before the turning point
    tr = continuum.shoot(pot, E, 2010.0)
    assert tr.expo.max() > 0
    assert np.all(np.isfinite(tr.log_abs_u()[1:]))  # u(0) = 0
    assert np.all(np.diff(tr.log_abs_u()[1:][tr.x[1:] <= 1999.0]) > 0)


def test_growth_checks_at_moderate_energy():
    pot = PotentialModel.power_law(1.0, 1.0, 1.0)
    E = 0.5
    tr = continuum.shoot(pot, E, pot.V_inv(E) + 1.0)
    for c in continuum.monotone_checks(pot, E, tr):
        assert c.passed, c
    # N = 1 here, so the sandwich is skipped rather than claimed
    assert [c.skipped for c in continuum.monotone_checks(pot, E, tr)] == [False] * 3 + [True]


def test_inverse_square_tail_with_short_hyperbolic_region():
    pot = PotentialModel.custom_c1(lambda x: (np.asarray(x) + 1.0) ** -2.0,
                                   lambda x: -2.0 * (np.asarray(x) + 1.0) ** -3.0)
    assert pot.V_inv(0.25) == pytest.approx(1.0)
    tr = continuum.shoot(pot, 0.25, 2.0)
    checks = continuum.monotone_checks(pot, 0.25, tr)
    assert all(c.passed for c in checks)
    assert checks[-1].skipped


def test_energy_above_potential_skips_everything():
    pot = PotentialModel.power_law(1.0, 1.0, 1.0)
    tr = continuum.shoot(pot, 2.0, 5.0)
    assert all(c.skipped for c in continuum.monotone_checks(pot, 2.0, tr))


def test_trajectory_must_start_at_zero():
    pot = PotentialModel.power_law(1.0, 1.0, 1.0)
    tr = continuum.shoot(pot, 0.1, 15.0, x_start=10.0)
    with pytest.raises(ValueError):
        continuum.monotone_checks(pot, 0.1, tr)


def test_singular_potential_is_rejected():
    with pytest.raises(ModelError):
        continuum.shoot(PotentialModel.power_law(1.0, 1.0, 0.0), 0.1, 5.0)


def test_step_underflow_is_reported():
    with pytest.raises(continuum.StepUnderflow) as ei:
        continuum.shoot(_constant(0.0), 1.0, 1.0, rtol=1e-30)
    assert 0.0 <= ei.value.x < 1.0


def test_gamma_integral_matches_closed_form():
    pot = PotentialModel.power_law(1.0, 1.0, 1.0)
    E = 0.1
    xs = np.linspace(0.0, 9.0, 7)
    G = continuum.gamma_integral_on_nodes(pot, E, xs)

    def F(x):  # antiderivative of sqrt(1/(x+1) - E)
        s = x + 1.0
        r = math.sqrt(s * (1.0 - E * s))
        return r + math.asin(2.0 * E * s - 1.0) / (2.0 * math.sqrt(E))

    ref = [F(x) - F(0.0) for x in xs]
    assert G == pytest.approx(ref, rel=1e-11, abs=1e-13)


@pytest.mark.parametrize("E", [0.05, 0.3, 2.0])
def test_modulus_integral_matches_log_ratio(E):
    pot = PotentialModel.power_law(3.0, 0.7, 1.0)
    mb = continuum.modulus_bound(pot, E)
    assert mb.closed_gap < 1e-8
    assert mb.reference_valid == (E <= 1.0)


def test_modulus_integral_on_finite_window():
    pot = PotentialModel.power_law(1.0, 1.5, 1.0)
    mb = continuum.modulus_bound(pot, 0.1, x_to=50.0)
    assert mb.closed_gap < 1e-10


def test_modulus_bound_rejects_hyperbolic_start():
    pot = PotentialModel.power_law(1.0, 1.0, 1.0)
    with pytest.raises(ValueError):
        continuum.modulus_bound(pot, 0.1, x_from=5.0)


def test_fundamental_norms_stay_below_the_bound():
    pot = PotentialModel.power_law(1.0, 1.0, 1.0)
    E = 0.1
    mb = continuum.modulus_bound(pot, E)
    ys = np.geomspace(11.0, 1e3, 25)
    ln = continuum.fundamental_log_norms(pot, E, mb.x_from, ys)
    assert np.all(ln <= mb.log_bound)
    assert np.all(ln <= mb.log_bound_reference)
    assert ln.max() > 0.4 * mb.log_bound  # the bound is not vacuous


def test_continuum_weight_is_stable_in_y():
    pot = PotentialModel.power_law(1.0, 1.0, 1.0)
    a = continuum.continuum_weight(pot, 0.1, y=60.0).log_w
    b = continuum.continuum_weight(pot, 0.1, y=200.0).log_w
    assert abs(a - b) < 0.05


def test_profile_records_errors():
    pot = PotentialModel.power_law(1.0, 1.0, 0.0)
    rows = continuum.continuum_edge_profile(pot, [0.1])
    assert rows[0].error and rows[0].kind == "continuum-power-law"


@given(st.floats(0.5, 2.0), st.floats(0.3, 1.9), st.floats(1.0, 3.0), st.floats(2.5, 25.0))
@settings(max_examples=20, deadline=None)
def test_psi_derivative_in_unit_interval(C0, beta, x0, target):
    pot = PotentialModel.power_law(C0, beta, x0)
    E = float(pot.V(target))
    tr = continuum.shoot(pot, E, pot.V_inv(E) + 1.0)
    by = {c.name: c for c in continuum.monotone_checks(pot, E, tr)}
    assert by["continuum_psi_monotone"].passed
    assert by["continuum_w_bound"].passed
    assert by["continuum_growth"].passed
