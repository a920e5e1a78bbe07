import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from jacobi_edge.quadrature import QuadratureError, integrate, log_integrate


def test_polynomial_exact():
    r = integrate(lambda x: 3 * x**2 - x + 1, -1.0, 2.0)
    assert r.value == pytest.approx(9 - 1.5 + 3, rel=1e-14)


def test_oscillatory_with_refinement():
    r = integrate(lambda x: np.sin(50 * x) ** 2, 0.0, math.pi, rtol=1e-12)
    assert r.value == pytest.approx(math.pi / 2, rel=1e-11)


@given(st.floats(100.0, 5000.0))
def test_log_integrate_far_outside_double_range(c):
    # int_0^1 e^{c x} dx = (e^c - 1)/c
    r = log_integrate(lambda x: c * x, 0.0, 1.0, atol_log=1e-8)
    ref = c + math.log(-math.expm1(-c)) - math.log(c)
    assert r.value == pytest.approx(ref, abs=1e-8)


def test_nonfinite_integrand_rejected():
    with pytest.raises(QuadratureError), np.errstate(divide="ignore"):
        integrate(lambda x: 1.0 / (x - 0.5) + 0 * x, 0.0, 1.0)
