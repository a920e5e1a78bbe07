"""Acceptance criteria, one test (or parametrized group) per criterion.

The terminal summary prints one pass/fail line per criterion.
"""

import math
import time
from fractions import Fraction

import pytest

from jacobi_edge import asymptotics, carmona, checks, cli, continuum
from jacobi_edge.params import MonotoneF, ParameterModel, PotentialModel
from jacobi_edge.wkb import continuum_g


@pytest.mark.acceptance("coefficient reproduction")
def test_coefficient_reproduction(detail):
    t0 = time.perf_counter()
    c = asymptotics.arccosh_coeffs(3).coeffs
    assert c == (Fraction(1), Fraction(-1, 24), Fraction(3, 640), Fraction(-5, 7168))
    table = asymptotics.arccosh_coeffs(40)
    for z in (0.1, 0.25, 1.0):
        ref = math.acosh(1.0 + z / 2.0)
        assert abs(table.partial_sum(z) - ref) <= 1e-12 * ref
    cmp = asymptotics.c20_comparison()
    assert cmp["numerator_match"]
    detail("c20 printed value " + ("matches" if cmp["match"] else "differs from exact arithmetic: "
                                   f"{cmp['denominator_digits_differing']} denominator digit"))
    assert time.perf_counter() - t0 < 1.0


DISCRETE = ("psi_monotone", "psi_growth", "w_bound", "p_sandwich", "eta_sandwich")


@pytest.fixture(scope="module")
def discrete_report():
    return checks.run_verify(seed=0, suites=("discrete",))


@pytest.mark.acceptance("discrete lemma suite")
def test_discrete_lemma_suite(discrete_report, detail):
    by = discrete_report.by_name()
    for name in DISCRETE:
        c = by[name]
        assert c.instances > 0
        assert c.status == "pass", (name, c.max_violation)
        assert c.tolerance == 1e-10
    detail(f"{sum(by[n].instances for n in DISCRETE)} inequalities, "
           f"worst {max(by[n].max_violation for n in DISCRETE):.1e}")
    assert discrete_report.seconds < 30.0


@pytest.mark.acceptance("transfer norm chain")
def test_transfer_chain(detail):
    rep = checks.run_verify(seed=1, suites=("chain",))
    by = rep.by_name()
    assert by["kooman_chain"].status == "pass"
    assert by["kooman_chain"].tolerance == 1e-10
    assert by["kooman_chain"].instances >= 50 * 10_000
    for name in ("phi_ratio", "phi_imaginary_part"):
        assert by[name].status == "pass"
        assert by[name].tolerance == 1e-12
    detail(f"{by['kooman_chain'].instances} chain points")
    assert rep.seconds < 60.0


@pytest.mark.acceptance("free-case semicircle oracle")
@pytest.mark.parametrize("x0", [0.0, 1.0, -1.0, 1.5, -1.5])
def test_free_case(x0):
    free = ParameterModel.free()
    est = carmona.weight_estimate(free, x0, bump_width=0.1, n=1000)
    ref = math.sqrt(4.0 - x0 * x0) / (2.0 * math.pi)
    # the bump average of the semicircle differs from its center value
    # by O(width^2); 3% covers both
    assert abs(math.exp(est.value) / ref - 1.0) < 0.03


@pytest.mark.acceptance("free-case semicircle oracle")
def test_free_pointwise_at_zero():
    v = carmona.weight_estimate(ParameterModel.free(), 0.0, n=1000, method="pointwise").value
    assert abs(math.exp(v) * math.pi - 1.0) < 1e-12


@pytest.mark.acceptance("end-to-end weight envelope")
@pytest.mark.parametrize("delta", [0.05, 0.02, 0.01])
def test_end_to_end_b_case(delta):
    prof = carmona.edge_profile(ParameterModel.power_law_b(1.0, 0.5), delta=delta)
    assert math.isfinite(prof.h)
    assert abs(prof.q_estimate - prof.g) <= prof.h


@pytest.mark.acceptance("end-to-end weight envelope")
@pytest.mark.parametrize("x", [1.5, 1.6, 1.7])
def test_end_to_end_a_case(x):
    prof = carmona.edge_profile(ParameterModel.log_law_a(alpha=1.0), x)
    assert prof.N >= 1
    assert abs(prof.q_estimate - prof.g) <= prof.h


@pytest.mark.acceptance("end-to-end weight envelope")
def test_end_to_end_continuum():
    pot = PotentialModel.power_law(1.0, 1.0, 1.0)
    for E in (0.05, 0.1, 0.2):
        tr = continuum.shoot(pot, E, pot.V_inv(E) + 1.0)
        for c in continuum.monotone_checks(pot, E, tr):
            assert c.passed, c
    rows = continuum.continuum_edge_profile(pot, [0.05, 0.1, 0.2])
    for r in rows:
        assert not r.error
        assert r.passed


@pytest.mark.acceptance("closed-form phase integral")
@pytest.mark.parametrize("beta", [0.5, 1.0, 1.5])
@pytest.mark.parametrize("E", [0.01, 0.1])
def test_closed_form_phase_integral(beta, E):
    pot = PotentialModel.power_law(1.0, beta, 0.0)
    closed = (math.gamma(1.5) * math.gamma(1 / beta - 0.5) / math.gamma(1 / beta + 1)
              / beta * E ** (0.5 - 1 / beta))
    assert abs(continuum_g(pot, E) / closed - 1.0) < 1e-8
    if beta == 1.0:
        assert closed == pytest.approx(math.pi / 2 / math.sqrt(E), rel=1e-14)


@pytest.mark.acceptance("series residual bounded")
@pytest.mark.parametrize("beta", [0.4, 0.5, 0.6])
def test_series_residual(beta, detail):
    t0 = time.perf_counter()
    model = ParameterModel.power_law_b(1.0, beta)
    tab = asymptotics.g_minus_series_residual(model, [1e-2, 1e-3, 1e-4, 1e-5])
    assert len(tab.rows) >= 3
    assert max(r["N"] for r in tab.rows) <= 10**8
    assert tab.bounded
    detail(f"beta={beta}: max ratio {tab.max_ratio:.3f}, delta floor {tab.delta_floor:.2e}")
    assert time.perf_counter() - t0 < 60.0


@pytest.mark.acceptance("log-gap sum lower bound")
@pytest.mark.parametrize("f", [MonotoneF("power", 1.0), MonotoneF("power", 0.5),
                               MonotoneF("iterated-log", depth=2)],
                         ids=["power-1", "power-half", "loglog"])
def test_log_gap_sum(f, detail):
    rs = [asymptotics.log_gap_sum_ratio(f, N) for N in (10**3, 10**4, 10**5, 10**6)]
    assert all(r.holds for r in rs)
    # trend toward sqrt(pi)/2: the last gap is smaller than the first
    assert abs(rs[-1].gap) < abs(rs[0].gap)
    label = f"alpha={f.alpha}" if f.family == "power" else f"depth={f.depth} log"
    detail(f"{label}: final gap {rs[-1].gap:+.4f}")


@pytest.mark.acceptance("continuum bounds")
def test_continuum_bounds(detail):
    rep = checks.run_verify(seed=2, suites=("continuum",))
    by = rep.by_name()
    for name in ("continuum_growth", "continuum_psi_monotone", "continuum_w_bound",
                 "continuum_sandwich", "modulus_integral", "continuum_transfer_norm"):
        assert by[name].status == "pass", (name, by[name].max_violation)
    assert by["modulus_integral"].instances == 20
    detail(f"integral gap {by['modulus_integral'].max_violation:.1e}")
    assert rep.seconds < 60.0


@pytest.mark.acceptance("determinism and fault control")
def test_determinism_and_fault_control(tmp_path):
    args = ["weight", "--deltas", "0.05 0.02", "--format", "csv"]
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert cli.main(args + ["--output", str(a)]) == 0
    assert cli.main(args + ["--output", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert a.read_text().splitlines()[0] == "kind,x,delta,N,g,h,log_w_carmona,q_series,pass,error"
    assert cli.main(["verify", "--quick", "--output", str(tmp_path / "ok.json")]) == 0
    assert cli.main(["verify", "--quick", "--perturb-monotonicity",
                     "--output", str(tmp_path / "bad.json")]) == 1
