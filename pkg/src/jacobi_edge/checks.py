"""Randomized verification suites for the inequalities the bounds rest on.

Each check runs over seeded random instances and records the worst relative
violation. The suite is what ``jacobi-edge verify`` reports.
"""

from __future__ import annotations

import math
import time
from dataclasses import asdict, dataclass, field
from fractions import Fraction

import numpy as np

from . import asymptotics, continuum
from .params import MonotoneF, ParameterModel, PotentialModel
from .phases import turning_index
from .recurrence import p_sequence, phi_trajectory, psi_sequence
from .transfer import elliptic_norm_bound

SCHEMA_VERSION = 1


@dataclass
class CheckResult:
    name: str
    instances: int = 0
    max_violation: float = 0.0
    tolerance: float = 0.0
    status: str = "pass"
    note: str = ""

    def update(self, violation: float, count: int = 1) -> None:
        self.instances += count
        if not violation <= self.max_violation:  # nan counts as a violation
            self.max_violation = violation if math.isfinite(violation) else math.inf

    def finish(self) -> "CheckResult":
        if self.instances == 0:
            self.status = "skip"
        else:
            self.status = "pass" if self.max_violation <= self.tolerance else "fail"
        return self


@dataclass
class VerifyReport:
    seed: int
    quick: bool
    perturbed: bool
    checks: list = field(default_factory=list)
    seconds: float = 0.0

    @property
    def ok(self) -> bool:
        return all(c.status != "fail" for c in self.checks)

    def by_name(self) -> dict:
        return {c.name: c for c in self.checks}

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "seed": self.seed,
            "quick": self.quick,
            "perturb_monotonicity": self.perturbed,
            "ok": self.ok,
            "checks": [asdict(c) for c in self.checks],
        }


# ------------------------------------------------------------------ instances


def random_b_instance(rng, n_lo=5, n_hi=10_000):
    """power-law-b model and delta with turning index roughly log-uniform in [n_lo, n_hi]."""
    C = float(rng.uniform(0.05, 1.0))
    beta = float(rng.uniform(0.2, 1.9))
    target = int(round(math.exp(rng.uniform(math.log(n_lo), math.log(n_hi)))))
    delta = C * (target + 0.5) ** (-beta)
    return ParameterModel.power_law_b(C, beta), delta


def random_a_instance(rng, n_lo=5, n_hi=10_000):
    depth = int(rng.integers(0, 3))
    if depth == 0:
        f = MonotoneF("power", alpha=float(rng.uniform(0.5, 2.0)))
    else:
        f = MonotoneF("iterated-log", depth=depth)
    target = int(round(math.exp(rng.uniform(math.log(n_lo), math.log(n_hi)))))
    delta = 2.0 * float(f(math.log(target + 1.5)))
    return ParameterModel.log_law_a(f=f), delta


def perturbed_model(model: ParameterModel, N: int, drop: float = 4.0) -> ParameterModel:
    """Copy of a b-case model with b_{N-3} lowered, breaking monotonicity."""
    n = np.arange(1, N + 11)
    b = model.b(n).copy()
    b[N - 4] -= drop
    return ParameterModel.custom((), b, a_tail=1.0, b_tail="power")


def _rel_excess(value, bound):
    """max(0, value - bound) / |bound|, elementwise."""
    return np.maximum(0.0, value - bound) / np.maximum(np.abs(bound), 1e-300)


# ------------------------------------------------------------------ discrete


def _discrete_checks(model, delta, res, tol, perturb=False):
    x = 2.0 - delta
    N = turning_index(model, delta=delta)
    if perturb:
        model = perturbed_model(model, N)
    ps = psi_sequence(model, delta=delta, N=N, validate=not perturb)
    psi = ps.psi
    n = np.arange(len(psi))
    # psi_{n+1} >= psi_n and psi_0 = 1
    v = np.max(np.maximum(0.0, psi[:-1] - psi[1:]) / psi[:-1], initial=0.0)
    res["psi_monotone"].update(float(max(v, abs(psi[0] - 1.0))), len(psi))
    res["psi_growth"].update(float(np.max(_rel_excess(psi, n + 1.0))), len(psi))
    g = ps.gamma
    res["w_bound"].update(float(np.max(_rel_excess(ps.W, np.exp(g[1:len(ps.W) + 1])), initial=0.0)),
                          len(ps.W))
    if perturb or N < 2:
        return
    # sandwich against an independent run of the three-term recursion
    xs = abs(x) if model.case == "a" else x
    seq = p_sequence(model, xs, N)
    lp = seq.log_abs()[: N + 1]
    G = np.concatenate([[0.0], np.cumsum(g[1: N + 1])])
    k = np.arange(1, N)  # 1 <= n < N
    lo_v = np.maximum(0.0, G[k] - lp[k])
    hi_v = np.maximum(0.0, lp[k] - G[k] - np.log(k + 1.0))
    res["p_sandwich"].update(float(np.max(np.maximum(lo_v, hi_v))), len(k))
    a = model.a(k)
    log_eta = np.logaddexp(2.0 * lp[k - 1], 2.0 * (np.log(a) + lp[k]))
    if model.case == "b":
        lower = 2.0 * G[k]
        upper = math.log(2.0) + 2.0 * np.log(k + 1.0) + 2.0 * G[k]
    else:
        lower = np.logaddexp(2.0 * G[k - 1], 2.0 * (np.log(a) + G[k]))
        upper = np.logaddexp(2.0 * (np.log(k) + G[k - 1]),
                             2.0 * (np.log(a) + np.log(k + 1.0) + G[k]))
    v = np.maximum(np.maximum(0.0, lower - log_eta), np.maximum(0.0, log_eta - upper))
    res["eta_sandwich"].update(float(np.max(v)), len(k))


def _chain_checks(model, delta, res, span):
    chain = elliptic_norm_bound(model, delta=delta, n_to=None if span is None else
                                turning_index(model, delta=delta) + 2 + span)
    res["kooman_chain"].update(max(0.0, chain.max_slack_violation), len(chain.n))
    tr = phi_trajectory(model, delta=delta)
    res["phi_ratio"].update(max(0.0, tr.max_violation()), len(tr.ratio))
    res["phi_imaginary_part"].update(float(np.max(tr.im_check)), len(tr.im_check))
    res["phi_rate"].update(float(np.max(np.maximum(0.0, tr.radius - tr.rate - 1e-15))), len(tr.rate))


# ------------------------------------------------------------------ continuum


def random_potential(rng):
    C0 = float(rng.uniform(0.5, 2.0))
    beta = float(rng.uniform(0.3, 1.9))
    x0 = float(rng.uniform(1.0, 3.0))
    pot = PotentialModel.power_law(C0, beta, x0)
    target = float(rng.uniform(2.5, 25.0))
    E = float(pot.V(target))
    return pot, E


def _continuum_checks(pot, E, res, tol, span=200.0):
    N = pot.V_inv(E)
    tr = continuum.shoot(pot, E, N + 1.0)
    for c in continuum.monotone_checks(pot, E, tr, tol=tol):
        if not c.skipped:
            res[c.name].update(c.max_violation, c.instances)
    mb = continuum.modulus_bound(pot, E)
    res["modulus_integral"].update(mb.closed_gap)
    ys = np.linspace(N + 1.0, N + 1.0 + span, 41)[1:]
    ln = continuum.fundamental_log_norms(pot, E, N + 1.0, ys)
    res["continuum_transfer_norm"].update(float(np.max(np.maximum(0.0, ln - mb.log_bound))), len(ys))
    if mb.reference_valid:
        res["continuum_transfer_reference"].update(
            float(np.max(np.maximum(0.0, ln - mb.log_bound_reference))), len(ys))


# ------------------------------------------------------------------ exact


def _binom_half(ell: int) -> Fraction:
    out = Fraction(1)
    for i in range(ell):
        out *= Fraction(-1, 2) - i
        out /= i + 1
    return out


def _coefficient_check(res, L=64):
    table = asymptotics.arccosh_coeffs(L).coeffs
    bad = sum((2 * ell + 1) * c != _binom_half(ell) / 4**ell for ell, c in enumerate(table))
    res["coefficient_identity"].update(float(bad), len(table))


def _edge_sum_check(res, Ns):
    for f in (MonotoneF("power", 1.0), MonotoneF("power", 0.5), MonotoneF("iterated-log", depth=2)):
        for N in Ns:
            r = asymptotics.log_gap_sum_ratio(f, N)
            res["edge_sum_lower_bound"].update(max(0.0, (r.lower_bound - r.S_N) / r.lower_bound))


# ------------------------------------------------------------------ driver

TOLERANCES = {
    "psi_monotone": 1e-10,
    "psi_growth": 1e-10,
    "w_bound": 1e-10,
    "p_sandwich": 1e-10,
    "eta_sandwich": 1e-10,
    "kooman_chain": 1e-10,
    "phi_ratio": 1e-12,
    "phi_imaginary_part": 1e-12,
    "phi_rate": 0.0,
    "continuum_growth": 1e-8,
    "continuum_psi_monotone": 1e-8,
    "continuum_w_bound": 1e-8,
    "continuum_sandwich": 1e-8,
    "modulus_integral": 1e-8,
    "continuum_transfer_norm": 0.0,
    "continuum_transfer_reference": 0.0,
    "coefficient_identity": 0.0,
    "edge_sum_lower_bound": 1e-12,
}


def run_verify(seed: int = 0, quick: bool = False, perturb_monotonicity: bool = False,
               suites=("discrete", "chain", "continuum", "exact")) -> VerifyReport:
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    res = {k: CheckResult(k, tolerance=v) for k, v in TOLERANCES.items()}
    n_b, n_a, n_chain, n_cont = (20, 10, 8, 4) if quick else (200, 100, 50, 20)
    span = 2_000 if quick else 10_000
    if "discrete" in suites:
        for _ in range(n_b):
            model, delta = random_b_instance(rng)
            _discrete_checks(model, delta, res, 1e-10, perturb=perturb_monotonicity)
        for _ in range(n_a):
            model, delta = random_a_instance(rng)
            _discrete_checks(model, delta, res, 1e-10)
    if "chain" in suites:
        for i in range(n_chain):
            if i % 2 == 0:
                model, delta = random_b_instance(rng, 5, 2_000)
            else:
                model, delta = random_a_instance(rng, 5, 2_000)
            _chain_checks(model, delta, res, span)
    if "continuum" in suites:
        for _ in range(n_cont):
            pot, E = random_potential(rng)
            _continuum_checks(pot, E, res, 1e-8)
    if "exact" in suites:
        _coefficient_check(res)
        _edge_sum_check(res, (10**3, 10**4) if quick else (10**3, 10**4, 10**5, 10**6))
    checks = [c.finish() for c in res.values()]
    return VerifyReport(seed, quick, perturb_monotonicity, checks, time.perf_counter() - t0)
