"""Turning points, the growth exponent g and the error envelope h.

For x close to the edge the recursion grows like exp(gamma_1 + ... + gamma_N)
up to the turning index N and then oscillates. The weight satisfies

    | -1/2 log w(x) - g(x) | <= h(x),   g = sum_{j<=N} gamma_j,

with h assembled here from explicitly computed factors (no asymptotic
constants). The same holds for half-line Schrodinger operators with g the
integral of sqrt(V - E) over [0, N(E)].
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .params import ModelError, ParameterModel, PotentialModel
from .phases import (
    NoTurningPoint,
    deficit,
    e_of_y,  # noqa: F401  (re-exported)
    edge_coords,
    gamma_from_deficit,
    kappa_from_deficit,
    kappa_infinity,
    log_product_bound,
    require_monotone,
    turning_index,
)
from .quadrature import integrate
from .transfer import step_matrix, y_norms

HALF_LOG_PI = 0.5 * math.log(math.pi)
_CHUNK = 1 << 20


@dataclass(frozen=True)
class TurningData:
    model: ParameterModel
    x: float
    delta: float
    N: int
    kappa_infty: float

    def _abs_x(self):
        return abs(self.x) if self.model.case == "a" else self.x

    def deficit(self, n):
        return deficit(self.model, np.asarray(n), self._abs_x(), self.delta)

    def gamma(self, n):
        n = np.asarray(n)
        if np.any(n > self.N):
            raise ValueError("gamma_n is defined only up to the turning index")
        return gamma_from_deficit(self.deficit(n))

    def kappa(self, n):
        n = np.asarray(n)
        if np.any(n <= self.N):
            raise ValueError("kappa_n is defined only past the turning index")
        return kappa_from_deficit(self.deficit(n))


@dataclass(frozen=True)
class ContinuumTurning:
    potential: PotentialModel
    E: float
    N: float
    kappa_infty: float

    @property
    def delta(self) -> float:
        return self.E

    def gamma(self, x):
        return np.sqrt(np.maximum(self.potential.V(x) - self.E, 0.0))

    def kappa(self, x):
        return np.sqrt(np.maximum(self.E - self.potential.V(x), 0.0))


def _turning(model, x, delta) -> TurningData:
    x, delta = edge_coords(x, delta)
    N = turning_index(model, x=x, delta=delta)
    return TurningData(model, x, delta, N, kappa_infinity(delta))


def turning_point(model, x=None, *, delta=None):
    """Turning data; raises NoTurningPoint when there is no hyperbolic region."""
    if isinstance(model, PotentialModel):
        E = float(x if x is not None else delta)
        if not E > 0:
            raise ModelError("energy must be positive")
        N = model.V_inv(E)
        if N <= 0:
            raise NoTurningPoint(f"E={E!r} is above V(0)")
        return ContinuumTurning(model, E, N, math.sqrt(E))
    td = _turning(model, x, delta)
    if td.N == 0:
        raise NoTurningPoint(f"no hyperbolic region at x={td.x!r}")
    return td


def gamma_partial_sums(td: TurningData, n_max: int | None = None) -> np.ndarray:
    """G_n = gamma_1 + ... + gamma_n for n = 0..n_max (n_max <= N)."""
    n_max = td.N if n_max is None else n_max
    g = td.gamma(np.arange(1, n_max + 1))
    return np.concatenate([[0.0], np.cumsum(g)])


def _gamma_total(td: TurningData, upto: int) -> float:
    parts = []
    for start in range(1, upto + 1, _CHUNK):
        n = np.arange(start, min(upto, start + _CHUNK - 1) + 1)
        parts.append(float(np.sum(gamma_from_deficit(td.deficit(n)))))
    return math.fsum(parts)


def g_sum(model, x=None, *, delta=None, rtol: float = 1e-11) -> float:
    """g = sum of gamma_j up to N(x) (discrete) or int_0^N sqrt(V - E) (continuum).

    Returns 0 when there is no hyperbolic region.
    """
    if isinstance(model, PotentialModel):
        return continuum_g(model, float(x if x is not None else delta), rtol=rtol)
    td = _turning(model, x, delta)
    return _gamma_total(td, td.N)


def continuum_g(potential: PotentialModel, E: float, rtol: float = 1e-11) -> float:
    """int_0^{N(E)} sqrt(V(x) - E) dx by Gauss-Kronrod with endpoint substitutions.

    Near x = N the integrand vanishes like sqrt(N - x); x = N - t^2 makes it
    smooth. For an unshifted power law V ~ x^{-beta} at 0 the substitution
    x = (N/2) s^m, m = 2/(2 - beta), removes the integrable singularity.
    """
    N = potential.V_inv(E)
    if N <= 0:
        return 0.0
    V = potential.V
    mid = 0.5 * N
    T = math.sqrt(N - mid)

    def upper(t):
        xx = N - t * t
        return np.sqrt(np.maximum(V(xx) - E, 0.0)) * 2.0 * t

    right = integrate(upper, 0.0, T, rtol=rtol, panels=4).value
    if potential.is_power and potential.x0 == 0:
        m = 2.0 / (2.0 - potential.beta)

        def lower(s):
            xx = mid * s**m
            # sqrt(C0 x^-beta - E) * dx/ds written without the cancelling powers
            core = np.sqrt(np.maximum(potential.C0 - E * xx**potential.beta, 0.0))
            return core * mid ** (1.0 - 0.5 * potential.beta) * m

        left = integrate(lower, 0.0, 1.0, rtol=rtol, panels=4).value
    else:
        left = integrate(lambda xx: np.sqrt(np.maximum(V(xx) - E, 0.0)), 0.0, mid,
                         rtol=rtol, panels=4).value
    return left + right


# ------------------------------------------------------------------ envelope


@dataclass
class Envelope:
    """h and the factors it is built from.

    ``C_env`` re-expresses h in the normalized form
    e^h = C_env N Delta^{-1} delta^{1/2} (b-case), C_env N Delta^{-1} (a-case)
    or C_env N (V(N) - V(N+1))^{-1} E^{1/2} (continuum).
    """

    h: float
    N: float
    delta: float
    Delta: float | None
    C_env: float | None
    factors: dict = field(default_factory=dict)


def _discrete_envelope(model: ParameterModel, x, delta) -> Envelope:
    td = _turning(model, x, delta)
    case = model.case
    if case == "b" and td.x < 0:
        raise ValueError("use the lower-edge envelope for x < 0 in the b-case")
    xs = abs(td.x) if case == "a" else td.x
    N = td.N
    k_inf = td.kappa_infty
    if N == 0:
        k1 = float(td.kappa([1])[0])
        a1 = float(model.a(1))
        _, yinv = y_norms(k1, a1)
        log_prod = log_product_bound(k1, k_inf, case)
        log_B0 = math.log(2.0) + math.log(float(yinv)) + log_prod
        h = log_B0 + HALF_LOG_PI - math.log(a1)
        return Envelope(h, 0, td.delta, None, None,
                        {"log_B": log_B0, "kappa_first": k1, "log_product": log_prod})
    n2 = N + 2
    k2 = float(td.kappa([n2])[0])
    a2 = float(model.a(n2))
    hop = step_matrix(model, xs, N).norm() * step_matrix(model, xs, N + 1).norm()
    _, yinv = y_norms(k2, a2)
    log_prod = log_product_bound(k2, k_inf, case)
    log_B = math.log(hop) + math.log(2.0) + math.log(float(yinv)) + log_prod
    gamma_N = float(td.gamma([N])[0])
    h = math.log(N) + log_B - math.log(a2) + 0.5 * math.log(2.0 * math.pi) + gamma_N
    if case == "b":
        b = model.b(np.array([N + 1, N + 2]))
        Delta = float(b[1] - b[0])
        norm = N * td.delta**0.5
    else:
        f = model.one_minus_a(np.array([N + 1, N + 2]))
        Delta = float(f[0] - f[1])
        norm = N
    if Delta <= 0:
        h = math.inf
        C_env = math.inf
    else:
        C_env = math.exp(h) * Delta / norm if h < 700 else math.inf
    factors = {
        "log_hop": math.log(hop),
        "log_y_inverse": math.log(float(yinv)),
        "log_product": log_prod,
        "gamma_N": gamma_N,
        "kappa_N2": k2,
        "log_B": log_B,
    }
    return Envelope(h, N, td.delta, Delta, C_env, factors)


def continuum_envelope(potential: PotentialModel, E: float) -> Envelope:
    V0 = potential.V0
    if not math.isfinite(V0):
        return Envelope(math.inf, potential.V_inv(E), E, None, None, {"reason": "V(0) infinite"})
    N = potential.V_inv(E)
    R = 1.0 + abs(E) + V0
    sE = math.sqrt(E)
    if N <= 0:
        k0 = math.sqrt(max(E - V0, 0.0))
        if k0 == 0:
            return Envelope(math.inf, 0.0, E, None, None, {})
        log_BT = math.log(max(1.0, sE) * sE / (k0 * min(1.0, k0)))
        return Envelope(log_BT + HALF_LOG_PI, 0.0, E, None, None, {"log_BT": log_BT})
    k1 = math.sqrt(max(E - float(potential.V(N + 1.0)), 0.0))
    log_BT = math.log(max(1.0, sE) * sE / (k1 * min(1.0, k1)))
    gamma0 = math.sqrt(max(V0 - E, 0.0))
    h = 0.5 * math.log(N * N + 1.0) + gamma0 + R + log_BT + HALF_LOG_PI
    Delta = k1 * k1
    C_env = math.exp(h) * Delta / (N * sE) if h < 700 else math.inf
    return Envelope(h, N, E, Delta, C_env,
                    {"log_BT": log_BT, "gamma0": gamma0, "hop_rate": R, "kappa_N1": k1})


def envelope(model, x=None, *, delta=None) -> Envelope:
    if isinstance(model, PotentialModel):
        return continuum_envelope(model, float(x if x is not None else delta))
    require_monotone(model)
    return _discrete_envelope(model, x, delta)


def h_envelope(model, x=None, *, delta=None) -> float:
    return envelope(model, x, delta=delta).h


# ------------------------------------------------------------------ output row

CSV_FIELDS = ("kind", "x", "delta", "N", "g", "h", "log_w_carmona", "q_series", "pass", "error")


@dataclass
class EdgeProfile:
    kind: str
    x: float
    delta: float
    N: float
    g: float
    h: float
    log_w_carmona: float | None = None
    q_series: float | None = None
    error: str = ""

    @property
    def q_estimate(self) -> float | None:
        if self.log_w_carmona is None:
            return None
        return -0.5 * self.log_w_carmona

    @property
    def passed(self) -> bool | None:
        q = self.q_estimate
        if q is None or self.error:
            return None
        return abs(q - self.g) <= self.h

    def row(self) -> dict:
        p = self.passed
        return {
            "kind": self.kind,
            "x": self.x,
            "delta": self.delta,
            "N": self.N,
            "g": self.g,
            "h": self.h,
            "log_w_carmona": self.log_w_carmona,
            "q_series": self.q_series,
            "pass": None if p is None else bool(p),
            "error": self.error,
        }
