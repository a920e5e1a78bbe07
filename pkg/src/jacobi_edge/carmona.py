"""Weight estimates from the Carmona densities dx / (pi (a_n^2 p_n^2 + p_{n-1}^2)).

These densities converge weakly to the spectral measure, so a smooth bump
integrated against them estimates the weight near its center. All integrands
are handled as logarithms.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from . import asymptotics
from .params import ParameterModel
from .phases import NoTurningPoint, edge_coords, turning_index
from .quadrature import integrate, log_integrate
from .recurrence import log_eta_vec, log_eta_window
from .transfer import lower_edge_envelope
from .wkb import EdgeProfile, envelope, g_sum

LOG_PI = math.log(math.pi)
_BUMP_LOG_NORM = math.log(35.0 / 32.0)
G_SOURCE_MAX_N = 10**6


def carmona_density(model: ParameterModel, x, n: int):
    """log of 1 / (pi eta_n(x))."""
    out = -LOG_PI - log_eta_vec(model, x, n)
    return float(out[0]) if np.ndim(x) == 0 else out


def bump_log(x, x0: float, width: float):
    """log of the unit-mass bump (35/32w)(1 - t^2)^3, t = (x - x0)/w."""
    t = (np.asarray(x, dtype=float) - x0) / width
    with np.errstate(divide="ignore", invalid="ignore"):
        inner = np.where(np.abs(t) < 1.0, 3.0 * np.log1p(-t * t), -np.inf)
    return inner + _BUMP_LOG_NORM - math.log(width)


@dataclass(frozen=True)
class CarmonaEstimate:
    x0: float
    n: int
    bump_width: float
    value: float  # log w estimate
    method: str
    error: float = 0.0  # log-space quadrature error estimate

    def to_dict(self) -> dict:
        return asdict(self)


def _turning_or_zero(model, x):
    try:
        return turning_index(model, x=x)
    except NoTurningPoint:
        return 0


def default_n(model: ParameterModel, x_lo: float, x_hi: float | None = None) -> int:
    """max(10 N, 1000) with N the largest turning index over [x_lo, x_hi]."""
    x_hi = x_lo if x_hi is None else x_hi
    N = max(_turning_or_zero(model, x_lo), _turning_or_zero(model, x_hi))
    return max(10 * N, 1000)


def weight_estimate(model: ParameterModel, x0: float, bump_width: float = 0.1, n: int | None = None,
                    method: str = "bump", atol_log: float = 1e-3) -> CarmonaEstimate:
    """log w(x0) estimated from the n-th Carmona density.

    ``bump``: smooth bump integral (the mode licensed by weak convergence);
    ``pointwise``: the density at x0;
    ``n-averaged``: mean of the densities at x0 over m = n..2n.
    """
    lo, hi = x0 - bump_width, x0 + bump_width
    if method == "bump" and not (-2.0 < lo and hi < 2.0):
        raise ValueError("bump must lie inside (-2, 2)")
    if n is None:
        n = default_n(model, lo, hi) if method == "bump" else default_n(model, x0)
    if method == "pointwise":
        return CarmonaEstimate(x0, n, 0.0, carmona_density(model, x0, n), method)
    if method == "n-averaged":
        le = log_eta_window(model, x0, n, 2 * n)
        m = float(np.max(-le))
        val = -LOG_PI + m + math.log(float(np.mean(np.exp(-le - m))))
        return CarmonaEstimate(x0, n, 0.0, val, method)
    if method != "bump":
        raise ValueError(f"unknown method {method!r}")
    dk = abs(math.acos(max(-1.0, lo / 2.0)) - math.acos(min(1.0, hi / 2.0)))
    panels = max(8, int(math.ceil(2.0 * n * dk / math.pi)) + 1)

    def logf(x):
        return bump_log(x, x0, bump_width) - LOG_PI - log_eta_vec(model, x, n)

    res = log_integrate(logf, lo, hi, atol_log=atol_log, panels=panels)
    return CarmonaEstimate(x0, n, bump_width, res.value, method, res.error)


def choose_width(model: ParameterModel, x: float, delta: float) -> float:
    """Bump half-width small enough that g moves by at most ~1/4 across it."""
    eps = delta / 20.0
    try:
        g1 = g_sum(model, delta=delta - eps, x=None) if x >= 0 else 0.0
        g2 = g_sum(model, delta=delta + eps, x=None) if x >= 0 else 0.0
        slope = abs(g1 - g2) / (2.0 * eps)
    except NoTurningPoint:
        slope = 0.0
    w = min(delta / 4.0, 0.1)
    if slope > 0:
        w = min(w, 0.25 / slope)
    return w


def edge_profile(model: ParameterModel, x=None, *, delta=None, n: int | None = None,
                 width: float | None = None, carmona: bool = True) -> EdgeProfile:
    """g, h, a Carmona estimate and (power-law-b) the series Q at one point."""
    x, delta = edge_coords(x, delta)
    kind = model.kind
    q = None
    if kind == "power-law-b" and x > 0 and 1.0 / model.beta - 0.5 > 0:
        q = asymptotics.q_series(model.beta, model.C, delta).value
    if model.case == "b" and x < 0:
        env = lower_edge_envelope(model, x)
        g = -0.5 * (env.log_lower + env.log_upper) / 2.0
        h = 0.5 * (env.log_upper - env.log_lower) / 2.0
        N = 0
    else:
        ev = envelope(model, x, delta=delta)
        N = int(ev.N)
        h = ev.h
        g = g_sum(model, x, delta=delta)
    log_w = None
    if carmona:
        # the a-case weight is even, so estimate at |x|
        xc = abs(x) if model.case == "a" else x
        w = width if width is not None else choose_width(model, xc, delta)
        log_w = weight_estimate(model, xc, w, n=n).value
    return EdgeProfile(kind, x, delta, N, g, h, log_w, q)


# ------------------------------------------------------------------ Szego


@dataclass
class SzegoDiagnostic:
    """Truncated integrals of -log w (4 - x^2)^{-1/2} and -log w (4 - x^2)^{1/2}
    over [2 - delta_max, 2 - delta_cut], with their fitted power of delta_cut.

    An exponent p < 0 means power divergence, p ~ 0 logarithmic divergence,
    p > 0 convergence as delta_cut -> 0.
    """

    delta_cut: list
    szego: list
    quasi: list
    exponent_szego: float
    exponent_quasi: float
    szego_status: str
    quasi_status: str
    classification: str
    source: str

    def to_dict(self) -> dict:
        return asdict(self)


def _status(p: float, tol: float = 0.1) -> str:
    if p < -tol:
        return "diverges"
    if p <= tol:
        return "borderline"
    return "converges"


def _fit_exponent(deltas, J) -> float:
    d = np.asarray(deltas, dtype=float)
    J = np.asarray(J, dtype=float)
    inc = np.diff(J)
    if len(inc) < 2 or np.any(inc <= 0):
        raise ValueError("insufficient grid for the exponent fit")
    return float(math.log(inc[-1] / inc[-2]) / math.log(d[-1] / d[-2]))


def szego_diagnostic(model: ParameterModel, delta_grid, delta_max: float | None = None,
                     source: str = "auto") -> SzegoDiagnostic:
    """Divergence diagnostics at the upper edge using Q ~ g (or the series Q)."""
    grid = np.asarray(sorted(set(float(d) for d in delta_grid), reverse=True))
    if len(grid) < 3:
        raise ValueError("insufficient grid for the exponent fit (need 3 cut-offs)")
    if delta_max is None:
        delta_max = float(grid[0])
    if source == "auto":
        use_series = model.kind == "power-law-b" and 1.0 / model.beta - 0.5 > 0
        source = "series" if use_series else "g"
    if source == "series":
        def Q(d):
            return np.array([asymptotics.q_series(model.beta, model.C, float(v)).value
                             for v in np.atleast_1d(d)])

        def piece(lo, hi, sign):
            def f(s):
                d = np.exp(s)
                return 2.0 * Q(d) * (d * (4.0 - d)) ** (sign * 0.5) * d
            return integrate(f, math.log(lo), math.log(hi), rtol=1e-10, panels=2).value
    elif source == "g":
        # each piece sums g at 41 cut-offs, so cap the work up front
        if turning_index(model, delta=float(grid[-1])) > G_SOURCE_MAX_N:
            raise ValueError(f"turning index at delta={grid[-1]!r} exceeds {G_SOURCE_MAX_N} "
                             "for the direct g source")

        def piece(lo, hi, sign):
            s = np.linspace(math.log(lo), math.log(hi), 41)
            d = np.exp(s)
            vals = np.array([2.0 * g_sum(model, delta=float(v)) for v in d])
            return float(np.trapezoid(vals * (d * (4.0 - d)) ** (sign * 0.5) * d, s))
    else:
        raise ValueError(f"unknown source {source!r}")
    cuts = [c for c in grid if c < delta_max]
    if len(cuts) < 3:
        raise ValueError("insufficient grid for the exponent fit")
    Js, Jq = [], []
    acc_s = acc_q = 0.0
    upper = delta_max
    for c in cuts:
        acc_s += piece(c, upper, -1)
        acc_q += piece(c, upper, +1)
        Js.append(acc_s)
        Jq.append(acc_q)
        upper = c
    ps = _fit_exponent(cuts, Js)
    pq = _fit_exponent(cuts, Jq)
    ss, qs = _status(ps), _status(pq)
    if qs == "diverges":
        label = "quasi-Szegő fails"
    elif qs == "borderline":
        label = "quasi-Szegő borderline"
    elif ss != "converges":
        label = "non-Szegő, quasi-Szegő holds"
    else:
        label = "Szegő holds"
    return SzegoDiagnostic([float(c) for c in cuts], Js, Jq, ps, pq, ss, qs, label, source)
