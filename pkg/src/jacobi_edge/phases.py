"""Turning indices and the hyperbolic / elliptic phase sequences.

Everything is expressed through the deficit

    d_n = 2 - (x - b_n) / a_n,

so that the recursion is hyperbolic when d_n <= 0 (cosh gamma_n = 1 - d_n/2)
and elliptic when 0 < d_n < 4 (cos kappa_n = 1 - d_n/2). Computing d_n from
delta = 2 - |x| and the small parameters directly avoids the cancellation in
x - b_n - 2 near the edge, and the half-angle forms

    gamma = 2 asinh(sqrt(-d)/2),   kappa = 2 asin(sqrt(d)/2)

are accurate down to d = 0.
"""

from __future__ import annotations

import math

import numpy as np

from .params import ModelError, ParameterModel, validate_monotone

N_MAX = 10**15


class NoTurningPoint(ModelError):
    """x lies outside the elliptic window, or N overflows."""


def edge_coords(x=None, delta=None) -> tuple[float, float]:
    """Return (x, delta) with delta = 2 - |x|, from either one.

    Passing delta keeps full relative precision for tiny distances to the edge.
    """
    if delta is None:
        if x is None:
            raise ValueError("need x or delta")
        x = float(x)
        delta = 2.0 - abs(x)
    else:
        delta = float(delta)
        if x is None:
            x = 2.0 - delta
        else:
            x = float(x)
            if abs((2.0 - abs(x)) - delta) > 1e-12 * max(1.0, delta) and abs(2.0 - abs(x) - delta) > 4e-16:
                raise ValueError("x and delta disagree")
    return x, delta


_checked: dict = {}


def require_monotone(model: ParameterModel) -> None:
    """Custom models must pass validation before phases are formed."""
    if model.kind != "custom":
        return
    key = id(model)
    if _checked.get(key) is model:
        return
    if model.case == "mixed":
        raise ModelError("mixed a/b variation is not supported")
    horizon = max(len(model.a_values), len(model.b_values)) + 16
    rep = validate_monotone(model, horizon)
    if not (rep.monotone_a and rep.monotone_b):
        raise ModelError("custom model fails monotonicity validation")
    _checked[key] = model


def deficit(model: ParameterModel, n, x: float, delta: float):
    """d_n for indices n (array); b-case uses x, a-case uses |x|."""
    n = np.asarray(n)
    case = model.case
    if case == "b":
        base = delta if x >= 0 else 4.0 - delta
        return base + model.b(n)
    if case == "a":
        a = model.a(n)
        return (delta - 2.0 * model.one_minus_a(n)) / a
    raise ModelError("mixed a/b variation is not supported")


def gamma_from_deficit(d):
    d = np.asarray(d, dtype=float)
    return 2.0 * np.arcsinh(0.5 * np.sqrt(np.maximum(-d, 0.0)))


def kappa_from_deficit(d):
    d = np.asarray(d, dtype=float)
    return 2.0 * np.arcsin(np.minimum(0.5 * np.sqrt(np.maximum(d, 0.0)), 1.0))


def kappa_infinity(delta: float) -> float:
    """arccos(1 - delta/2), the limiting elliptic phase."""
    return 2.0 * math.asin(min(0.5 * math.sqrt(delta), 1.0))


def _d1(model, n, x, delta) -> float:
    return float(deficit(model, np.array([n]), x, delta)[0])


def turning_index(model: ParameterModel, x=None, delta=None) -> int:
    """Largest n with d_n <= 0 (the hyperbolic side owns the tie), or 0."""
    x, delta = edge_coords(x, delta)
    if not 0 < delta < 2:
        raise NoTurningPoint(f"x={x!r} is outside (-2, 2) minus 0")
    require_monotone(model)
    if _d1(model, 1, x, delta) > 0:
        return 0
    guess = None
    if model.kind == "power-law-b":
        guess = (delta / model.C) ** (-1.0 / model.beta)
    elif model.kind == "log-law-a":
        t = model.f.inverse(delta / 2.0)
        guess = math.exp(t) - 1.0 if t < 700 else math.inf
    if guess is not None:
        if not guess < N_MAX:
            raise NoTurningPoint(f"turning index overflows at delta={delta!r}")
        n = max(1, int(math.floor(guess)))
        while n > 1 and _d1(model, n, x, delta) > 0:
            n -= 1
        while _d1(model, n + 1, x, delta) <= 0:
            n += 1
        return n
    lo = 1
    hi = 2
    while _d1(model, hi, x, delta) <= 0:
        lo, hi = hi, 2 * hi
        if hi > N_MAX:
            raise NoTurningPoint(f"turning index overflows at delta={delta!r}")
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if _d1(model, mid, x, delta) <= 0:
            lo = mid
        else:
            hi = mid
    return lo


def e_of_y(y):
    """1/sin(y) - 1/y, increasing on (0, pi); series near 0 avoids cancellation."""
    y = np.asarray(y, dtype=float)
    if np.any((y <= 0) | (y >= math.pi)):
        raise ValueError("e(y) needs 0 < y < pi")
    small = y < 1e-3
    out = np.empty_like(y)
    ys = y[small]
    out[small] = ys / 6.0 + 7.0 * ys**3 / 360.0 + 31.0 * ys**5 / 15120.0
    yl = y[~small]
    out[~small] = 1.0 / np.sin(yl) - 1.0 / yl
    return out if out.ndim else float(out)


def log_product_bound(kappa_first: float, kappa_inf: float, case: str = "b") -> float:
    """log of the telescoped bound on prod_j (1 + r_j) over the elliptic tail.

    b-case: r_j = (k_{j+1}-k_j)/sin k_j; a-case: r_j = (k_{j+1}-k_j)/(sin 2k_j / 2).
    With y = k (resp. 2k), 1/sin y <= 1/y + e(y_inf) and (1 + dy/y) = y'/y, so
    the product is at most (k_inf/k_first) exp((y_inf - y_first) e(y_inf)).
    """
    if kappa_first <= 0:
        return math.inf
    if kappa_inf <= kappa_first:
        return 0.0
    scale = 1.0 if case == "b" else 2.0
    y_inf = scale * kappa_inf
    y_first = scale * kappa_first
    if y_inf >= math.pi:
        return math.inf
    return math.log(kappa_inf / kappa_first) + (y_inf - y_first) * float(e_of_y(y_inf))
