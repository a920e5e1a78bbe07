"""2x2 transfer matrices and elliptic-region norm bounds.

The one-step matrix

    A_n(x) = (1/a_n) [[x - b_n, -1], [a_n^2, 0]],   det A_n = 1,

maps (p_{n-1}, a_{n-1} p_{n-2}) to (p_n, a_n p_{n-1}). Past the turning point
A_n = Y_n V_n Y_n^{-1} with V = diag(e^{ik}, e^{-ik}) and
Y(k, a) = [[1, 1], [a e^{-ik}, a e^{ik}]], so a product of slowly varying A's
telescopes into a product of near-identity factors Y_{j+1}^{-1} Y_j.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .params import ParameterModel
from .phases import (
    deficit,
    e_of_y,
    edge_coords,
    kappa_from_deficit,
    kappa_infinity,
    turning_index,
)


def singular_values(a, b, c, d):
    """Singular values (largest, smallest) of [[a, b], [c, d]], vectorized.

    sigma^2 = (S +- disc) / 2 with S the squared Frobenius norm. The
    discriminant is taken from the row Gram matrix as a hypot, which avoids
    the cancellation in sqrt(S^2 - 4 |det|^2) when the singular values are
    close; the small one is recovered as |det| / sigma_max.
    """
    a, b, c, d = (np.asarray(v) for v in (a, b, c, d))
    r1 = np.abs(a) ** 2 + np.abs(b) ** 2
    r2 = np.abs(c) ** 2 + np.abs(d) ** 2
    S = r1 + r2
    det = np.abs(a * d - b * c)
    disc = np.hypot(r1 - r2, 2.0 * np.abs(a * np.conj(c) + b * np.conj(d)))
    smax = np.sqrt(0.5 * (S + disc))
    with np.errstate(divide="ignore", invalid="ignore"):
        smin = np.where(smax > 0, det / smax, 0.0)
    return smax, smin


@dataclass(frozen=True)
class Mat2C:
    """[[a, b], [c, d]] with complex entries."""

    a: complex
    b: complex
    c: complex
    d: complex

    @classmethod
    def identity(cls) -> "Mat2C":
        return cls(1, 0, 0, 1)

    @classmethod
    def from_array(cls, m) -> "Mat2C":
        return cls(m[0][0], m[0][1], m[1][0], m[1][1])

    def to_array(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.c, self.d]], dtype=complex)

    def __matmul__(self, o: "Mat2C") -> "Mat2C":
        return Mat2C(self.a * o.a + self.b * o.c, self.a * o.b + self.b * o.d,
                     self.c * o.a + self.d * o.c, self.c * o.b + self.d * o.d)

    def scale(self, s) -> "Mat2C":
        return Mat2C(s * self.a, s * self.b, s * self.c, s * self.d)

    def det(self) -> complex:
        return self.a * self.d - self.b * self.c

    def trace(self) -> complex:
        return self.a + self.d

    def inv(self) -> "Mat2C":
        det = self.det()
        if det == 0:
            raise ZeroDivisionError("singular matrix")
        return Mat2C(self.d / det, -self.b / det, -self.c / det, self.a / det)

    def singular_values(self) -> tuple[float, float]:
        smax, smin = singular_values(self.a, self.b, self.c, self.d)
        return float(smax), float(smin)

    def norm(self) -> float:
        return self.singular_values()[0]

    def inv_norm(self) -> float:
        """||M^{-1}|| = 1/sigma_min."""
        smin = self.singular_values()[1]
        return math.inf if smin == 0 else 1.0 / smin

    def max_abs_diff(self, o: "Mat2C") -> float:
        return max(abs(self.a - o.a), abs(self.b - o.b), abs(self.c - o.c), abs(self.d - o.d))


def step_matrix(model: ParameterModel, x: float, n: int) -> Mat2C:
    a = float(model.a(n))
    b = float(model.b(n))
    return Mat2C((x - b) / a, -1.0 / a, a, 0.0)


def kooman_factors(kappa: float, a: float = 1.0) -> tuple[Mat2C, Mat2C, Mat2C]:
    """(Y, V, Y^{-1}) with Y V Y^{-1} = [[2 cos k, -1/a], [a, 0]]."""
    if not 0 < kappa < math.pi:
        raise ValueError("kappa must lie in (0, pi)")
    em, ep = cmath.exp(-1j * kappa), cmath.exp(1j * kappa)
    Y = Mat2C(1.0, 1.0, a * em, a * ep)
    V = Mat2C(ep, 0.0, 0.0, em)
    s = 1.0 / (2j * math.sin(kappa))
    Yinv = Mat2C(s * ep, -s / a, -s * em, s / a)
    return Y, V, Yinv


def y_norms(kappa, a=1.0):
    """(||Y(k, a)||, ||Y(k, a)^{-1}||), vectorized; for a = 1 these are
    2 cos(k/2) and 1 / (2 sin(k/2))."""
    kappa = np.asarray(kappa, dtype=float)
    a = np.asarray(a, dtype=float)
    em = np.exp(-1j * kappa)
    smax, smin = singular_values(1.0 + 0 * kappa, 1.0 + 0 * kappa, a * em, a * np.conj(em))
    return smax, 1.0 / smin


def consecutive_norm(k_j, k_j1, a_j=1.0, a_j1=1.0):
    """Exact ||Y(k_{j+1}, a_{j+1})^{-1} Y(k_j, a_j)||, vectorized."""
    k_j, k_j1 = np.asarray(k_j, dtype=float), np.asarray(k_j1, dtype=float)
    r = np.asarray(a_j, dtype=float) / np.asarray(a_j1, dtype=float)
    s = 1.0 / (2.0 * np.sin(k_j1))
    ep1, em1 = np.exp(1j * k_j1), np.exp(-1j * k_j1)
    e0p, e0m = np.exp(1j * k_j), np.exp(-1j * k_j)
    # Y(k1)^{-1} = s/i [[e^{ik1}, -1], [-e^{-ik1}, 1]] (a-rows folded into r)
    m11 = s * (ep1 - r * e0m)
    m12 = s * (ep1 - r * e0p)
    m21 = s * (-em1 + r * e0m)
    m22 = s * (-em1 + r * e0p)
    smax, _ = singular_values(m11, m12, m21, m22)
    return smax


def consecutive_bound(k_j, k_j1, case: str = "b"):
    """Upper bound on ||Y_{j+1}^{-1} Y_j||.

    b-case: 1 + |e^{ik_{j+1}} - e^{ik_j}| / sin k_{j+1}.
    a-case: 1 + |sin(k_{j+1} - k_j)| / (sin k_{j+1} cos k_j).
    """
    k_j, k_j1 = np.asarray(k_j, dtype=float), np.asarray(k_j1, dtype=float)
    if case == "b":
        return 1.0 + 2.0 * np.abs(np.sin(0.5 * (k_j1 - k_j))) / np.sin(k_j1)
    return 1.0 + np.abs(np.sin(k_j1 - k_j)) / (np.sin(k_j1) * np.cos(k_j))


def consecutive_rate(k_j, k_j1, case: str = "b"):
    """The linearized rate |dk| / sin k_j (b) or |dk| / (sin 2k_j / 2) (a)."""
    k_j, k_j1 = np.asarray(k_j, dtype=float), np.asarray(k_j1, dtype=float)
    if case == "b":
        return np.abs(k_j1 - k_j) / np.sin(k_j)
    return np.abs(k_j1 - k_j) / (0.5 * np.sin(2.0 * k_j))


def log_closed_bound(kappa_from: float, kappa_inf: float, a_from: float = 1.0, case: str = "b") -> float:
    """log of 2/(a sin k_from) * (k_inf/k_from) * exp(y_inf e(y_inf)), y = k or 2k."""
    scale = 1.0 if case == "b" else 2.0
    y_inf = scale * kappa_inf
    if y_inf >= math.pi:
        return math.inf
    return (math.log(2.0) - math.log(a_from * math.sin(kappa_from))
            + math.log(kappa_inf / kappa_from) + y_inf * float(e_of_y(y_inf)))


@dataclass
class NormChain:
    """log ||T_n|| for T_n = A_n ... A_{n_from}, with three nested upper bounds.

    ``log_direct <= log_product <= log_lemma <= log_closed`` pointwise, where
    ``log_product`` uses exact consecutive factor norms and ``log_lemma`` the
    closed-form per-step bound.
    """

    n: np.ndarray
    kappa: np.ndarray
    log_direct: np.ndarray
    log_product: np.ndarray
    log_lemma: np.ndarray
    log_closed: float
    det_error: float

    @property
    def max_slack_violation(self) -> float:
        v1 = np.max(self.log_direct - self.log_product)
        v2 = np.max(self.log_product - self.log_lemma)
        v3 = np.max(self.log_lemma - self.log_closed)
        return float(max(v1, v2, v3))


def direct_log_norms(model: ParameterModel, x: float, n_from: int, n_to: int):
    """log ||A_n ... A_{n_from}|| for n = n_from..n_to, plus max |det - 1|."""
    n = np.arange(n_from, n_to + 1)
    a = model.a(n)
    b = model.b(n)
    t11, t12, t21, t22 = 1.0, 0.0, 0.0, 1.0
    log_scale = 0.0
    out = np.empty(len(n))
    det_err = 0.0
    for i in range(len(n)):
        ai = a[i]
        p = (x - b[i]) / ai
        q = -1.0 / ai
        t11, t12, t21, t22 = (p * t11 + q * t21, p * t12 + q * t22, ai * t11, ai * t12)
        m = max(abs(t11), abs(t12), abs(t21), abs(t22))
        if m > 16.0 or m < 0.0625:
            e = math.frexp(m)[1]
            t11, t12 = math.ldexp(t11, -e), math.ldexp(t12, -e)
            t21, t22 = math.ldexp(t21, -e), math.ldexp(t22, -e)
            log_scale += e * math.log(2.0)
        S = t11 * t11 + t12 * t12 + t21 * t21 + t22 * t22
        det = t11 * t22 - t12 * t21
        smax = math.sqrt(0.5 * (S + math.sqrt(max(S * S - 4.0 * det * det, 0.0))))
        out[i] = math.log(smax) + log_scale
        det_err = max(det_err, abs(det * math.exp(2.0 * log_scale) - 1.0)) if log_scale < 300 else det_err
    return n, out, det_err


def elliptic_norm_bound(model: ParameterModel, x=None, n_from: int = None, n_to: int = None,
                        delta=None, direct: bool = True) -> NormChain:
    """Norm chain for products starting at n_from > N(x) (x >= 0)."""
    x, delta = edge_coords(x, delta)
    case = model.case
    xs = abs(x) if case == "a" else x
    N = turning_index(model, delta=delta, x=x)
    if n_from is None:
        n_from = N + 2
    if n_from <= N:
        raise ValueError(f"n_from={n_from} is not past the turning index {N}")
    if n_to is None:
        n_to = n_from + 10_000
    n = np.arange(n_from, n_to + 1)
    kap = kappa_from_deficit(deficit(model, n, xs, delta))
    a = model.a(n)
    k_inf = kappa_infinity(delta) if xs >= 0 else math.nan
    ynorm, _ = y_norms(kap, a)
    _, yinv0 = y_norms(kap[0], a[0])
    exact = consecutive_norm(kap[:-1], kap[1:], a[:-1], a[1:])
    lemma = consecutive_bound(kap[:-1], kap[1:], case)
    cum_exact = np.concatenate([[0.0], np.cumsum(np.log(exact))])
    cum_lemma = np.concatenate([[0.0], np.cumsum(np.log(lemma))])
    log_product = np.log(ynorm) + math.log(float(yinv0)) + cum_exact
    log_lemma = math.log(2.0) - math.log(a[0] * math.sin(kap[0])) + cum_lemma
    log_closed = log_closed_bound(float(kap[0]), k_inf, float(a[0]), case)
    if direct:
        _, log_direct, det_err = direct_log_norms(model, xs, n_from, n_to)
    else:
        log_direct, det_err = np.full(len(n), -np.inf), 0.0
    return NormChain(n, kap, log_direct, log_product, log_lemma, log_closed, det_err)


@dataclass(frozen=True)
class LowerEdgeEnvelope:
    """Bounds -log(pi) -+ 2 log B on log w(x) for x in (-2, 0) in the b-case."""

    x: float
    theta_1: float
    theta_inf: float
    log_B: float

    @property
    def log_lower(self) -> float:
        return -math.log(math.pi) - 2.0 * self.log_B

    @property
    def log_upper(self) -> float:
        return -math.log(math.pi) + 2.0 * self.log_B


def lower_edge_thetas(model: ParameterModel, x: float, n):
    """theta_n with x - b_n = -2 cos(theta_n), decreasing to arccos(-x/2)."""
    d = (2.0 + x) - model.b(np.asarray(n))
    return kappa_from_deficit(d)


def lower_edge_envelope(model: ParameterModel, x: float) -> LowerEdgeEnvelope:
    """Uniform-in-n bounds on the Carmona density for x in (-2, 0).

    Here every step is elliptic. The consecutive factors telescope toward the
    smaller angle, giving prod <= (t_1/t_inf) exp((t_1 - t_inf) e(t_1)).
    """
    if model.case != "b":
        raise ValueError("lower edge envelope is for the b-case")
    if not -2.0 < x < 0.0:
        raise ValueError("x must lie in (-2, 0)")
    t1 = float(lower_edge_thetas(model, x, [1])[0])
    tinf = 2.0 * math.asin(0.5 * math.sqrt(2.0 + x))
    if not 0 < t1 < math.pi:
        raise ValueError("x - b_1 must lie in (-2, 2)")
    _, yinv = y_norms(t1)
    log_prod = math.log(t1 / tinf) + (t1 - tinf) * float(e_of_y(t1)) if t1 > tinf else 0.0
    log_B = math.log(2.0) + math.log(float(yinv)) + log_prod
    return LowerEdgeEnvelope(x, t1, tinf, log_B)
