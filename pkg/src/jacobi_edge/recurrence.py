"""Overflow-safe orthonormal polynomial recursions.

    a_{n+1} p_{n+1} = (x - b_{n+1}) p_n - a_n p_{n-1},   p_{-1} = 0, p_0 = 1.

Values are carried as a pair of O(1) mantissas times 2^e. Rescaling by an
exact power of two never perturbs the mantissas' ratio.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .params import ParameterModel
from .phases import deficit, edge_coords, gamma_from_deficit, kappa_from_deficit, turning_index

LN2 = math.log(2.0)


class RecurrenceError(ArithmeticError):
    pass


@dataclass(frozen=True)
class LogScaledPair:
    """(p_n, p_{n-1}) = (u1, u2) * 2**exponent with max(|u1|, |u2|) in [1/2, 2)."""

    n: int
    u1: float
    u2: float
    exponent: int = 0

    @classmethod
    def start(cls) -> "LogScaledPair":
        return cls(0, 1.0, 0.0, 0)

    @property
    def log_scale(self) -> float:
        return self.exponent * LN2

    def values(self) -> tuple[float, float]:
        """Unscaled (p_n, p_{n-1}); may overflow to inf."""
        return math.ldexp(self.u1, self.exponent), math.ldexp(self.u2, self.exponent)

    def log_abs(self) -> tuple[float, float]:
        la = math.log(abs(self.u1)) + self.log_scale if self.u1 else -math.inf
        lb = math.log(abs(self.u2)) + self.log_scale if self.u2 else -math.inf
        return la, lb


def _renorm(u1: float, u2: float, e: int):
    m = max(abs(u1), abs(u2))
    if m >= 2.0 or m < 0.5:
        if m == 0.0 or not math.isfinite(m):
            raise RecurrenceError("recursion produced a zero or non-finite pair")
        k = math.frexp(m)[1]
        return math.ldexp(u1, -k), math.ldexp(u2, -k), e + k
    return u1, u2, e


def step_p(model: ParameterModel, x: float, state: LogScaledPair) -> LogScaledPair:
    n1 = state.n + 1
    a1 = float(model.a(n1))
    b1 = float(model.b(n1))
    an = float(model.a(state.n)) if state.n >= 1 else 1.0
    u_next = ((x - b1) * state.u1 - an * state.u2) / a1
    if not math.isfinite(u_next):
        raise RecurrenceError(f"non-finite value at n={n1}")
    u1, u2, e = _renorm(u_next, state.u1, state.exponent)
    return LogScaledPair(n1, u1, u2, e)


@dataclass
class PSequence:
    """Scaled p_n for n = 0..n_max: p_n = mant[n] * 2**expo[n]."""

    mant: np.ndarray
    expo: np.ndarray

    def log_abs(self) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return np.log(np.abs(self.mant)) + self.expo * LN2

    def sign(self) -> np.ndarray:
        return np.sign(self.mant)

    def values(self) -> np.ndarray:
        return np.ldexp(self.mant, self.expo.astype(np.int64))


def p_sequence(model: ParameterModel, x: float, n_max: int) -> PSequence:
    """p_0..p_{n_max}, each stored against its own power of two."""
    n = np.arange(1, n_max + 1)
    a = model.a(n) if n_max else np.zeros(0)
    b = model.b(n) if n_max else np.zeros(0)
    mant = np.empty(n_max + 1)
    expo = np.zeros(n_max + 1, dtype=np.int64)
    mant[0] = 1.0
    u1, u2, e = 1.0, 0.0, 0
    an = 1.0
    x = float(x)
    for k in range(n_max):
        ak = a[k]
        u_next = ((x - b[k]) * u1 - an * u2) / ak
        u1, u2 = u_next, u1
        m = abs(u1) if abs(u1) > abs(u2) else abs(u2)
        if m >= 2.0 or m < 0.5:
            if m == 0.0 or m != m or m == math.inf:
                raise RecurrenceError(f"non-finite value at n={k + 1}")
            s = math.frexp(m)[1]
            u1, u2 = math.ldexp(u1, -s), math.ldexp(u2, -s)
            e += s
        an = ak
        mant[k + 1] = u1
        expo[k + 1] = e
    return PSequence(mant, expo)


def _scaled_pairs(model, x, n_max):
    """Like p_sequence but also returns the partner mantissa u2 at each step."""
    n = np.arange(1, n_max + 1)
    a, b = model.a(n), model.b(n)
    m1 = np.empty(n_max + 1)
    m2 = np.empty(n_max + 1)
    ex = np.zeros(n_max + 1, dtype=np.int64)
    m1[0], m2[0] = 1.0, 0.0
    u1, u2, e, an = 1.0, 0.0, 0, 1.0
    for k in range(n_max):
        ak = a[k]
        u1, u2 = ((x - b[k]) * u1 - an * u2) / ak, u1
        m = max(abs(u1), abs(u2))
        if m >= 2.0 or m < 0.5:
            s = math.frexp(m)[1]
            u1, u2 = math.ldexp(u1, -s), math.ldexp(u2, -s)
            e += s
        an = ak
        m1[k + 1], m2[k + 1], ex[k + 1] = u1, u2, e
    return m1, m2, ex


def log_eta_vec(model: ParameterModel, x, n: int, every: int = 16) -> np.ndarray:
    """log(a_n^2 p_n(x)^2 + p_{n-1}(x)^2) for an array of x, one pass over n.

    Renormalizes every ``every`` steps; the per-step growth is bounded by
    (|x - b| + a_prev)/a, so 16 steps cannot overflow for the models here.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    idx = np.arange(1, n + 1)
    a = model.a(idx)
    b = model.b(idx)
    p_prev = np.zeros_like(x)
    p = np.ones_like(x)
    expo = np.zeros(x.shape, dtype=np.int64)
    unit_a = bool(np.all(a == 1.0))
    a_prev = 1.0
    for k in range(n):
        if unit_a:
            p_next = (x - b[k]) * p - p_prev
        else:
            p_next = ((x - b[k]) * p - a_prev * p_prev) / a[k]
            a_prev = a[k]
        p_prev, p = p, p_next
        if (k + 1) % every == 0 or k == n - 1:
            m = np.maximum(np.abs(p), np.abs(p_prev))
            _, s = np.frexp(m)
            p = np.ldexp(p, -s)
            p_prev = np.ldexp(p_prev, -s)
            expo += s
    an = a[-1]
    return np.log(an * an * p * p + p_prev * p_prev) + 2.0 * LN2 * expo


def eta_n(model: ParameterModel, x, n: int):
    """log eta_n(x) = log(a_n^2 p_n^2 + p_{n-1}^2); scalar in, scalar out."""
    out = log_eta_vec(model, x, n)
    return float(out[0]) if np.ndim(x) == 0 else out


def log_eta_window(model: ParameterModel, x: float, n_lo: int, n_hi: int) -> np.ndarray:
    """log eta_m(x) for m = n_lo..n_hi (scalar x)."""
    m1, m2, ex = _scaled_pairs(model, float(x), n_hi)
    m = np.arange(n_lo, n_hi + 1)
    a = model.a(m)
    return np.log(a * a * m1[m] ** 2 + m2[m] ** 2) + 2.0 * LN2 * ex[m]


# ------------------------------------------------------------ psi and W


@dataclass
class PsiSequence:
    """psi_n = exp(-G_n) p_n and W_n for n = 0..N, plus gamma_1..gamma_{N+1}.

    ``gamma[j]`` holds gamma_j (index 0 unused). ``W`` has length N (n=0..N-1),
    since W_n involves gamma_{n+1}.
    """

    psi: np.ndarray
    W: np.ndarray
    gamma: np.ndarray
    ratio: np.ndarray  # a_n / a_{n+1}, index n


def psi_sequence(model: ParameterModel, x=None, N: int | None = None, *, delta=None,
                 validate: bool = True) -> PsiSequence:
    """Run the psi recursion

        psi_{n+1} = (1 + e^{-2g_{n+1}}) psi_n - r_n e^{-(g_n + g_{n+1})} psi_{n-1},

    r_n = a_n / a_{n+1}, with psi_{-1} = 0 and psi_0 = 1, for n < N <= N(x).
    ``validate=False`` trusts the given N and skips model validation, which
    lets fault-injection runs feed deliberately non-monotone parameters.
    """
    x, delta = edge_coords(x, delta)
    xs = abs(x) if model.case == "a" else x
    if N is not None and (not validate or (delta == 0 and model.case == "b")):
        Nx = N  # at the edge itself every index is hyperbolic
    else:
        Nx = turning_index(model, x=x, delta=delta)
    if N is None:
        N = Nx
    if N > Nx:
        raise ValueError(f"N={N} is past the turning index {Nx}")
    idx = np.arange(1, N + 1)
    gam = np.zeros(N + 1)
    gam[1:] = gamma_from_deficit(deficit(model, idx, xs, delta))
    a = np.concatenate([[1.0], model.a(np.arange(1, N + 2))])
    ratio = a[:-1] / a[1:]
    psi = np.empty(N + 1)
    psi[0] = 1.0
    prev = 0.0
    for n in range(N):
        g1 = gam[n + 1]
        g0 = gam[n] if n >= 1 else 0.0
        nxt = (1.0 + math.exp(-2.0 * g1)) * psi[n] - ratio[n] * math.exp(-(g0 + g1)) * prev
        prev = psi[n]
        psi[n + 1] = nxt
    # W_n = e^{g_{n+1}} psi_n - r_n e^{-g_n} psi_{n-1}
    W = np.empty(N)
    for n in range(N):
        g0 = gam[n] if n >= 1 else 0.0
        pm1 = psi[n - 1] if n >= 1 else 0.0
        W[n] = math.exp(gam[n + 1]) * psi[n] - ratio[n] * math.exp(-g0) * pm1
    return PsiSequence(psi, W, gam, ratio)


# ------------------------------------------------------------ Prufer-like phase


@dataclass
class PhiTrajectory:
    n: np.ndarray
    kappa: np.ndarray
    log_abs_phi: np.ndarray
    im_check: np.ndarray  # | |Im Phi_n| - sin(k_n) |p_{n-1}| | / |Phi_n|
    ratio: np.ndarray  # |Phi_{n+1}| / |Phi_n|
    radius: np.ndarray  # exact-perturbation radius
    rate: np.ndarray  # linearized radius, >= radius

    def max_violation(self) -> float:
        lo = (1.0 - self.radius) - self.ratio
        hi = self.ratio - (1.0 + self.radius)
        return float(max(np.max(lo, initial=-np.inf), np.max(hi, initial=-np.inf)))


def phi_trajectory(model: ParameterModel, x=None, n_start: int | None = None,
                   n_end: int | None = None, *, delta=None) -> PhiTrajectory:
    """Phi_n = p_n - e^{-i k_n} p_{n-1} for n_start..n_end (past the turning index).

    Per step |Phi_{n+1} - e^{ik_{n+1}} Phi_n| = c_n |p_{n-1}| <= c_n |Phi_n| / sin k_n,
    with c_n = |e^{ik_{n+1}} - r_n e^{ik_n}|, r_n = a_n/a_{n+1} (r = 1 in the b-case).
    """
    x, delta = edge_coords(x, delta)
    if model.case == "b" and x < 0:
        raise ValueError("phases are defined here for x >= 0 in the b-case")
    xs = abs(x) if model.case == "a" else x
    N = turning_index(model, x=x, delta=delta)
    if n_start is None:
        n_start = N + 2
    if n_end is None:
        n_end = n_start + 200
    if n_start <= N:
        raise ValueError("n_start must be past the turning index")
    m1, m2, ex = _scaled_pairs(model, xs, n_end + 1)
    n = np.arange(n_start, n_end + 1)
    kap = kappa_from_deficit(deficit(model, np.arange(n_start, n_end + 2), xs, delta))
    k_n = kap[:-1]
    phi = m1[n] - np.exp(-1j * k_n) * m2[n]
    log_abs = np.log(np.abs(phi)) + LN2 * ex[n]
    im_check = np.abs(np.abs(phi.imag) - np.sin(k_n) * np.abs(m2[n])) / np.abs(phi)
    ratio = np.exp(np.diff(log_abs))
    a = model.a(np.arange(n_start, n_end + 1))
    r = a[:-1] / a[1:]
    k0, k1 = k_n[:-1], kap[1:-1]
    c = np.abs(np.exp(1j * k1) - r * np.exp(1j * k0))
    if model.case == "b":
        radius = c / np.sin(k0)
        rate = np.abs(k1 - k0) / np.sin(k0)
    else:
        radius = c / np.sin(k0)
        rate = np.abs(k1 - k0) / (0.5 * np.sin(2.0 * k0))
    return PhiTrajectory(n, k_n, log_abs, im_check, ratio, radius, rate)
