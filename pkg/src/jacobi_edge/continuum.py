"""Half-line Schrodinger operators -u'' + V u = E u with u(0) = 0, u'(0) = 1.

Shooting uses classical RK4 with step-doubling control. Solutions are kept as
mantissas with a per-column power-of-two exponent so that exponential growth
in the classically forbidden region cannot overflow. Several initial
conditions can be integrated together (columns), which gives fundamental
matrices directly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .params import ModelError, PotentialModel
from .quadrature import NODES, WK, integrate
from .transfer import singular_values
from .wkb import EdgeProfile, continuum_envelope, continuum_g

LN2 = math.log(2.0)
LOG_PI = math.log(math.pi)
_BIG = 2.0**64


class StepUnderflow(RuntimeError):
    """Adaptive step fell below the resolvable size."""

    def __init__(self, x: float, h: float):
        super().__init__(f"step size {h:.3g} underflowed at x={x!r}")
        self.x = x
        self.h = h


@dataclass
class Trajectory:
    """Accepted RK4 nodes; column j holds (u, u') = (U, P)[:, j] * 2**expo[:, j]."""

    E: float
    x: np.ndarray
    U: np.ndarray
    P: np.ndarray
    expo: np.ndarray
    samples: tuple = ()
    steps: int = 0
    rejected: int = 0

    @property
    def x_start(self) -> float:
        return float(self.x[0])

    def index(self, x: float) -> int:
        i = int(np.searchsorted(self.x, x))
        if i >= len(self.x) or self.x[i] != x:
            raise KeyError(f"x={x!r} is not a node of the trajectory")
        return i

    def log_abs_u(self, col: int = 0) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return np.log(np.abs(self.U[:, col])) + self.expo[:, col] * LN2

    def log_abs_du(self, col: int = 0) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return np.log(np.abs(self.P[:, col])) + self.expo[:, col] * LN2

    def log_modulus_sq(self, col: int = 0) -> np.ndarray:
        """log(u^2 + u'^2)."""
        return np.log(self.U[:, col] ** 2 + self.P[:, col] ** 2) + 2.0 * LN2 * self.expo[:, col]

    def values(self, col: int = 0):
        s = np.ldexp(1.0, self.expo[:, col])
        return self.U[:, col] * s, self.P[:, col] * s

    def log_matrix_norm(self) -> np.ndarray:
        """log of the operator norm of the 2x2 matrix whose columns are the solutions."""
        if self.U.shape[1] != 2:
            raise ValueError("need exactly two columns")
        e = self.expo.max(axis=1)
        s0 = np.ldexp(1.0, self.expo[:, 0] - e)
        s1 = np.ldexp(1.0, self.expo[:, 1] - e)
        smax, _ = singular_values(self.U[:, 0] * s0, self.U[:, 1] * s1,
                                  self.P[:, 0] * s0, self.P[:, 1] * s1)
        return np.log(smax) + e * LN2


def _scalar_potential(potential: PotentialModel):
    if potential.is_power:
        C0, b, x0 = potential.C0, potential.beta, potential.x0
        return lambda x: C0 * (x + x0) ** (-b)
    return lambda x: float(potential.V(x))


def _rk4(V, E, x, h, u, p):
    q1 = V(x) - E
    q2 = V(x + 0.5 * h) - E
    q4 = V(x + h) - E
    k1u, k1p = p, q1 * u
    u2, p2 = u + 0.5 * h * k1u, p + 0.5 * h * k1p
    k2u, k2p = p2, q2 * u2
    u3, p3 = u + 0.5 * h * k2u, p + 0.5 * h * k2p
    k3u, k3p = p3, q2 * u3
    u4, p4 = u + h * k3u, p + h * k3p
    k4u, k4p = p4, q4 * u4
    return (u + h / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u),
            p + h / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p))


def shoot(potential: PotentialModel, E: float, x_max: float, *, x_start: float = 0.0,
          init=((0.0, 1.0),), rtol: float = 1e-10, step: float | None = None,
          samples=(), h_init: float = 1e-2) -> Trajectory:
    """Integrate -u'' + V u = E u from x_start to x_max.

    ``init`` lists (u, u') at x_start, one column each. With ``step`` set the
    integrator takes fixed steps (no error control). The turning point N(E),
    N(E) + 1, x_max and ``samples`` are always hit exactly.
    """
    if not E > 0:
        raise ModelError("energy must be positive")
    if not math.isfinite(potential.V0):
        raise ModelError("shooting needs a finite V(0); use a shifted potential")
    if not x_max > x_start:
        raise ValueError("x_max must exceed x_start")
    V = _scalar_potential(potential)
    N = potential.V_inv(E)
    stops = {float(x_max)}
    stops.update(float(s) for s in samples)
    if N > 0:
        stops.update((N, N + 1.0))
    stops = sorted(s for s in stops if x_start < s <= x_max)

    u = np.array([c[0] for c in init], dtype=float)
    p = np.array([c[1] for c in init], dtype=float)
    e = np.zeros(len(u), dtype=np.int64)
    xs, Us, Ps, Es = [x_start], [u.copy()], [p.copy()], [e.copy()]
    x = float(x_start)
    h = float(step) if step is not None else h_init
    steps = rejected = 0
    for stop in stops:
        while x < stop:
            hh = min(h, stop - x)
            last = hh == stop - x
            if step is not None:
                u, p = _rk4(V, E, x, hh, u, p)
            else:
                u1, p1 = _rk4(V, E, x, hh, u, p)
                um, pm = _rk4(V, E, x, 0.5 * hh, u, p)
                u2, p2 = _rk4(V, E, x + 0.5 * hh, 0.5 * hh, um, pm)
                scale = np.maximum(np.hypot(u2, p2), 1e-300)
                err = float(np.max(np.hypot(u2 - u1, p2 - p1) / scale)) / 15.0
                if err > rtol:
                    rejected += 1
                    h = hh * max(0.2, 0.9 * (rtol / err) ** 0.2)
                    if h < 1e-13 * max(1.0, abs(x)):
                        raise StepUnderflow(x, h)
                    continue
                u = u2 + (u2 - u1) / 15.0
                p = p2 + (p2 - p1) / 15.0
                grow = 4.0 if err == 0 else min(4.0, 0.9 * (rtol / err) ** 0.2)
                if not last or grow < 1.0:
                    h = hh * grow
            x = stop if last else x + hh
            steps += 1
            m = np.maximum(np.abs(u), np.abs(p))
            if np.any(m > _BIG) or np.any(m < 1.0 / _BIG):
                k = np.frexp(m)[1]
                u, p, e = np.ldexp(u, -k), np.ldexp(p, -k), e + k
            xs.append(x)
            Us.append(u.copy())
            Ps.append(p.copy())
            Es.append(e.copy())
    return Trajectory(float(E), np.array(xs), np.array(Us), np.array(Ps), np.array(Es),
                      tuple(stops), steps, rejected)


def convergence_order(potential: PotentialModel, E: float, x_max: float, h: float = 0.1,
                      x_start: float = 0.0) -> float:
    """Observed order from fixed steps h, h/2, h/4 at x_max."""
    vals = []
    for k in range(3):
        tr = shoot(potential, E, x_max, x_start=x_start, step=h / 2**k)
        u, p = tr.values()
        vals.append(np.array([u[-1], p[-1]]))
    d1 = np.linalg.norm(vals[0] - vals[1])
    d2 = np.linalg.norm(vals[1] - vals[2])
    return math.log2(d1 / d2)


# ------------------------------------------------------------------ checks


@dataclass
class PointwiseCheck:
    name: str
    instances: int
    max_violation: float
    worst_x: float | None
    passed: bool
    skipped: bool = False
    note: str = ""


def gamma_integral_on_nodes(potential: PotentialModel, E: float, xs) -> np.ndarray:
    """G(x) = int_0^x sqrt(V - E) at the nodes xs (0 = xs[0] < ... <= N).

    Each interval is mapped by x = N - t^2, which turns the square-root
    vanishing at N into a smooth integrand.
    """
    N = potential.V_inv(E)
    xs = np.asarray(xs, dtype=float)
    if len(xs) < 2:
        return np.zeros(len(xs))
    t = np.sqrt(np.maximum(N - xs, 0.0))
    lo, hi = t[1:], t[:-1]
    mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
    tt = mid[:, None] + half[:, None] * NODES[None, :]
    xx = N - tt * tt
    f = np.sqrt(np.maximum(potential.V(xx) - E, 0.0)) * 2.0 * tt
    inc = half * (f @ WK)
    return np.concatenate([[0.0], np.cumsum(inc)])


def monotone_checks(potential: PotentialModel, E: float, traj: Trajectory,
                    tol: float = 1e-8) -> list[PointwiseCheck]:
    """Growth, psi' >= 0, psi' + 2 gamma psi <= 1 and the modulus sandwich at N.

    With psi = u e^{-G}, G = int_0^x gamma: psi' = (u' - gamma u) e^{-G} and
    W = psi' + 2 gamma psi = (u' + gamma u) e^{-G}. The first column of
    ``traj`` must start at x = 0 with (u, u') = (0, 1).
    """
    if traj.x_start != 0.0:
        raise ValueError("trajectory must start at x = 0")
    N = potential.V_inv(E)
    if N <= 0:
        return [PointwiseCheck(n, 0, 0.0, None, True, True, "E >= V(0)")
                for n in ("continuum_growth", "continuum_psi_monotone",
                          "continuum_w_bound", "continuum_sandwich")]
    sel = traj.x <= N
    xs = traj.x[sel]
    u, p = traj.U[sel, 0], traj.P[sel, 0]
    ex = traj.expo[sel, 0]
    gam = np.sqrt(np.maximum(potential.V(xs) - E, 0.0))
    G = gamma_integral_on_nodes(potential, E, xs)
    out = []

    # u' >= 1 and u >= x while V > E
    scale = np.ldexp(1.0, ex)
    uu, pp = u * scale, p * scale
    v1 = np.maximum(0.0, 1.0 - pp)
    v2 = np.maximum(0.0, xs - uu) / np.maximum(xs, 1e-300)
    viol = np.maximum(v1, v2)
    i = int(np.argmax(viol))
    out.append(PointwiseCheck("continuum_growth", len(xs), float(viol[i]), float(xs[i]),
                              bool(viol[i] <= tol)))

    # relative violations computed on mantissas; e^{-G} applied in log space
    f = p - gam * u
    v = np.maximum(0.0, -f) / np.maximum(np.abs(p) + gam * np.abs(u), 1e-300)
    i = int(np.argmax(v))
    out.append(PointwiseCheck("continuum_psi_monotone", len(xs), float(v[i]), float(xs[i]),
                              bool(v[i] <= tol)))

    with np.errstate(divide="ignore"):
        logW = np.log(p + gam * u) + ex * LN2 - G
    v = np.maximum(0.0, np.expm1(logW))
    i = int(np.argmax(v))
    out.append(PointwiseCheck("continuum_w_bound", len(xs), float(v[i]), float(xs[i]),
                              bool(v[i] <= tol)))

    if N <= 1:
        out.append(PointwiseCheck("continuum_sandwich", 0, 0.0, None, True, True,
                                  "needs N(E) > 1"))
        return out
    g = continuum_g(potential, E)
    lm = float(traj.log_modulus_sq()[traj.index(N)])
    lower = 2.0 * g - 2.0 * math.sqrt(potential.V0 - E)
    upper = 2.0 * g + math.log(N * N + 1.0)
    v = max(0.0, lower - lm, lm - upper)
    out.append(PointwiseCheck("continuum_sandwich", 1, v, N, v <= tol,
                              note=f"log|u|^2+|u'|^2={lm:.6g} in [{lower:.6g}, {upper:.6g}]"))
    return out


# ------------------------------------------------------------------ modulus bound


@dataclass(frozen=True)
class ModulusBound:
    E: float
    x_from: float
    x_to: float
    integral_quad: float
    integral_closed: float
    log_bound: float  # log sup_y ||T(x_from, y)||
    log_bound_reference: float  # log(2 sqrt(E) / kappa(x_from)^2)
    reference_valid: bool  # the reference form needs E <= 1

    @property
    def closed_gap(self) -> float:
        return abs(self.integral_quad - self.integral_closed)


def _kappa(potential, E, x):
    return math.sqrt(max(E - float(potential.V(x)), 0.0))


def modulus_bound(potential: PotentialModel, E: float, x_from: float | None = None,
                  x_to: float = math.inf) -> ModulusBound:
    """Bound on the transfer matrix past the turning point.

    Writing (u, u') = Y(kappa) (a e^{i phi}, b e^{-i phi}) with
    Y = [[1, 1], [i kappa, -i kappa]], the pair (a, b) changes at rate
    kappa'/kappa = (1/2)(-V')/(E - V), whose integral is log(kappa(x_to)/kappa(x_from)).
    With ||Y|| = sqrt2 max(1, kappa) and ||Y^{-1}|| = 1/(sqrt2 min(1, kappa)):
    ||T(x_from, y)|| <= max(1, sqrt E) sqrt E / (kappa min(1, kappa)).
    """
    N = potential.V_inv(E)
    if x_from is None:
        x_from = N + 1.0
    if not x_from > N:
        raise ValueError("x_from must lie past the turning point")
    k1 = _kappa(potential, E, x_from)
    sE = math.sqrt(E)
    if math.isinf(x_to):
        closed = math.log(sE / k1)
        X = max(potential.V_inv(1e-14 * E), x_from)
        tail = float(potential.V(X)) / (2.0 * E)
    else:
        closed = math.log(_kappa(potential, E, x_to) / k1)
        X, tail = x_to, 0.0
    L = 1.0 + x_from

    def integrand(s):
        es = np.exp(s)
        x = x_from + L * (es - 1.0)
        return 0.5 * (-potential.dV(x)) / (E - potential.V(x)) * L * es

    quad = 0.0
    if X > x_from:
        quad = integrate(integrand, 0.0, math.log1p((X - x_from) / L), rtol=1e-12,
                         atol=1e-15, panels=8).value
    quad += tail
    log_bound = math.log(max(1.0, sE) * sE / (k1 * min(1.0, k1)))
    ref = math.log(2.0 * sE / (k1 * k1))
    return ModulusBound(E, x_from, x_to, quad, closed, log_bound, ref, E <= 1.0)


def fundamental_log_norms(potential: PotentialModel, E: float, x_from: float, ys,
                          rtol: float = 1e-10) -> np.ndarray:
    """log ||T(x_from, y)|| from the solutions with data (1, 0) and (0, 1) at x_from."""
    ys = np.asarray(sorted(float(y) for y in ys))
    tr = shoot(potential, E, float(ys[-1]), x_start=x_from, init=((1.0, 0.0), (0.0, 1.0)),
               rtol=rtol, samples=ys)
    idx = [tr.index(y) for y in ys]
    return tr.log_matrix_norm()[idx]


# ------------------------------------------------------------------ profiles


@dataclass
class ContinuumWeight:
    E: float
    y: float
    log_w: float
    log_mod_min: float  # min of log(u^2 + u'^2) over one period past y
    log_mod_max: float
    extra: dict = field(default_factory=dict)


def continuum_weight(potential: PotentialModel, E: float, y: float | None = None,
                     rtol: float = 1e-10) -> ContinuumWeight:
    """log of the averaged Carmona density 1/(pi (u^2 + u'^2)) over one period past y."""
    N = potential.V_inv(E)
    if y is None:
        y = max(2.0 * N + 20.0, N + 50.0)
    period = 2.0 * math.pi / math.sqrt(E)
    ys = y + period * np.linspace(0.0, 1.0, 65)
    tr = shoot(potential, E, float(ys[-1]), rtol=rtol, samples=ys)
    lm = tr.log_modulus_sq()[[tr.index(float(v)) for v in ys]]
    # trapezoid average of 1/(pi C) over the period, in log space
    vals = -lm
    m = float(vals.max())
    avg = float(np.trapezoid(np.exp(vals - m), ys)) / period
    log_w = -LOG_PI + m + math.log(avg)
    return ContinuumWeight(E, float(y), log_w, float(lm.min()), float(lm.max()))


def continuum_edge_profile(potential: PotentialModel, E_grid, x_max: float | None = None,
                           carmona: bool = True) -> list[EdgeProfile]:
    """g, h and the Carmona estimate at each energy."""
    rows = []
    kind = f"continuum-{potential.kind}"
    for E in E_grid:
        E = float(E)
        try:
            N = potential.V_inv(E)
            g = continuum_g(potential, E)
            h = continuum_envelope(potential, E).h
            log_w = continuum_weight(potential, E, x_max).log_w if carmona else None
            rows.append(EdgeProfile(kind, E, E, N, g, h, log_w, None))
        except (ModelError, StepUnderflow, ValueError) as exc:
            rows.append(EdgeProfile(kind, E, E, math.nan, math.nan, math.nan, None, None, str(exc)))
    return rows
