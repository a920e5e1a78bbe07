"""Jacobi parameter models and half-line potentials.

Three discrete families are supported:

* ``power-law-b``: a_n = 1, b_n = -C n^{-beta}
* ``log-law-a``:   b_n = 0, a_n = 1 - f(log(n+1)) with f a decreasing profile
* ``custom``:      explicit finite lists with a declared tail rule

Potentials are V(x) = C0 (x + x0)^{-beta} or a user supplied C^1 function.
Everything here is immutable and pure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np


class ModelError(ValueError):
    """Raised for malformed models or out-of-range evaluation."""


LOG2 = math.log(2.0)


def _exp_iter(k: int, x: float) -> float:
    for _ in range(k):
        x = math.exp(x)
    return x


@dataclass(frozen=True)
class MonotoneF:
    """Positive, decreasing, convex profile f on [log 2, inf) with f -> 0.

    ``power``: f(x) = (1 + x)^(-alpha).
    ``iterated-log``: f(x) = 1 / log_k(x + c_k), log_k the k-fold logarithm.
    The offset c_k = exp_k(1) - log 2 + 1 keeps the innermost argument of the
    last logarithm above e on the whole domain, so every log is >= 1 there
    and f(log 2) < 1.
    """

    family: str = "power"
    alpha: float = 1.0
    depth: int = 1

    def __post_init__(self):
        if self.family == "power":
            if not self.alpha > 0:
                raise ModelError("alpha must be positive")
        elif self.family == "iterated-log":
            if self.depth < 1 or self.depth > 3:
                raise ModelError("iterated-log depth must be 1, 2 or 3")
        else:
            raise ModelError(f"unknown f family {self.family!r}")

    @property
    def offset(self) -> float:
        if self.family == "power":
            return 0.0
        return _exp_iter(self.depth, 1.0) - LOG2 + 1.0

    def _chain(self, x):
        # k-fold log with first and second derivatives
        L = np.asarray(x, dtype=float) + self.offset
        D = np.ones_like(L)
        S = np.zeros_like(L)
        with np.errstate(over="ignore"):
            for _ in range(self.depth):
                S = (S * L - D * D) / (L * L)
                D = D / L
                L = np.log(L)
        return L, D, S

    def __call__(self, x):
        if self.family == "power":
            return (1.0 + np.asarray(x, dtype=float)) ** (-self.alpha)
        L, _, _ = self._chain(x)
        return 1.0 / L

    def deriv(self, x):
        if self.family == "power":
            return -self.alpha * (1.0 + np.asarray(x, dtype=float)) ** (-self.alpha - 1.0)
        L, D, _ = self._chain(x)
        return -D / (L * L)

    def deriv2(self, x):
        if self.family == "power":
            a = self.alpha
            return a * (a + 1.0) * (1.0 + np.asarray(x, dtype=float)) ** (-a - 2.0)
        L, D, S = self._chain(x)
        return -S / (L * L) + 2.0 * D * D / (L * L * L)

    def drop(self, t, gap):
        """f(t - gap) - f(t), accurate when gap is small compared with t."""
        t = np.asarray(t, dtype=float)
        gap = np.asarray(gap, dtype=float)
        if self.family == "power":
            return self(t) * np.expm1(-self.alpha * np.log1p(-gap / (1.0 + t)))
        return self(t - gap) - self(t)

    def inverse(self, y: float) -> float:
        """x with f(x) = y; inf when the answer overflows."""
        if not y > 0:
            raise ModelError("f takes only positive values")
        if self.family == "power":
            return y ** (-1.0 / self.alpha) - 1.0
        try:
            return _exp_iter(self.depth, 1.0 / y) - self.offset
        except OverflowError:
            return math.inf

    def validate(self, grid=None) -> list[str]:
        """Sign checks f > 0, f' < 0, f'' > 0 on a grid, plus decay."""
        if grid is None:
            grid = LOG2 * np.logspace(0, 4, 200)
        grid = np.asarray(grid, dtype=float)
        problems = []
        if not np.all(self(grid) > 0):
            problems.append("f not positive")
        if not np.all(self.deriv(grid) < 0):
            problems.append("f' not negative")
        if not np.all(self.deriv2(grid) > 0):
            problems.append("f'' not positive")
        if not float(self(1e300)) < float(self(grid[-1])):
            problems.append("f does not decay")
        return problems


_CUSTOM_TAILS = ("constant", "power")


@dataclass(frozen=True)
class ParameterModel:
    """Jacobi parameters (a_n, b_n), n >= 1.

    Use the constructors :meth:`power_law_b`, :meth:`log_law_a`,
    :meth:`custom` and :meth:`free`.
    """

    kind: str
    C: float = 1.0
    beta: float = 0.5
    f: MonotoneF | None = None
    a_values: tuple = ()
    b_values: tuple = ()
    a_tail: object = None
    b_tail: object = None

    # constructors

    @classmethod
    def power_law_b(cls, C: float = 1.0, beta: float = 0.5) -> "ParameterModel":
        if not C > 0:
            raise ModelError("C must be positive")
        if not 0 < beta < 2:
            raise ModelError("beta must lie in (0, 2)")
        return cls(kind="power-law-b", C=float(C), beta=float(beta))

    @classmethod
    def log_law_a(cls, alpha: float = 1.0, depth: int | None = None,
                  f: MonotoneF | None = None) -> "ParameterModel":
        if f is None:
            f = MonotoneF("iterated-log", depth=depth) if depth else MonotoneF("power", alpha=alpha)
        return cls(kind="log-law-a", f=f)

    @classmethod
    def custom(cls, a: Sequence[float] = (), b: Sequence[float] = (),
               a_tail=1.0, b_tail=0.0) -> "ParameterModel":
        """Explicit lists. A tail is a number (held constant) or ``"power"``,
        a power law toward the limit (1 for a, 0 for b) fitted to the last two
        stored values. ``None`` forbids evaluation past the stored data."""
        a = tuple(float(v) for v in a)
        b = tuple(float(v) for v in b)
        for name, tail, vals in (("a", a_tail, a), ("b", b_tail, b)):
            if isinstance(tail, str):
                if tail not in _CUSTOM_TAILS:
                    raise ModelError(f"unknown tail rule {tail!r} for {name}")
                if tail == "power" and len(vals) < 2:
                    raise ModelError(f"power tail for {name} needs two stored values")
            elif tail is not None:
                tail = float(tail)
        if any(v <= 0 for v in a) or (isinstance(a_tail, (int, float)) and a_tail <= 0):
            raise ModelError("a_n must be positive")
        return cls(kind="custom", a_values=a, b_values=b, a_tail=a_tail, b_tail=b_tail)

    @classmethod
    def free(cls) -> "ParameterModel":
        """a_n = 1, b_n = 0: Chebyshev polynomials of the second kind."""
        return cls.custom((), (), a_tail=1.0, b_tail=0.0)

    # classification

    @property
    def case(self) -> str:
        """'b' (a = 1, b varies), 'a' (b = 0, a varies) or 'mixed'."""
        if self.kind == "power-law-b":
            return "b"
        if self.kind == "log-law-a":
            return "a"
        a_flat = all(v == 1.0 for v in self.a_values) and self.a_tail == 1.0
        b_flat = all(v == 0.0 for v in self.b_values) and self.b_tail == 0.0
        if a_flat:
            return "b"
        if b_flat:
            return "a"
        return "mixed"

    @property
    def is_free(self) -> bool:
        return self.kind == "custom" and self.case == "b" and \
            all(v == 0.0 for v in self.b_values) and self.b_tail == 0.0

    # evaluation (vectorized over integer n)

    def _custom(self, n, vals, tail, limit):
        n = np.asarray(n)
        out = np.empty(n.shape, dtype=float)
        m = len(vals)
        inside = n <= m
        if np.any(inside):
            out[inside] = np.asarray(vals, dtype=float)[n[inside] - 1]
        if np.any(~inside):
            if tail is None:
                raise ModelError(f"index beyond stored length {m} and no tail rule")
            if tail == "power":
                d1, d2 = vals[-2] - limit, vals[-1] - limit
                if d1 == 0 or d2 == 0 or (d1 > 0) != (d2 > 0) or abs(d2) > abs(d1):
                    raise ModelError("power tail needs a strictly shrinking deviation")
                p = math.log(abs(d1) / abs(d2)) / math.log(m / (m - 1))
                out[~inside] = limit + d2 * (n[~inside] / m) ** (-p)
            else:
                out[~inside] = tail
        return out

    def _check_n(self, n):
        n = np.asarray(n)
        if n.dtype.kind not in "iu":
            if np.any(n != np.floor(n)):
                raise ModelError("indices must be integers")
            n = n.astype(np.int64)
        if np.any(n < 1):
            raise ModelError("indices start at 1")
        return n

    def a(self, n):
        n = self._check_n(n)
        if self.kind == "power-law-b":
            return np.ones(n.shape)
        if self.kind == "log-law-a":
            return 1.0 - self.f(np.log(n + 1.0))
        return self._custom(n, self.a_values, self.a_tail, 1.0)

    def b(self, n):
        n = self._check_n(n)
        if self.kind == "power-law-b":
            return -self.C * n.astype(float) ** (-self.beta)
        if self.kind == "log-law-a":
            return np.zeros(n.shape)
        return self._custom(n, self.b_values, self.b_tail, 0.0)

    def one_minus_a(self, n):
        """1 - a_n without cancellation for the log law."""
        n = self._check_n(n)
        if self.kind == "log-law-a":
            return self.f(np.log(n + 1.0))
        return 1.0 - self.a(n)

    def to_dict(self) -> dict:
        d = {"kind": self.kind}
        if self.kind == "power-law-b":
            d.update(C=self.C, beta=self.beta)
        elif self.kind == "log-law-a":
            d.update(f_family=self.f.family, alpha=self.f.alpha, depth=self.f.depth)
        else:
            d.update(a=list(self.a_values), b=list(self.b_values),
                     a_tail=self.a_tail, b_tail=self.b_tail)
        return d


def eval_b(model: ParameterModel, n: int) -> float:
    return float(model.b(int(n)))


def eval_a(model: ParameterModel, n: int) -> float:
    return float(model.a(int(n)))


@dataclass(frozen=True)
class MonotoneReport:
    horizon: int
    monotone_a: bool
    monotone_b: bool
    a_direction: str
    b_direction: str
    bv_partial: float
    a_limit_ok: bool
    b_limit_ok: bool
    notes: tuple = ()

    @property
    def ok(self) -> bool:
        return self.monotone_a and self.monotone_b and self.a_limit_ok and self.b_limit_ok


def _direction(v: np.ndarray) -> str:
    d = np.diff(v)
    if np.all(d == 0):
        return "constant"
    if np.all(d >= 0):
        return "nondecreasing"
    if np.all(d <= 0):
        return "nonincreasing"
    return "mixed"


def validate_monotone(model: ParameterModel, horizon: int) -> MonotoneReport:
    """Monotonicity, bounded-variation partial sum and limit sanity up to ``horizon``.

    The a-sequence is expected to increase toward 1, which is the direction the
    growth estimates for the log law rely on. A decreasing a-sequence is
    reported as a direction mismatch rather than silently accepted.
    """
    if horizon < 2:
        raise ModelError("horizon must be at least 2")
    n = np.arange(1, horizon + 1)
    a = model.a(n)
    b = model.b(n)
    a_dir, b_dir = _direction(a), _direction(b)
    notes = []
    monotone_a = a_dir in ("constant", "nondecreasing")
    if a_dir == "nonincreasing":
        notes.append("a_n is nonincreasing; the estimates here need a_n nondecreasing to 1")
    monotone_b = b_dir in ("constant", "nondecreasing")
    if b_dir == "nonincreasing":
        notes.append("b_n is nonincreasing; the estimates here need b_n increasing to 0")
    bv = float(np.sum(np.abs(np.diff(a))) + np.sum(np.abs(np.diff(b))))
    mid = max(1, horizon // 2)
    a_limit_ok = bool(np.all(a <= 1.0) and abs(1 - a[-1]) <= abs(1 - a[mid - 1]) <= abs(1 - a[0]))
    b_limit_ok = bool(abs(b[-1]) <= abs(b[mid - 1]) <= abs(b[0]))
    if model.case == "mixed":
        notes.append("both a_n and b_n vary; only pure a or pure b perturbations are supported")
    return MonotoneReport(horizon, monotone_a, monotone_b, a_dir, b_dir, bv,
                          a_limit_ok, b_limit_ok, tuple(notes))


# ---------------------------------------------------------------- potentials


@dataclass(frozen=True)
class PotentialModel:
    """Positive decreasing potential V on [0, inf) with V -> 0."""

    kind: str
    C0: float = 1.0
    beta: float = 1.0
    x0: float = 0.0
    V_func: Callable | None = field(default=None, compare=False)
    dV_func: Callable | None = field(default=None, compare=False)
    Vinv_func: Callable | None = field(default=None, compare=False)

    @classmethod
    def power_law(cls, C0: float = 1.0, beta: float = 1.0, x0: float = 0.0) -> "PotentialModel":
        if not C0 > 0:
            raise ModelError("C0 must be positive")
        if not 0 < beta < 2:
            raise ModelError("beta must lie in (0, 2)")
        if x0 < 0:
            raise ModelError("x0 must be nonnegative")
        kind = "shifted-power-law" if x0 > 0 else "power-law"
        return cls(kind=kind, C0=float(C0), beta=float(beta), x0=float(x0))

    @classmethod
    def custom_c1(cls, V: Callable, dV: Callable, V_inv: Callable | None = None) -> "PotentialModel":
        return cls(kind="custom-C1", V_func=V, dV_func=dV, Vinv_func=V_inv)

    @property
    def is_power(self) -> bool:
        return self.kind in ("power-law", "shifted-power-law")

    def V(self, x):
        if self.is_power:
            return self.C0 * (np.asarray(x, dtype=float) + self.x0) ** (-self.beta)
        return self.V_func(x)

    def dV(self, x):
        if self.is_power:
            return -self.beta * self.C0 * (np.asarray(x, dtype=float) + self.x0) ** (-self.beta - 1.0)
        return self.dV_func(x)

    @property
    def V0(self) -> float:
        if self.is_power and self.x0 == 0:
            return math.inf
        return float(self.V(0.0))

    def V_inv(self, E: float) -> float:
        """Point where V equals E; 0 when E >= V(0)."""
        if not E > 0:
            raise ModelError("energy must be positive")
        if E >= self.V0:
            return 0.0
        if self.is_power:
            return (E / self.C0) ** (-1.0 / self.beta) - self.x0
        if self.Vinv_func is not None:
            return float(self.Vinv_func(E))
        lo, hi = 0.0, 1.0
        while float(self.V(hi)) > E:
            lo, hi = hi, 2.0 * hi
            if hi > 1e300:
                raise ModelError("V does not fall below E")
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if float(self.V(mid)) > E:
                lo = mid
            else:
                hi = mid
            if hi - lo <= 1e-15 * hi:
                break
        return 0.5 * (lo + hi)

    def validate(self, samples=None) -> list[str]:
        if samples is None:
            samples = np.concatenate([[0.0], np.logspace(-3, 4, 60)])
        samples = np.asarray(samples, dtype=float)
        if self.is_power and self.x0 == 0:
            samples = samples[samples > 0]
        v = np.asarray(self.V(samples), dtype=float)
        dv = np.asarray(self.dV(samples), dtype=float)
        problems = []
        if not np.all(v > 0):
            problems.append("V not positive")
        if not np.all(dv < 0):
            problems.append("V' not negative")
        if not np.all(np.diff(v) < 0):
            problems.append("V not strictly decreasing")
        if not float(self.V(1e12)) < 1e-3 * float(v[0]):
            problems.append("V does not decay")
        for x, vx in zip(samples, v):
            back = self.V_inv(float(vx))
            if abs(back - x) > 1e-10 * max(1.0, abs(x)):
                problems.append(f"V_inv round trip failed at x={x}")
                break
        return problems

    def to_dict(self) -> dict:
        if self.is_power:
            return {"kind": self.kind, "C0": self.C0, "beta": self.beta, "x0": self.x0}
        return {"kind": self.kind}


# ---------------------------------------------------------------- config files


def parse_config(text: str) -> dict:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ModelError(f"line {lineno}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out


def _floats(s: str) -> list[float]:
    return [float(v) for v in s.replace(",", " ").split()]


def _tail(s):
    if s is None:
        return None
    s = str(s).strip()
    if s in _CUSTOM_TAILS:
        return s
    if s.lower() == "none":
        return None
    return float(s)


_MODEL_KEYS = {"kind", "model", "C", "beta", "alpha", "depth", "a", "b", "tail", "a_tail", "b_tail"}


def model_from_config(cfg: dict) -> ParameterModel:
    unknown = sorted(set(cfg) - _MODEL_KEYS)
    if unknown:
        raise ModelError(f"unknown config keys: {', '.join(unknown)}")
    kind = cfg.get("kind", cfg.get("model", "power-law-b"))
    if kind == "power-law-b":
        return ParameterModel.power_law_b(float(cfg.get("C", 1.0)), float(cfg.get("beta", 0.5)))
    if kind == "log-law-a":
        depth = cfg.get("depth")
        return ParameterModel.log_law_a(alpha=float(cfg.get("alpha", 1.0)),
                                        depth=int(depth) if depth not in (None, "", "0") else None)
    if kind == "free":
        return ParameterModel.free()
    if kind == "custom":
        tail = cfg.get("tail")
        a_tail = _tail(cfg.get("a_tail", tail if tail is not None else 1.0))
        b_tail = _tail(cfg.get("b_tail", 0.0))
        return ParameterModel.custom(_floats(cfg.get("a", "")), _floats(cfg.get("b", "")),
                                     a_tail=a_tail, b_tail=b_tail)
    raise ModelError(f"unknown model kind {kind!r}")


def potential_from_config(cfg: dict) -> PotentialModel:
    kind = cfg.get("kind", "shifted-power-law")
    if kind not in ("power-law", "shifted-power-law"):
        raise ModelError("only power-law potentials can be built from a config")
    return PotentialModel.power_law(float(cfg.get("C0", 1.0)), float(cfg.get("beta", 1.0)),
                                    float(cfg.get("x0", 0.0)))
