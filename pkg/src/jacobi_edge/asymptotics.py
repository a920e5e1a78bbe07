"""Closed forms and series for the edge exponent.

* exact Taylor coefficients c_l of arccosh(1 + z/2) / sqrt(z),
* the edge series Q(delta) for b_n = -C n^{-beta},
* residual diagnostics of g - Q,
* the sum S_N = sum_{j=2}^N sqrt(f(log j) - f(log N)) for slowly decaying f,
* N(x) and the leading g(x) for a_n = 1 - f(log(n+1)).
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from math import comb

import numpy as np

from .params import ModelError, MonotoneF, ParameterModel
from .phases import NoTurningPoint, turning_index
from .wkb import g_sum

SQRT_PI_OVER_2 = math.sqrt(math.pi) / 2.0

# c_20 as printed in the reference table, kept unreduced; exact arithmetic
# disagrees in the denominator (see c20_comparison)
PRINTED_C20 = (34461632205, 12391489651049749040738304)


@dataclass(frozen=True)
class CoeffTable:
    coeffs: tuple

    @property
    def L(self) -> int:
        return len(self.coeffs) - 1

    def as_strings(self) -> list[str]:
        return [f"{c.numerator}/{c.denominator}" if c.denominator != 1 else str(c.numerator)
                for c in self.coeffs]

    def partial_sum(self, z: float) -> float:
        """sqrt(z) * sum_l c_l z^l in double precision (Horner)."""
        acc = 0.0
        for c in reversed(self.coeffs):
            acc = acc * z + float(c)
        return math.sqrt(z) * acc


def arccosh_coeffs(L: int) -> CoeffTable:
    """c_0..c_L with arccosh(1 + z/2) = sqrt(z) sum_l c_l z^l.

    Differentiating gives (2l + 1) c_l = binom(-1/2, l) 4^{-l}, the Taylor
    coefficient of (1 + z/4)^{-1/2}; binom(-1/2, l) = (-1)^l C(2l, l) / 4^l.
    """
    if L < 0:
        raise ValueError("L must be nonnegative")
    out = []
    for ell in range(L + 1):
        b = Fraction((-1) ** ell * comb(2 * ell, ell), 4**ell)
        out.append(b / (4**ell * (2 * ell + 1)))
    return CoeffTable(tuple(out))


def c20_comparison() -> dict:
    c20 = arccosh_coeffs(20).coeffs[20]
    num, den = PRINTED_C20
    return {
        "computed": f"{c20.numerator}/{c20.denominator}",
        "printed": f"{num}/{den}",
        "match": c20 == Fraction(num, den),
        "numerator_match": c20.numerator == num,
        "denominator_digits_differing": sum(
            x != y for x, y in zip(str(c20.denominator), str(den))),
    }


# ------------------------------------------------------------------ Q series


@dataclass(frozen=True)
class SeriesTerm:
    ell: int
    coefficient: float
    exponent: float
    value: float


@dataclass
class SeriesQ:
    beta: float
    C: float
    delta: float
    terms: list
    head: float = 0.0
    advisory: str = ""

    @property
    def value(self) -> float:
        return math.fsum([t.value for t in self.terms]) + self.head

    def to_dict(self) -> dict:
        d = asdict(self)
        d["value"] = self.value
        return d


def series_orders(beta: float, tol: float = 1e-9) -> list[int]:
    """l with 0 <= l < 1/beta - 1/2; an integer borderline l is left out."""
    top = 1.0 / beta - 0.5
    out = []
    ell = 0
    while ell < top - tol:
        out.append(ell)
        ell += 1
    return out


def series_coefficient(beta: float, C: float, ell: int) -> float:
    """beta^{-1} C^{1/beta} c_l Gamma(l+3/2) Gamma(1/beta-1/2-l) / Gamma(1/beta+1)."""
    c = float(arccosh_coeffs(ell).coeffs[ell])
    ib = 1.0 / beta
    lg = math.lgamma(ell + 1.5) + math.lgamma(ib - 0.5 - ell) - math.lgamma(ib + 1.0)
    return c * math.exp(lg + ib * math.log(C)) / beta


def q_series(beta: float, C: float, delta: float) -> SeriesQ:
    """Growing part of Q(2 - delta) for b_n = -C n^{-beta}.

    Terms with C j^{-beta} > 1 are taken exactly (the expansion in
    z = C j^{-beta} - delta is not used there); the difference enters ``head``.
    """
    if not 0 < beta < 2:
        raise ModelError("beta must lie in (0, 2)")
    if not 0 < delta < 1:
        raise ModelError("delta must lie in (0, 1)")
    orders = series_orders(beta)
    if not orders:
        return SeriesQ(beta, C, delta, [], 0.0, "no growing terms: 1/beta - 1/2 <= 0")
    terms = []
    for ell in orders:
        coef = series_coefficient(beta, C, ell)
        ex = -1.0 / beta + ell + 0.5
        terms.append(SeriesTerm(ell, coef, ex, coef * delta**ex))
    head = 0.0
    J = int(math.floor(C ** (1.0 / beta)))
    if J >= 1 and C * J ** (-beta) <= 1.0:
        J -= 1
    if J >= 1:
        table = arccosh_coeffs(orders[-1]).coeffs
        parts = []
        for j in range(1, J + 1):
            z = C * j ** (-beta) - delta
            if z <= 0:
                break
            raw = math.acosh(1.0 + 0.5 * z)
            ser = math.fsum(float(table[ell]) * z ** (ell + 0.5) for ell in orders)
            parts.append(raw - ser)
        head = math.fsum(parts)
    return SeriesQ(beta, C, delta, terms, head)


@dataclass
class ResidualTable:
    beta: float
    C: float
    n_cap: int
    delta_floor: float
    rows: list = field(default_factory=list)  # dicts: delta, N, g, q, residual, ratio
    dropped: list = field(default_factory=list)

    @property
    def ratios(self) -> list[float]:
        return [r["ratio"] for r in self.rows]

    @property
    def max_ratio(self) -> float:
        return max(self.ratios)

    @property
    def bounded(self) -> bool:
        """False only for strict growth that also ends 50% above the start."""
        r = self.ratios
        growing = all(b > a for a, b in zip(r, r[1:]))
        return not (growing and r[-1] > 1.5 * r[0])

    def to_dict(self) -> dict:
        d = asdict(self)
        d["max_ratio"] = self.max_ratio
        d["bounded"] = self.bounded
        return d


def g_minus_series_residual(model: ParameterModel, delta_grid, n_cap: int = 10**8) -> ResidualTable:
    """|g(delta) - Q(delta)| / log(1/delta) along a decreasing delta grid.

    Grid points whose turning index exceeds ``n_cap`` are replaced by the
    floor delta = C n_cap^{-beta}; the replacement is recorded.
    """
    if model.kind != "power-law-b":
        raise ModelError("series residual is defined for the power-law-b model")
    C, beta = model.C, model.beta
    floor = C * float(n_cap) ** (-beta)
    grid = sorted(set(float(d) for d in delta_grid), reverse=True)
    table = ResidualTable(beta, C, n_cap, floor)
    use = []
    for d in grid:
        if d < floor:
            table.dropped.append(d)
            if floor not in use:
                use.append(floor)
        else:
            use.append(d)
    for d in use:
        N = turning_index(model, delta=d)
        g = g_sum(model, delta=d)
        q = q_series(beta, C, d).value
        res = abs(g - q)
        table.rows.append({"delta": d, "N": N, "g": g, "q": q, "residual": res,
                           "ratio": res / math.log(1.0 / d)})
    return table


# ------------------------------------------------------------------ slow-decay sums


@dataclass(frozen=True)
class EdgeSumRatio:
    N: int
    S_N: float
    scale: float  # N sqrt(-f'(log N))
    ratio: float
    lower_bound: float
    holds: bool

    @property
    def gap(self) -> float:
        return SQRT_PI_OVER_2 - self.ratio


def log_gap_sum_ratio(f: MonotoneF, N: int) -> EdgeSumRatio:
    """S_N = sum_{j=2}^N sqrt(f(log j) - f(log N)) against N sqrt(-f'(log N)).

    By convexity f(log j) - f(log N) >= -f'(log N) log(N/j), which gives the
    finite-N lower bound sqrt(-f'(log N)) sum_j sqrt(log(N/j)). The ratio
    S_N / scale tends to sqrt(pi)/2.
    """
    if N < 2:
        raise ValueError("N must be at least 2")
    problems = f.validate()
    if problems:
        raise ModelError("f is not a decreasing convex profile: " + "; ".join(problems))
    t = math.log(N)
    slope = -float(f.deriv(t))
    parts_s, parts_l = [], []
    chunk = 1 << 20
    for start in range(2, N + 1, chunk):
        j = np.arange(start, min(N, start + chunk - 1) + 1, dtype=float)
        gap = np.log(N / j)
        drop = np.maximum(f.drop(t, gap), 0.0)
        parts_s.append(float(np.sum(np.sqrt(drop))))
        parts_l.append(float(np.sum(np.sqrt(gap))))
    S = math.fsum(parts_s)
    lower = math.sqrt(slope) * math.fsum(parts_l)
    scale = N * math.sqrt(slope)
    holds = S >= lower * (1.0 - N * 2.3e-16)
    return EdgeSumRatio(N, S, scale, S / scale, lower, holds)


@dataclass
class LogLawRow:
    x: float
    delta: float
    N: int | None
    N_search: int | None
    g_leading: float | None
    g_direct: float | None
    rel_diff: float | None
    error: str = ""


def log_law_turning(f: MonotoneF, delta: float) -> int:
    """floor(exp(f^{-1}(delta/2))) - 1; raises on overflow."""
    t = f.inverse(delta / 2.0)
    if not t < 43.0:  # e^43 ~ 4.7e18 > int64
        raise OverflowError(f"turning index overflows at delta={delta!r}")
    return int(math.floor(math.exp(t))) - 1


def log_law_edge_profile(f: MonotoneF, x_grid, direct_limit: int = 10**7) -> list[LogLawRow]:
    """N(x) and g(x) ~ sqrt(pi/2) N sqrt(-f'(log N)) for a_n = 1 - f(log(n+1)),
    cross-checked against the direct phase sum when N is small enough."""
    model = ParameterModel.log_law_a(f=f)
    rows = []
    for x in x_grid:
        delta = 2.0 - abs(float(x))
        try:
            N = log_law_turning(f, delta)
        except OverflowError as exc:
            rows.append(LogLawRow(float(x), delta, None, None, None, None, None, str(exc)))
            continue
        if N < 1:
            rows.append(LogLawRow(float(x), delta, N, None, 0.0, None, None, "no hyperbolic region"))
            continue
        lead = math.sqrt(math.pi / 2.0) * N * math.sqrt(-float(f.deriv(math.log(N))))
        N_s = g_d = rel = None
        if N <= direct_limit:
            try:
                N_s = turning_index(model, delta=delta)
                g_d = g_sum(model, delta=delta)
                rel = abs(g_d - lead) / g_d if g_d > 0 else None
            except NoTurningPoint as exc:
                rows.append(LogLawRow(float(x), delta, N, None, lead, None, None, str(exc)))
                continue
        rows.append(LogLawRow(float(x), delta, N, N_s, lead, g_d, rel))
    return rows
