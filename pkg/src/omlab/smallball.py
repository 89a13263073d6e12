"""Small-ball masses, ball-mass ratios and one-dimensional integral inequalities.

Ball masses are those of the truncated measure on the first K coordinates,
estimated by Monte Carlo (any K) or by nested adaptive quadrature (K <= 3).
Numerator and denominator of every ratio use the same draws.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import integrate

from . import mc
from .densities import ReferenceDensity, validate_assumptions
from .errors import HypothesisError, InsufficientSamples, SpecError
from .measures import ProductMeasureSpec, sample_blocks
from .om import formal_neg_log_density
from .shift import shift_density_generic
from .weights import Point, SpaceSpec

__all__ = [
    "BallSpec",
    "mc_ball_mass",
    "quad_ball_mass",
    "RatioRow",
    "om_ratio_experiment",
    "continuity_ratio_check",
    "ratio_rows_to_csv",
    "LemmaCheck",
    "lemma_1d_inequality_check",
    "besov_shift_inequality_check",
    "TaylorRow",
    "TaylorReport",
    "perturbation_taylor_check",
    "lemma_suite",
]

QUAD_EPSABS = 1e-11
LEMMA_EPSABS = 1e-12
LEMMA_TOL = 1e-9


@dataclass(frozen=True)
class BallSpec:
    """Open ball ``sum_{k<=K} |(y_k - c_k)/alpha_k|^p < r^p`` in the truncated metric."""

    center: Point
    radius: float
    metric: SpaceSpec
    K: int

    def __post_init__(self):
        if not self.radius > 0:
            raise SpecError("ball radius must be positive")
        if self.K < 1:
            raise SpecError("ball truncation K must be >= 1")


def _dist_p(x: np.ndarray, c: np.ndarray, metric: SpaceSpec) -> np.ndarray:
    w = metric.weights.values(x.shape[0])[:, None]
    return np.sum(np.abs((x - c[:, None]) / w) ** metric.p, axis=0)


def _distances(spec: ProductMeasureSpec, centers: Sequence[np.ndarray], metric: SpaceSpec,
               K: int, n: int, seed: int, workers: int) -> np.ndarray:
    """p-th power distances of n draws to each center; shape (len(centers), n)."""
    def fn(x):
        return np.stack([_dist_p(x, c, metric) for c in centers])
    return np.concatenate(sample_blocks(spec, K, n, seed, fn, workers), axis=1)


def mc_ball_mass(spec: ProductMeasureSpec, ball: BallSpec, n: int, seed: int, workers: int = 1) -> mc.MCEstimate:
    c = ball.center.values(ball.K, spec.shift)
    d = _distances(spec, [c], ball.metric, ball.K, n, seed, workers)[0]
    return mc.proportion_estimate(int(np.count_nonzero(d < ball.radius**ball.metric.p)), n, seed)


def _marginal_mass(ref: ReferenceDensity, lo: float, hi: float) -> float:
    if ref.cdf is not None:
        if lo >= 0:
            # upper-tail differences keep precision away from the origin
            return float(ref.cdf(-lo) - ref.cdf(-hi))
        return float(ref.cdf(hi) - ref.cdf(lo))
    return integrate.quad(ref.pdf, lo, hi, epsabs=QUAD_EPSABS, epsrel=1e-12, limit=200)[0]


def quad_ball_mass(spec: ProductMeasureSpec, ball: BallSpec, epsabs: float = QUAD_EPSABS) -> float:
    """Truncated ball mass by nested quadrature over the reduced radius.

    With ``u_j = (y_j - c_j)/alpha_j``, the mass is the integral over the
    first coordinate of its marginal density times the mass of the remaining
    coordinates in the ball of radius ``(r^p - |u_1|^p)^(1/p)``.
    """
    K = ball.K
    if K > 3:
        raise SpecError("nested quadrature supports K <= 3 only")
    p = ball.metric.p
    c = ball.center.values(K, spec.shift)
    a = ball.metric.weights.values(K)
    g, m = spec.gamma_values(K), spec.shift_values(K)
    ref = spec.ref

    def mass(j: int, rad_p: float) -> float:
        if rad_p <= 0.0:
            return 0.0
        R = rad_p ** (1.0 / p)
        if j == K - 1:
            lo = (c[j] - a[j] * R - m[j]) / g[j]
            hi = (c[j] + a[j] * R - m[j]) / g[j]
            return _marginal_mass(ref, lo, hi)

        def integrand(u):
            y = c[j] + a[j] * u
            dens = float(ref.pdf((y - m[j]) / g[j])) * a[j] / g[j]
            return dens * mass(j + 1, rad_p - abs(u) ** p)

        pts = [0.0]
        peak = (m[j] - c[j]) / a[j]
        if -R < peak < R:
            pts.append(peak)
        pts = sorted(set(pts))
        edges = [-R] + pts + [R]
        total = 0.0
        for lo, hi in zip(edges, edges[1:]):
            if hi > lo:
                total += integrate.quad(integrand, lo, hi, epsabs=epsabs, epsrel=1e-10, limit=200)[0]
        return total

    return mass(0, ball.radius**p)


@dataclass(frozen=True)
class RatioRow:
    r: float
    K: int
    n: int
    est: float
    stderr: float
    predicted: float
    z: float
    quad: float | None = None
    z_quad: float | None = None
    num_hits: int = 0
    den_hits: int = 0


def _ratio_stats(A: np.ndarray, B: np.ndarray) -> tuple[float, float]:
    n = A.size
    a, b = A.mean(), B.mean()
    if b == 0.0:
        raise InsufficientSamples("no draws fell in the reference ball; increase n")
    c = np.mean(A & B)
    R = a / b
    var = (a * (1 - a) / b**2 + a * a * b * (1 - b) / b**4 - 2 * a * (c - a * b) / b**3) / n
    return float(R), float(math.sqrt(max(var, 0.0)))


def _z(est: float, target: float, se: float) -> float:
    if se == 0.0:
        return 0.0 if est == target else math.copysign(math.inf, est - target)
    return (est - target) / se


def _ratio_table(spec, num_center, den_center, predicted, r_grid, K, n, seed, metric, workers, quad):
    metric = metric or spec.ambient
    cn = num_center.values(K, spec.shift)
    cd = den_center.values(K, spec.shift)
    d = _distances(spec, [cn, cd], metric, K, n, seed, workers)
    use_quad = quad if quad is not None else K <= 3
    rows = []
    for r in sorted(r_grid, reverse=True):
        rp = r**metric.p
        A, B = d[0] < rp, d[1] < rp
        est, se = _ratio_stats(A, B)
        qv = zq = None
        if use_quad:
            num = quad_ball_mass(spec, BallSpec(num_center, r, metric, K))
            den = quad_ball_mass(spec, BallSpec(den_center, r, metric, K))
            qv = num / den
            zq = _z(est, qv, se)
        rows.append(RatioRow(float(r), K, n, est, se, predicted, _z(est, predicted, se), qv, zq,
                             int(A.sum()), int(B.sum())))
    return rows


def om_ratio_experiment(spec: ProductMeasureSpec, h: Point, r_grid: Sequence[float], K: int, n: int,
                        seed: int, metric: SpaceSpec | None = None, workers: int = 1,
                        quad: bool | None = None) -> list[RatioRow]:
    """Ball-mass ratio ``mu(B(h,r)) / mu(B(m,r))`` against ``exp(-q_{gamma,m}(h))``."""
    hc = spec.centered(h)
    if not hc.finite_support or hc.support_max > K:
        raise SpecError("h - m must have finite support within the first K coordinates")
    ev = formal_neg_log_density(spec, h)
    predicted = math.exp(-ev.value)
    return _ratio_table(spec, h, Point.at_shift(), predicted, r_grid, K, n, seed, metric, workers, quad)


def continuity_ratio_check(spec: ProductMeasureSpec, x_star: Point, h: Point, r_grid: Sequence[float],
                           K: int, n: int, seed: int, metric: SpaceSpec | None = None, workers: int = 1,
                           quad: bool | None = None) -> list[RatioRow]:
    """Ratio ``mu(B(x*+h,r)) / mu(B(x*,r))`` against the shift density ``r_{-h}(x*)``."""
    hs = h.resolve(spec.shift)
    xs = x_star.resolve(spec.shift)
    if not (hs.finite_support and xs.finite_support) or max(hs.support_max, xs.support_max) > K:
        raise SpecError("x* and h must have finite support within the first K coordinates")
    predicted = shift_density_generic(spec, -hs, xs).value
    return _ratio_table(spec, xs + hs, xs, predicted, r_grid, K, n, seed, metric, workers, quad)


def ratio_rows_to_csv(rows: Sequence[RatioRow]) -> str:
    has_quad = any(r.quad is not None for r in rows)
    head = "r,K,n,est,stderr,predicted,z" + (",quad,z_quad" if has_quad else "")
    out = [head]
    for r in rows:
        line = f"{r.r:.17g},{r.K},{r.n},{r.est:.17g},{r.stderr:.17g},{r.predicted:.17g},{r.z:.17g}"
        if has_quad:
            line += f",{r.quad:.17g},{r.z_quad:.17g}"
        out.append(line)
    return "\n".join(out) + "\n"


@dataclass(frozen=True)
class LemmaCheck:
    lhs: float
    rhs: float
    passed: bool
    params: dict = field(default_factory=dict)


def _symmetric_decay(fn: Callable, T: float, name: str, n: int = 1001) -> None:
    u = np.linspace(0.0, T, n)
    vals = np.array([float(fn(x)) for x in u])
    mirror = np.array([float(fn(-x)) for x in u])
    if np.max(np.abs(vals - mirror)) > 1e-12 * max(1.0, float(np.max(np.abs(vals)))):
        raise HypothesisError(f"{name} is not even on the grid")
    if np.any(np.diff(vals) > 1e-12 * max(1.0, float(np.max(np.abs(vals))))):
        raise HypothesisError(f"{name} is not nonincreasing on [0, {T:g}]")


def _quad_pieces(fn: Callable, lo: float, hi: float, breaks: Sequence[float]) -> float:
    pts = sorted({b for b in breaks if lo < b < hi})
    edges = [lo] + pts + [hi]
    return sum(integrate.quad(fn, a, b, epsabs=LEMMA_EPSABS, epsrel=1e-12, limit=400)[0]
               for a, b in zip(edges, edges[1:]) if b > a)


def lemma_1d_inequality_check(f: Callable, g: Callable, s: float, v: float,
                              f_breaks: Sequence[float] = (), g_breaks: Sequence[float] = (),
                              validate: bool = True) -> LemmaCheck:
    """``int_{-s}^{s} f(u+v) g(u) du <= int_{-s}^{s} f(u) g(u) du`` for symmetric-decay f, g."""
    if s <= 0:
        raise SpecError("s must be positive")
    if validate:
        _symmetric_decay(f, s + abs(v), "f")
        _symmetric_decay(g, s, "g")
    fb = list(f_breaks) + [-b for b in f_breaks]
    gb = list(g_breaks) + [-b for b in g_breaks]
    lhs = _quad_pieces(lambda u: f(u + v) * g(u), -s, s, [b - v for b in fb] + gb + [-v, 0.0])
    rhs = _quad_pieces(lambda u: f(u) * g(u), -s, s, fb + gb + [0.0])
    return LemmaCheck(lhs, rhs, bool(lhs <= rhs + LEMMA_TOL), {"s": s, "v": v})


def besov_shift_inequality_check(p: float, lam: Callable, s: float, v: float,
                                 lam_breaks: Sequence[float] = (), validate: bool = True) -> LemmaCheck:
    """``int_{-s}^{s} e^{-|u+v|^p} lam(u) du >= e^{-|v|^p} int_{-s}^{s} e^{-|u|^p} lam(u) du``.

    Returns the left side and the full right side (already multiplied by
    ``e^{-|v|^p}``).
    """
    if not (1.0 <= p <= 2.0):
        raise SpecError("p must lie in [1, 2]")
    if validate:
        u = np.linspace(0.0, s, 1001)
        a = np.array([float(lam(x)) for x in u])
        b = np.array([float(lam(-x)) for x in u])
        if np.any(a < 0) or np.max(np.abs(a - b)) > 1e-12 * max(1.0, float(np.max(a))):
            raise HypothesisError("lambda must be even and nonnegative")
    lb = list(lam_breaks) + [-b for b in lam_breaks]
    lhs = _quad_pieces(lambda u: math.exp(-abs(u + v) ** p) * lam(u), -s, s, lb + [-v, 0.0])
    base = _quad_pieces(lambda u: math.exp(-abs(u) ** p) * lam(u), -s, s, lb + [0.0])
    rhs = math.exp(-abs(v) ** p) * base
    return LemmaCheck(lhs, rhs, bool(lhs >= rhs - LEMMA_TOL), {"p": p, "s": s, "v": v})


@dataclass(frozen=True)
class TaylorRow:
    v: float
    F: float
    zeta: float


@dataclass(frozen=True)
class TaylorReport:
    rows: tuple[TaylorRow, ...]
    F0: float
    zeta_limit: float
    zeta_bound: float
    max_abs_zeta: float
    first_derivative_at_zero: float
    bounded: bool


def perturbation_taylor_check(ref: ReferenceDensity, lam: Callable, s: float, v_grid: Sequence[float],
                              lam_breaks: Sequence[float] = (), validate: bool = True) -> TaylorReport:
    """``F(v) = int_{-s}^{s} rho(u+v) lam(u) du`` written as ``(1 + zeta v^2) F(0)``.

    Since ``F'(0) = 0`` for even lam, Taylor's theorem puts every ``zeta(v)``
    within ``max_{|w|<=|v|} |F''(w)| / (2 F(0))``; the report compares the grid
    values of zeta against that bound (F'' by second differences) and against
    the limit ``F''(0) / (2 F(0))``.
    """
    if validate:
        rep = validate_assumptions(ref)
        if rep.A5 != "pass":
            raise HypothesisError("reference density needs a C^2 density with integrable second derivative")
        _symmetric_decay(lam, s, "lambda")
    if any(abs(v) > 1 for v in v_grid):
        raise SpecError("v must satisfy |v| <= 1")
    lb = list(lam_breaks) + [-b for b in lam_breaks]

    def F(v):
        return _quad_pieces(lambda u: float(ref.pdf(u + v)) * lam(u), -s, s, lb + [-v, 0.0])

    F0 = F(0.0)
    rows = []
    for v in v_grid:
        if v == 0.0:
            continue
        Fv = F(v)
        rows.append(TaylorRow(float(v), Fv, (Fv / F0 - 1.0) / (v * v)))
    h = 1e-2
    vmax = max(abs(v) for v in v_grid)
    ws = np.linspace(-vmax, vmax, 41)
    fpp = [(F(w + h) - 2 * F(w) + F(w - h)) / (h * h) for w in ws]
    bound = max(abs(x) for x in fpp) / (2 * F0)
    limit = (F(h) - 2 * F0 + F(-h)) / (h * h) / (2 * F0)
    d1 = (F(h) - F(-h)) / (2 * h)
    max_zeta = max(abs(r.zeta) for r in rows) if rows else 0.0
    # second differences smooth F'' over +-h; allow that slack plus quadrature noise
    slack = 1e-3 * max(1.0, bound) + 4 * LEMMA_EPSABS / (F0 * min(v * v for v in v_grid if v))
    return TaylorReport(tuple(rows), F0, limit, bound, max_zeta, d1, bool(max_zeta <= bound + slack))


def _decay_family(rng: np.random.Generator) -> tuple[str, Callable, list[float]]:
    """A random even function, nonincreasing on [0, inf), with its kink points."""
    kind = rng.choice(["gauss", "cauchy", "laplace", "box", "tent"])
    a = float(rng.uniform(0.3, 3.0))
    if kind == "gauss":
        return f"exp(-{a:.3g}u^2)", lambda u: math.exp(-a * u * u), []
    if kind == "cauchy":
        return f"1/(1+{a:.3g}u^2)", lambda u: 1.0 / (1.0 + a * u * u), []
    if kind == "laplace":
        return f"exp(-{a:.3g}|u|)", lambda u: math.exp(-a * abs(u)), [0.0]
    if kind == "box":
        return f"1[|u|<={a:.3g}]", lambda u: float(abs(u) <= a), [a]
    return f"max(0,1-|u|/{a:.3g})", lambda u: max(0.0, 1.0 - abs(u) / a), [0.0, a]


def lemma_suite(kind: str, cases: int, seed: int) -> list[tuple[str, LemmaCheck]]:
    """Randomised cases for the one-dimensional lemma checks.

    ``kind`` is ``"1d"`` (shifted symmetric-decay pairs) or ``"besov"``
    (shifted exp(-|u|^p) weights with p cycling through 1, 1.5, 2).
    """
    rng = np.random.default_rng(seed)
    out = []
    for i in range(cases):
        s = float(rng.uniform(0.2, 3.0))
        v = float(rng.uniform(-4.0, 4.0))
        if kind == "1d":
            nf, f, fb = _decay_family(rng)
            ng, g, gb = _decay_family(rng)
            out.append((f"f={nf};g={ng}", lemma_1d_inequality_check(f, g, s, v, fb, gb)))
        elif kind == "besov":
            p = (1.0, 1.5, 2.0)[i % 3]
            nl, lam, lb = _decay_family(rng)
            out.append((f"p={p:g};lambda={nl}", besov_shift_inequality_check(p, lam, s, v, lb)))
        else:
            raise SpecError(f"unknown lemma suite {kind!r}")
    return out
