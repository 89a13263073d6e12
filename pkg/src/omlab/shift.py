"""Quasi-invariance of product measures under shifts.

Shepp's criterion (``sum (h_k/gamma_k)^2 < inf``), one-dimensional Hellinger
integrals, Kakutani products, and log shift densities
``log r_h(x) = sum_k [log rho(z_k - h~_k) - log rho(z_k)]`` with
``z_k = (x_k - m_k)/gamma_k`` and ``h~_k = h_k/gamma_k``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate

from . import mc
from .densities import ReferenceDensity, validate_assumptions
from .errors import HypothesisError, SpecError
from .measures import BesovParams, CauchyParams, ProductMeasureSpec, make_besov, make_cauchy, sample
from .weights import Point, SpaceSpec, compensated_sum, weighted_norm

__all__ = [
    "DichotomyVerdict",
    "shepp_test",
    "hellinger_1d",
    "gaussian_hellinger",
    "KakutaniResult",
    "kakutani_product",
    "ShiftDensityEval",
    "shift_density_generic",
    "shift_density_besov",
    "shift_density_cauchy",
    "log_shift_density_array",
    "ChangeOfVariablesReport",
    "change_of_variables_check",
]

HELLINGER_TOL = 1e-10


@dataclass(frozen=True)
class DichotomyVerdict:
    """Equivalent / singular / undecided, with the partial sum of (h_k/gamma_k)^2."""

    verdict: str
    partial_sum: float
    tail_bound: float | None
    K: int

    def to_dict(self) -> dict:
        return {"verdict": self.verdict, "partial_sum": self.partial_sum,
                "tail_bound": self.tail_bound, "K": self.K}


_A4_CACHE: dict[int, str] = {}


def _require_a4(ref: ReferenceDensity) -> None:
    if ref.builtin:
        return
    key = id(ref)
    if key not in _A4_CACHE:
        _A4_CACHE[key] = validate_assumptions(ref).A4
    if _A4_CACHE[key] == "fail":
        raise HypothesisError("reference density fails the finite Fisher information check")


def shepp_test(spec: ProductMeasureSpec, h: Point, K: int = 1000) -> DichotomyVerdict:
    """Decide whether the h-shifted measure is equivalent to or singular with the original.

    ``h`` is a shift direction (absolute point).  Finite support is decided
    exactly; rule tails through the series certificate engine; anything else
    is undecided.
    """
    _require_a4(spec.ref)
    h = h.resolve(spec.shift)
    res = weighted_norm(h, SpaceSpec(2.0, spec.gamma), K)
    partial = res.partial**2
    if res.tail_bound is None:
        return DichotomyVerdict("undecided", partial, None, K)
    if math.isinf(res.tail_bound):
        return DichotomyVerdict("singular", partial, math.inf, K)
    return DichotomyVerdict("equivalent", partial, res.tail_bound, K)


def gaussian_hellinger(shift) -> np.ndarray:
    """Closed-form Hellinger integral of ``e^{-u^2}/sqrt(pi)`` against its shift."""
    return np.exp(-np.asarray(shift, dtype=float) ** 2 / 4.0)


def hellinger_1d(ref: ReferenceDensity, shift: float) -> float:
    """``int sqrt(rho(u) rho(u - shift)) du`` by adaptive quadrature.

    Evaluated as ``1 - 0.5 * int (sqrt(rho(u)) - sqrt(rho(u - shift)))^2 du``,
    which keeps full relative precision for small shifts.
    """
    shift = float(shift)
    if shift == 0.0:
        return 1.0

    def f(u):
        d = math.sqrt(float(ref.pdf(u))) - math.sqrt(float(ref.pdf(u - shift)))
        return d * d

    lo, hi = sorted((0.0, shift))
    total = 0.0
    for a, b in ((-math.inf, lo), (lo, hi), (hi, math.inf)):
        v, _ = integrate.quad(f, a, b, epsabs=HELLINGER_TOL * 1e-2, epsrel=1e-12, limit=400)
        total += v
    return 1.0 - 0.5 * total


@dataclass(frozen=True)
class KakutaniResult:
    partial_product: float
    log_partial_product: float
    trend: str
    K: int
    log_factors: tuple[float, ...]

    def to_dict(self) -> dict:
        return {"partial_product": self.partial_product, "log_partial_product": self.log_partial_product,
                "trend": self.trend, "K": self.K}


def _normalized_shift_values(spec: ProductMeasureSpec, h: Point, K: int) -> np.ndarray:
    return h.resolve(spec.shift).divide_by(spec.gamma).values(K)


def _log_hellinger_factors(ref: ReferenceDensity, ht: np.ndarray) -> np.ndarray:
    # factors depend only on |h~|; cache repeated values
    out = np.empty(ht.size)
    cache: dict[float, float] = {}
    for i, v in enumerate(np.abs(ht).tolist()):
        if v not in cache:
            cache[v] = 0.0 if v == 0.0 else math.log(hellinger_1d(ref, v))
        out[i] = cache[v]
    return out


def _classify_trend(log_factors: np.ndarray) -> str:
    """Classify partial products over doubling windows.

    The increment of ``-log prod`` over window (K/2, K] shrinks geometrically
    when the product converges to a positive limit and stays comparable when
    it drifts to zero.
    """
    K = log_factors.size
    cum = np.cumsum(-log_factors)
    edges = []
    k = 8
    while k <= K:
        edges.append(k)
        k *= 2
    if len(edges) < 4:
        return "undecided"
    incs = [cum[b - 1] - cum[a - 1] for a, b in zip(edges, edges[1:])]
    tail = incs[-3:]
    if all(v == 0.0 for v in tail):
        return "positive-limit"
    ratios = [b / a if a > 0 else math.inf for a, b in zip(tail, tail[1:])]
    if all(r < 0.9 for r in ratios):
        return "positive-limit"
    if all(r >= 0.97 for r in ratios):
        return "decaying-to-zero"
    return "undecided"


def kakutani_product(spec: ProductMeasureSpec, h: Point, K: int = 2048) -> KakutaniResult:
    """Partial Hellinger product over k <= K and its independent trend classification."""
    ht = _normalized_shift_values(spec, h, K)
    logs = _log_hellinger_factors(spec.ref, ht)
    lp = compensated_sum(logs)
    return KakutaniResult(math.exp(lp), lp, _classify_trend(logs), K, tuple(logs[:64].tolist()))


@dataclass(frozen=True)
class ShiftDensityEval:
    log_value: float
    K: int
    per_term_log: tuple[float, ...]
    exact: bool

    @property
    def value(self) -> float:
        return math.exp(self.log_value)

    def to_dict(self) -> dict:
        return {"log_value": self.log_value, "value": self.value, "K": self.K,
                "per_term_log": list(self.per_term_log), "exact": self.exact}


def _evaluation_range(spec: ProductMeasureSpec, h: Point, x: Point, K: int | None) -> tuple[int, bool]:
    hs = h.resolve(spec.shift)
    if hs.finite_support:
        Kmin = max(hs.support_max, 1)
        return (K or Kmin), (K is None or K >= Kmin)
    if K is None:
        raise SpecError("a rule-tailed shift needs an explicit truncation K")
    return K, False


def _require_equivalent(spec: ProductMeasureSpec, h: Point) -> None:
    v = shepp_test(spec, h)
    if v.verdict != "equivalent":
        raise HypothesisError(f"shift is not certified to lie in the quasi-invariance space ({v.verdict})")


def shift_density_generic(spec: ProductMeasureSpec, h: Point, x: Point, K: int | None = None) -> ShiftDensityEval:
    """``log r_h(x)`` from the reference log-density; exact when h has finite support."""
    _require_equivalent(spec, h)
    K, exact = _evaluation_range(spec, h, x, K)
    z = spec.normalized(x).values(K)
    ht = _normalized_shift_values(spec, h, K)
    terms = spec.ref.neg_log(z) - spec.ref.neg_log(z - ht)
    return ShiftDensityEval(compensated_sum(terms), K, tuple(np.asarray(terms).tolist()), exact)


def shift_density_besov(params: BesovParams, h: Point, x: Point, K: int | None = None) -> ShiftDensityEval:
    """Closed form ``sum gamma_k^-p (|x_k - m_k|^p - |x_k - m_k - h_k|^p)``."""
    spec = make_besov(params)
    _require_equivalent(spec, h)
    K, exact = _evaluation_range(spec, h, x, K)
    g = spec.gamma_values(K)
    d = spec.centered(x).values(K)
    hv = h.resolve(spec.shift).values(K)
    p = params.p
    terms = g**-p * (np.abs(d) ** p - np.abs(d - hv) ** p)
    return ShiftDensityEval(compensated_sum(terms), K, tuple(terms.tolist()), exact)


def shift_density_cauchy(params: CauchyParams, h: Point, x: Point, K: int | None = None) -> ShiftDensityEval:
    """Closed form ``sum log(((x_k - m_k)^2 + gamma_k^2) / ((x_k - m_k - h_k)^2 + gamma_k^2))``."""
    spec = make_cauchy(params)
    _require_equivalent(spec, h)
    K, exact = _evaluation_range(spec, h, x, K)
    g2 = spec.gamma_values(K) ** 2
    d = spec.centered(x).values(K)
    hv = h.resolve(spec.shift).values(K)
    terms = np.log(d * d + g2) - np.log((d - hv) ** 2 + g2)
    return ShiftDensityEval(compensated_sum(terms), K, tuple(terms.tolist()), exact)


def log_shift_density_array(spec: ProductMeasureSpec, h: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Vectorised ``log r_h`` on the columns of x (shape (K, n)) for a truncated shift vector h."""
    x = np.asarray(x, dtype=float)
    K = x.shape[0]
    g, m = spec.gamma_values(K)[:, None], spec.shift_values(K)[:, None]
    z = (x - m) / g
    ht = np.asarray(h, dtype=float)[:, None] / g
    return np.sum(spec.ref.neg_log(z) - spec.ref.neg_log(z - ht), axis=0)


@dataclass(frozen=True)
class ChangeOfVariablesReport:
    lhs: float
    rhs: float
    stderr: float
    z: float
    n: int
    seed: int

    def to_dict(self) -> dict:
        return {"lhs": self.lhs, "rhs": self.rhs, "stderr": self.stderr, "z": self.z,
                "n": self.n, "seed": self.seed}


def change_of_variables_check(spec: ProductMeasureSpec, h: Point, f: Callable[[np.ndarray], np.ndarray],
                              K: int, n: int, seed: int, workers: int = 1) -> ChangeOfVariablesReport:
    """Compare ``E[f(x) r_h(x)]`` with ``E[f(x + h)]`` on shared draws.

    The z-score uses the standard error of the paired differences.  ``f`` maps
    an array of shape (K, n) to n values.
    """
    _require_equivalent(spec, h)
    hv = h.resolve(spec.shift).values(K)
    if h.resolve(spec.shift).support_max > K or h.resolve(spec.shift).tail:
        raise SpecError("the shift must be supported within the first K coordinates")
    x = sample(spec, K, n, seed, workers)
    a = f(x) * np.exp(log_shift_density_array(spec, hv, x))
    b = f(x + hv[:, None])
    diff = mc.mean_estimate(a - b, seed)
    lhs, rhs = float(np.mean(a)), float(np.mean(b))
    z = 0.0 if diff.stderr == 0.0 and lhs == rhs else diff.z(0.0)
    return ChangeOfVariablesReport(lhs, rhs, diff.stderr, z, n, seed)
