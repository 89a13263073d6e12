"""Shifted and scaled product measures on weighted sequence spaces.

A measure is ``mu = prod_k mu0((. - m_k) / gamma_k)``: coordinate k of a draw
is ``m_k + gamma_k * u_k`` with ``u_k`` i.i.d. from the reference density.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import mc
from .densities import ReferenceDensity, make_besov_ref, make_cauchy_ref, validate_assumptions
from .errors import SpecError
from .weights import (Point, Rule, SpaceSpec, WeightSeq, gamma_summability_check, series_bound,
                      weighted_norm)

__all__ = [
    "ProductMeasureSpec",
    "BesovParams",
    "CauchyParams",
    "make_besov",
    "make_cauchy",
    "make_custom",
    "sample",
    "sample_blocks",
    "SupportRow",
    "support_diagnostic",
    "draws_to_csv",
]


@dataclass(frozen=True, eq=False)
class ProductMeasureSpec:
    """Product measure with reference density, scales gamma, shift m and ambient space."""

    ref: ReferenceDensity
    gamma: WeightSeq
    shift: Point
    ambient: SpaceSpec
    label: str = ""
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.shift.base != "zero":
            raise SpecError("the measure shift must be an absolute point")

    def gamma_values(self, K: int) -> np.ndarray:
        return self.gamma.values(K)

    def shift_values(self, K: int) -> np.ndarray:
        return self.shift.values(K)

    def resolve(self, x: Point) -> Point:
        return x.resolve(self.shift)

    def centered(self, x: Point) -> Point:
        """x - m as an absolute point."""
        return x.resolve(self.shift) - self.shift

    def normalized(self, x: Point) -> Point:
        """(x - m) / gamma coordinatewise."""
        return self.centered(x).divide_by(self.gamma)

    @property
    def family(self) -> str:
        return self.ref.name

    def to_dict(self) -> dict:
        return {"family": self.family, **self.params}


@dataclass(frozen=True)
class BesovParams:
    """Besov measure parameters: smoothness s, dimension d, integrability p, slack eta."""

    s: float
    d: int = 1
    p: float = 2.0
    eta: float = 1.0
    m: Point = field(default_factory=Point)

    def __post_init__(self):
        if int(self.d) != self.d or self.d < 1:
            raise SpecError("d must be a positive integer")
        if not (1.0 <= self.p <= 2.0):
            raise SpecError(f"Besov measures need 1 <= p <= 2, got {self.p}")
        if not self.eta > 0:
            raise SpecError("eta must be positive")
        denom = self.s / self.d + 0.5
        if denom == 0.0:
            raise SpecError("s/d = -1/2 leaves tau undefined")
        if 1.0 / denom <= 0:
            raise SpecError(f"tau = (s/d + 1/2)^-1 must be positive, got {1.0 / denom}")

    @property
    def tau(self) -> float:
        return 1.0 / (self.s / self.d + 0.5)

    @property
    def t(self) -> float:
        return self.s - self.d * (1.0 + self.eta) / self.p

    @property
    def gamma_exponent(self) -> float:
        return -1.0 / self.tau + 1.0 / self.p

    @property
    def delta_exponent(self) -> float:
        return -1.0 / self.tau + (2.0 + self.eta) / self.p

    def gamma_seq(self) -> WeightSeq:
        return WeightSeq.power_law(self.gamma_exponent)

    def delta_seq(self) -> WeightSeq:
        return WeightSeq.power_law(self.delta_exponent)


@dataclass(frozen=True)
class CauchyParams:
    """Cauchy product measure on l^q with scales gamma and shift m."""

    gamma: WeightSeq
    q: float = 1.0
    m: Point = field(default_factory=Point)


def _check_shift(m: Point, ambient: SpaceSpec, K: int = 200) -> None:
    if m.base != "zero":
        raise SpecError("the measure shift must be an absolute point")
    if m.tail:
        res = weighted_norm(m, ambient, K)
        if res.tail_bound is None or math.isinf(res.tail_bound):
            raise SpecError("shift m has no summability certificate in the ambient space")


def make_besov(params: BesovParams) -> ProductMeasureSpec:
    ambient = SpaceSpec(params.p, params.delta_seq())
    _check_shift(params.m, ambient)
    label = f"besov(s={params.s:g},d={params.d},p={params.p:g},eta={params.eta:g})"
    return ProductMeasureSpec(
        ref=make_besov_ref(params.p),
        gamma=params.gamma_seq(),
        shift=params.m,
        ambient=ambient,
        label=label,
        params={"s": params.s, "d": params.d, "p": params.p, "eta": params.eta,
                "tau": params.tau, "t": params.t, "m": params.m.to_dict()},
    )


def _certify_cauchy_gamma(gamma: WeightSeq, q: float) -> dict:
    tail = gamma.tail
    l1 = series_bound([tail], 1.0, gamma.tail_start)
    if not l1.converges:
        raise SpecError("gamma is not certified to lie in l^1")
    cert = {"gamma_l1_tail_bound": l1.bound, "gamma_l1_prefix": float(sum(gamma.prefix))}
    if q == 1.0:
        # |gamma_k log gamma_k| <= |gamma_k| * (|log c| + k |log r| + |a| log k) and log k <= k^eps / eps
        c, r, a = tail.coef, tail.ratio, tail.power
        eps = 0.25
        pieces = [Rule(c * abs(math.log(c)), r, a)] if c != 1.0 else []
        if r != 1.0:
            pieces.append(Rule(c * abs(math.log(r)), r, a + 1.0))
        if a != 0.0:
            pieces.append(Rule(c * abs(a) / eps, r, a + eps))
        total = 0.0
        for piece in pieces:
            b = series_bound([piece], 1.0, gamma.tail_start)
            if not b.converges:
                raise SpecError("sum |gamma_k log gamma_k| is not certified finite (required for q = 1)")
            total += b.bound
        cert["gamma_log_tail_bound"] = total
    return cert


def make_cauchy(params: CauchyParams) -> ProductMeasureSpec:
    if params.q < 1.0:
        raise SpecError("q must be >= 1")
    cert = _certify_cauchy_gamma(params.gamma, params.q)
    ambient = SpaceSpec(params.q, WeightSeq.constant())
    _check_shift(params.m, ambient)
    return ProductMeasureSpec(
        ref=make_cauchy_ref(),
        gamma=params.gamma,
        shift=params.m,
        ambient=ambient,
        label=f"cauchy(q={params.q:g})",
        params={"q": params.q, "gamma": params.gamma.to_dict(), "m": params.m.to_dict(),
                "certificate": cert},
    )


def make_custom(ref: ReferenceDensity, gamma: WeightSeq, ambient: SpaceSpec,
                m: Point | None = None, label: str = "custom") -> ProductMeasureSpec:
    """Product measure from any reference density that passes the assumption checks."""
    if not ref.builtin:
        report = validate_assumptions(ref)
        if not report.usable():
            raise SpecError(f"reference density fails assumption checks: {report.to_dict()}")
    m = m or Point()
    _check_shift(m, ambient)
    summ = gamma_summability_check(gamma, ambient)
    if summ.status == "diverges":
        raise SpecError(summ.warning)
    return ProductMeasureSpec(ref, gamma, m, ambient, label, {"gamma": gamma.to_dict()})


def sample_blocks(spec: ProductMeasureSpec, K: int, n: int, seed: int, fn=None, workers: int = 1) -> list:
    """Apply ``fn`` to each block of draws (shape (K, block)) in block order.

    The draws are exactly those returned by :func:`sample`; use this to reduce
    large samples without holding them in memory.
    """
    if K < 1 or n < 1:
        raise SpecError("K and n must be >= 1")
    g = spec.gamma_values(K)[:, None]
    m = spec.shift_values(K)[:, None]

    def block(rng, size):
        x = m + g * spec.ref.sample(rng, (K, size))
        return x if fn is None else fn(x)

    return mc.run_blocks(seed, n, block, workers)


def sample(spec: ProductMeasureSpec, K: int, n: int, seed: int, workers: int = 1) -> np.ndarray:
    """Draw n samples of the first K coordinates; returns shape (K, n).

    Column j is draw j; row k-1 is coordinate k.  Output depends only on
    (seed, K, n), never on ``workers``.
    """
    return np.concatenate(sample_blocks(spec, K, n, seed, None, workers), axis=1)


@dataclass(frozen=True)
class SupportRow:
    K: int
    mean: float
    median: float
    q90: float
    max: float


def support_diagnostic(spec: ProductMeasureSpec, K_grid, n: int, seed: int,
                       space: SpaceSpec | None = None, center: bool = False,
                       workers: int = 1) -> list[SupportRow]:
    """Distribution of truncated draw norms as the truncation grows.

    Stabilising rows are consistent with the measure charging the space;
    rows growing without bound indicate the draws leave it.
    """
    K_grid = sorted(int(k) for k in K_grid)
    Kmax = K_grid[-1]
    space = space or spec.ambient
    draws = sample(spec, Kmax, n, seed, workers)
    if center:
        draws = draws - spec.shift_values(Kmax)[:, None]
    w = space.weights.values(Kmax)[:, None]
    cum = np.cumsum(np.abs(draws / w) ** space.p, axis=0)
    rows = []
    for K in K_grid:
        norms = cum[K - 1] ** (1.0 / space.p)
        rows.append(SupportRow(K, float(np.mean(norms)), float(np.median(norms)),
                               float(np.quantile(norms, 0.9)), float(np.max(norms))))
    return rows


def draws_to_csv(draws: np.ndarray) -> str:
    K, n = draws.shape
    lines = ["k," + ",".join(f"draw_{j}" for j in range(n))]
    for k in range(K):
        lines.append(f"{k + 1}," + ",".join("%.17g" % v for v in draws[k]))
    return "\n".join(lines) + "\n"
