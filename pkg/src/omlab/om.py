"""Onsager-Machlup functionals of product measures.

For a product measure with reference negative log-density q the candidate
functional is ``q_{gamma,m}(h) = sum_k q((h_k - m_k) / gamma_k)`` on its
finiteness domain E and +inf elsewhere.  This module evaluates it exactly for
finite-support perturbations and with certified tail bounds for rule tails,
inverts q to build the per-coordinate sublevel boxes, and probes Gamma
convergence along explicit recovery sequences.
"""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import HypothesisError, SpecError
from .measures import BesovParams, CauchyParams, ProductMeasureSpec, make_besov, make_cauchy
from .weights import Point, SpaceSpec, compensated_sum, merge_rules, series_bound, sup_bound, weighted_norm

__all__ = [
    "OmEvaluation",
    "formal_neg_log_density",
    "om_besov",
    "om_cauchy",
    "neg_log_density_array",
    "SublevelBox",
    "invert_q",
    "sublevel_box",
    "recovery_sequence",
    "on_space",
    "besov_family",
    "cauchy_family",
    "ProbeRow",
    "validate_gamma_family",
    "gamma_probe",
    "probe_to_csv",
]

DEFAULT_TAIL_K = 100_000


@dataclass(frozen=True)
class OmEvaluation:
    """Value of a negative log-density functional at a point.

    ``in_e`` is True, False or None (undecided).  For rule-tailed points
    ``value`` equals the partial sum and the true value lies in
    ``[value, value + tail_bound]``; ``value`` is ``nan`` when undecided.
    """

    value: float
    in_e: bool | None
    partial_sum: float
    tail_bound: float | None
    K: int

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


def neg_log_density_array(spec: ProductMeasureSpec, x: np.ndarray) -> np.ndarray:
    """q_{gamma,m} of the columns of x (shape (K,) or (K, n)), truncated at K."""
    x = np.asarray(x, dtype=float)
    K = x.shape[0]
    g, m = spec.gamma_values(K), spec.shift_values(K)
    if x.ndim == 2:
        g, m = g[:, None], m[:, None]
    return np.sum(spec.ref.neg_log((x - m) / g), axis=0)


def _tail_cutoff(rules, start: int) -> int | None:
    """First index beyond which |sum rules(k)| <= 1 is guaranteed."""
    for cutoff in (start, start + 10, start + 100, start + 1000, start + 10_000, start + 100_000):
        total = 0.0
        for r in rules:
            s = sup_bound(abs(r), cutoff)
            if s is None:
                return None
            total += s
        if total <= 1.0:
            return cutoff
    return None


def formal_neg_log_density(spec: ProductMeasureSpec, h: Point, K: int | None = None) -> OmEvaluation:
    """Evaluate ``sum_k q((h_k - m_k)/gamma_k)`` with an honest membership verdict."""
    z = spec.normalized(h)
    q = spec.ref.neg_log
    if z.finite_support:
        Kz = max(z.support_max, 1)
        keys = sorted(z.delta)
        terms = q(np.array([z.delta[k] for k in keys])) if keys else np.zeros(0)
        val = compensated_sum(terms)
        return OmEvaluation(val, True, val, 0.0, Kz)

    rules = merge_rules(z.tail)
    K = K or max(DEFAULT_TAIL_K, z.support_max, z.tail_start)
    partial = compensated_sum(q(z.values(K)))
    if not math.isfinite(partial):
        return OmEvaluation(math.inf, False, partial, math.inf, K)
    if not rules[0].vanishes():
        # the dominant rule keeps |z_k| bounded away from zero, so q(z_k) does too
        return OmEvaluation(math.inf, False, partial, math.inf, K)
    e = spec.ref.q_small_exponent
    bounds = spec.ref.q_small_bounds
    if e is None or bounds is None:
        return OmEvaluation(math.nan, None, partial, None, K)
    c_lo, c_up = bounds
    cutoff = _tail_cutoff(rules, max(K, z.tail_start, z.support_max))
    if cutoff is None:
        return OmEvaluation(math.nan, None, partial, None, K)
    exact = 0.0
    if cutoff > K:
        exact = compensated_sum(q(z.values(cutoff)[K:]))
    sb = series_bound(rules, e, cutoff)
    if sb.diverges:
        # q >= c_lo |u|^e on |u| <= 1 and the comparison series diverges
        return OmEvaluation(math.inf, False, partial, math.inf, K)
    if not sb.converges:
        return OmEvaluation(math.nan, None, partial, None, K)
    return OmEvaluation(partial, True, partial, exact + c_up * sb.bound, K)


def om_besov(params: BesovParams, h: Point, K: int | None = None) -> OmEvaluation:
    """Closed form ``||h - m||_{l^p_gamma}^p`` through the weighted-norm engine."""
    spec = make_besov(params)
    d = spec.centered(h)
    space = SpaceSpec(params.p, spec.gamma)
    if d.finite_support:
        Kd = max(d.support_max, 1)
        res = weighted_norm(d, space, Kd)
        val = res.partial**params.p
        return OmEvaluation(val, True, val, 0.0, Kd)
    K = K or max(DEFAULT_TAIL_K, d.support_max, d.tail_start)
    res = weighted_norm(d, space, K)
    partial = res.partial**params.p
    if res.tail_bound is None:
        return OmEvaluation(math.nan, None, partial, None, K)
    if math.isinf(res.tail_bound):
        return OmEvaluation(math.inf, False, partial, math.inf, K)
    return OmEvaluation(partial, True, partial, res.tail_bound, K)


def om_cauchy(params: CauchyParams, h: Point, K: int | None = None) -> OmEvaluation:
    """Closed form ``sum_k log(1 + ((h_k - m_k)/gamma_k)^2)``, finite iff h - m in l^2_gamma."""
    spec = make_cauchy(params)
    d = spec.centered(h)
    z = d.divide_by(spec.gamma)
    space = SpaceSpec(2.0, spec.gamma)
    Kd = max(z.support_max, z.tail_start if z.tail else 0, 1)
    if z.finite_support:
        u = z.values(Kd)
        val = compensated_sum(np.log1p(u * u))
        return OmEvaluation(val, True, val, 0.0, Kd)
    K = K or max(DEFAULT_TAIL_K, Kd)
    u = z.values(K)
    partial = compensated_sum(np.log1p(u * u))
    res = weighted_norm(d, space, K)
    if res.tail_bound is None:
        return OmEvaluation(math.nan, None, partial, None, K)
    if math.isinf(res.tail_bound):
        return OmEvaluation(math.inf, False, partial, math.inf, K)
    # log(1 + u^2) <= u^2
    return OmEvaluation(partial, True, partial, res.tail_bound, K)


def invert_q(q: Callable, t: float, max_iter: int = 200, tol: float = 1e-12) -> float:
    """Smallest a >= 0 with q(a) >= t, by doubling and bisection (upper bracket)."""
    if t <= 0.0:
        return 0.0
    lo, hi = 0.0, 1.0
    while float(q(hi)) < t:
        lo, hi = hi, 2.0 * hi
        if hi > 1e300:
            return math.inf
    for _ in range(max_iter):
        if hi - lo <= tol * max(1.0, hi):
            break
        mid = 0.5 * (lo + hi)
        if float(q(mid)) < t:
            lo = mid
        else:
            hi = mid
    return hi


@dataclass(frozen=True, eq=False)
class SublevelBox:
    """Coordinate box ``|x_k - m_k| <= gamma_k * a`` containing ``{q_{gamma,m} <= t}``."""

    t: float
    a: float
    spec: ProductMeasureSpec

    @property
    def empty(self) -> bool:
        return self.t < 0

    def intervals(self, K: int) -> tuple[np.ndarray, np.ndarray]:
        m, g = self.spec.shift_values(K), self.spec.gamma_values(K)
        return m - g * self.a, m + g * self.a

    def contains(self, x: np.ndarray) -> np.ndarray:
        """Membership of the columns of x in the truncated box."""
        if self.empty:
            return np.zeros(np.asarray(x).shape[1:] or (), dtype=bool)
        x = np.asarray(x, dtype=float)
        lo, hi = self.intervals(x.shape[0])
        if x.ndim == 2:
            lo, hi = lo[:, None], hi[:, None]
        return np.all((x >= lo) & (x <= hi), axis=0)

    def to_dict(self, K: int = 0) -> dict:
        d = {"t": self.t, "a": self.a, "empty": self.empty}
        if K:
            lo, hi = self.intervals(K)
            d["lower"], d["upper"] = lo.tolist(), hi.tolist()
        return d


def sublevel_box(spec: ProductMeasureSpec, t: float) -> SublevelBox:
    if t < 0:
        return SublevelBox(t, math.nan, spec)
    return SublevelBox(t, invert_q(spec.ref.neg_log, t), spec)


def recovery_sequence(spec_n: ProductMeasureSpec, spec_inf: ProductMeasureSpec, x: Point) -> Point:
    """``m^(n) + (gamma^(n)/gamma^(inf)) (x - m^(inf))``, returned relative to m^(n)."""
    d = spec_inf.centered(x).divide_by(spec_inf.gamma).multiply_by(spec_n.gamma)
    return Point("shift", d.delta, d.tail, d.tail_start)


def on_space(spec: ProductMeasureSpec, ambient: SpaceSpec) -> ProductMeasureSpec:
    """Same measure regarded on another ambient space."""
    return dataclasses.replace(spec, ambient=ambient)


def besov_family(base: BesovParams, n: int, shift: Callable[[int], Point] | None = None) -> ProductMeasureSpec:
    """Member n of ``s^(n) = s + 1/n`` on the ambient space of the limit measure."""
    limit = make_besov(base)
    m = shift(n) if shift else base.m
    pn = dataclasses.replace(base, s=base.s + 1.0 / n, m=m)
    return on_space(make_besov(pn), limit.ambient)


def cauchy_family(base: CauchyParams, n: int) -> ProductMeasureSpec:
    """Member n of ``gamma^(n) = (1 + 1/n) gamma``."""
    g = base.gamma
    scaled = dataclasses.replace(g, prefix=tuple((1 + 1.0 / n) * v for v in g.prefix),
                                 tail=g.tail * (1 + 1.0 / n), kind=g.kind + "*", params=())
    return make_cauchy(dataclasses.replace(base, gamma=scaled))


@dataclass(frozen=True)
class ProbeRow:
    n: int
    I_n_recovery: float
    I_inf: float
    gap: float
    I_n_constant: float


def validate_gamma_family(family: Sequence[ProductMeasureSpec], limit: ProductMeasureSpec,
                          K: int = 2000, grid=None) -> dict:
    """Grid checks of the Gamma-convergence hypotheses; raises HypothesisError."""
    grid = np.linspace(-20, 20, 4001) if grid is None else grid
    X = limit.ambient
    w = X.weights.values(K)
    m_inf, g_inf = limit.shift_values(K), limit.gamma_values(K)

    def dist(a, b):
        return float(np.sum(np.abs((a - b) / w) ** X.p) ** (1.0 / X.p))

    dm = [dist(s.shift_values(K), m_inf) for s in family]
    dg = [dist(s.gamma_values(K), g_inf) for s in family]
    q_inf = limit.ref.neg_log(grid)
    q_excess = [float(np.max(s.ref.neg_log(grid) - q_inf)) for s in family]
    report = {"shift_dist": dm, "gamma_dist": dg, "q_excess": q_excess}

    def to_zero(seq):
        if seq[-1] <= 1e-12:
            return True
        return seq[-1] < seq[0] and all(b <= a + 1e-12 for a, b in zip(seq, seq[1:]))

    if not to_zero(dm):
        raise HypothesisError(f"shifts do not approach the limit shift on the grid: {dm}")
    if not to_zero(dg):
        raise HypothesisError(f"scales do not approach the limit scales on the grid: {dg}")
    tail = q_excess[len(q_excess) // 2:]
    if any(v > 1e-12 for v in tail):
        raise HypothesisError(f"q^(n) exceeds the limit q on the grid: {q_excess}")
    return report


def gamma_probe(family: Callable[[int], ProductMeasureSpec] | Sequence[ProductMeasureSpec],
                limit: ProductMeasureSpec, x: Point, n_grid: Sequence[int],
                validate: bool = True) -> list[ProbeRow]:
    """Recovery-sequence gap and constant-sequence value for each n."""
    specs = [family(n) for n in n_grid] if callable(family) else list(family)
    if len(specs) != len(n_grid):
        raise SpecError("family and n grid lengths differ")
    if validate:
        validate_gamma_family(specs, limit)
    I_inf = formal_neg_log_density(limit, x).value
    rows = []
    for n, s in zip(n_grid, specs):
        xn = recovery_sequence(s, limit, x)
        I_rec = formal_neg_log_density(s, xn).value
        I_const = formal_neg_log_density(s, x).value
        gap = abs(I_rec - I_inf) if math.isfinite(I_rec) and math.isfinite(I_inf) else (
            0.0 if I_rec == I_inf else math.inf)
        rows.append(ProbeRow(int(n), I_rec, I_inf, gap, I_const))
    return rows


def probe_to_csv(rows: Sequence[ProbeRow]) -> str:
    out = ["n,I_n_recovery,I_inf,gap,I_n_constant"]
    for r in rows:
        out.append(f"{r.n},{r.I_n_recovery:.17g},{r.I_inf:.17g},{r.gap:.17g},{r.I_n_constant:.17g}")
    return "\n".join(out) + "\n"
