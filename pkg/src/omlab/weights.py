"""Weighted sequence spaces l^p_alpha, rule-based sequences and points.

Every infinite sequence in this package is a finite explicit prefix followed by
a closed-form tail built from :class:`Rule` terms ``c * r**k * k**a``.  That
family is closed under products, quotients and powers, which is what makes
tail bounds and convergence certificates decidable for the builtin measures.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import SpecError

__all__ = [
    "Rule",
    "SeriesBound",
    "series_bound",
    "sup_bound",
    "WeightSeq",
    "SpaceSpec",
    "Point",
    "NormResult",
    "weighted_norm",
    "EmbeddingVerdict",
    "embedding_check",
    "SummabilityReport",
    "gamma_summability_check",
    "compensated_sum",
]


def compensated_sum(values) -> float:
    """Correctly rounded sum of a float iterable (Shewchuk via ``math.fsum``)."""
    arr = np.asarray(values, dtype=float).ravel()
    if arr.size == 0:
        return 0.0
    if not np.all(np.isfinite(arr)):
        return float(np.sum(arr))
    return math.fsum(arr.tolist())


@dataclass(frozen=True)
class Rule:
    """Closed-form term ``k -> coef * ratio**k * k**power`` for integer k >= 1."""

    coef: float
    ratio: float = 1.0
    power: float = 0.0

    def __post_init__(self):
        if not self.ratio > 0 or not math.isfinite(self.ratio):
            raise SpecError(f"rule ratio must be positive and finite, got {self.ratio}")
        if not math.isfinite(self.coef) or not math.isfinite(self.power):
            raise SpecError("rule coefficients must be finite")

    def __call__(self, k):
        k = np.asarray(k, dtype=float)
        if self.coef == 0.0:
            return np.zeros_like(k)
        logmag = k * math.log(self.ratio) + self.power * np.log(k)
        return self.coef * np.exp(logmag)

    def __mul__(self, other: "Rule | float") -> "Rule":
        if isinstance(other, Rule):
            return Rule(self.coef * other.coef, self.ratio * other.ratio, self.power + other.power)
        return Rule(self.coef * float(other), self.ratio, self.power)

    __rmul__ = __mul__

    def __truediv__(self, other: "Rule") -> "Rule":
        if other.coef == 0.0:
            raise SpecError("division by a zero rule")
        return Rule(self.coef / other.coef, self.ratio / other.ratio, self.power - other.power)

    def __neg__(self) -> "Rule":
        return Rule(-self.coef, self.ratio, self.power)

    def __abs__(self) -> "Rule":
        return Rule(abs(self.coef), self.ratio, self.power)

    def abs_pow(self, e: float) -> "Rule":
        return Rule(abs(self.coef) ** e, self.ratio**e, self.power * e)

    def growth_key(self) -> tuple[float, float]:
        return (self.ratio, self.power)

    def vanishes(self) -> bool:
        """True when the term tends to zero as k grows."""
        if self.coef == 0.0:
            return True
        return self.ratio < 1.0 or (self.ratio == 1.0 and self.power < 0.0)

    def bounded(self) -> bool:
        if self.coef == 0.0:
            return True
        return self.ratio < 1.0 or (self.ratio == 1.0 and self.power <= 0.0)

    def to_dict(self) -> dict:
        return {"coef": self.coef, "ratio": self.ratio, "power": self.power}

    @classmethod
    def from_dict(cls, d: Mapping) -> "Rule":
        return cls(float(d["coef"]), float(d.get("ratio", 1.0)), float(d.get("power", 0.0)))


def merge_rules(rules: Iterable[Rule]) -> tuple[Rule, ...]:
    """Combine rules with identical growth and drop zero terms."""
    acc: dict[tuple[float, float], float] = {}
    for r in rules:
        key = r.growth_key()
        acc[key] = acc.get(key, 0.0) + r.coef
    out = [Rule(c, rt, pw) for (rt, pw), c in acc.items() if c != 0.0]
    out.sort(key=lambda r: r.growth_key(), reverse=True)
    return tuple(out)


@dataclass(frozen=True)
class SeriesBound:
    """Certificate for a nonnegative series tail.

    ``status`` is ``"converges"`` (with a rigorous upper ``bound``),
    ``"diverges"`` or ``"unknown"``.
    """

    status: str
    bound: float | None = None

    @property
    def converges(self) -> bool:
        return self.status == "converges"

    @property
    def diverges(self) -> bool:
        return self.status == "diverges"


def _single_tail(rule: Rule, start: int) -> SeriesBound:
    # bound on sum_{k > start} rule(k) for a rule with coef >= 0
    c, r, a = rule.coef, rule.ratio, rule.power
    if c == 0.0:
        return SeriesBound("converges", 0.0)
    if r > 1.0:
        return SeriesBound("diverges")
    if r == 1.0:
        if a >= -1.0:
            return SeriesBound("diverges")
        if start < 1:
            # sum_{k>=1} k^a <= 1 + int_1^inf t^a dt
            return SeriesBound("converges", c * (1.0 + 1.0 / (-a - 1.0)))
        return SeriesBound("converges", c * start ** (a + 1.0) / (-a - 1.0))
    k0 = max(start, 0) + 1
    if a <= 0.0:
        return SeriesBound("converges", float(rule(k0)) / (1.0 - r))
    # term ratio t_{k+1}/t_k = r ((k+1)/k)^a decreases in k; find where it drops below 1
    threshold = 1.0 / (r ** (-1.0 / a) - 1.0)
    k1 = max(k0, int(math.floor(threshold)) + 1)
    exact = 0.0
    if k1 > k0:
        if k1 - k0 > 10_000_000:
            return SeriesBound("unknown")
        exact = compensated_sum(rule(np.arange(k0, k1)))
    q = r * ((k1 + 1) / k1) ** a
    if q >= 1.0:
        k1 += 1
        exact += float(rule(k1 - 1))
        q = r * ((k1 + 1) / k1) ** a
    return SeriesBound("converges", exact + float(rule(k1)) / (1.0 - q))


def series_bound(rules: Sequence[Rule], exponent: float, start: int) -> SeriesBound:
    """Certify ``sum_{k > start} |sum_i rules[i](k)|**exponent``.

    Rules are merged first so that a unique dominant term exists; divergence is
    certified from the dominant term, convergence bounded through the convexity
    inequality ``|sum_i x_i|^e <= n^(e-1) sum_i |x_i|^e`` (e >= 1).
    """
    merged = merge_rules(rules)
    if not merged:
        return SeriesBound("converges", 0.0)
    dominant = merged[0]
    lead = _single_tail(dominant.abs_pow(exponent), start)
    if lead.diverges:
        return lead
    if lead.status == "unknown":
        return lead
    n = len(merged)
    if n == 1:
        return lead
    if exponent < 1.0:
        return SeriesBound("unknown")
    total = 0.0
    for rule in merged:
        part = _single_tail(rule.abs_pow(exponent), start)
        if not part.converges:
            return SeriesBound("unknown")
        total += part.bound
    return SeriesBound("converges", n ** (exponent - 1.0) * total)


def sup_bound(rule: Rule, start: int) -> float | None:
    """sup_{k > start} |rule(k)|, or None when the rule is unbounded."""
    if not rule.bounded():
        return None
    k0 = max(start, 0) + 1
    if rule.coef == 0.0:
        return 0.0
    if rule.ratio == 1.0 or rule.power <= 0.0:
        return float(abs(rule(k0)))
    kstar = rule.power / (-math.log(rule.ratio))
    cands = [k0, max(k0, math.floor(kstar)), max(k0, math.ceil(kstar))]
    return float(max(abs(rule(k)) for k in cands))


@dataclass(frozen=True)
class WeightSeq:
    """Positive weight sequence: explicit prefix, then a closed-form tail rule.

    Use the constructors :meth:`power_law`, :meth:`constant`, :meth:`geometric`
    and :meth:`prefixed` rather than building one by hand.
    """

    kind: str
    prefix: tuple[float, ...]
    tail: Rule
    params: tuple[tuple[str, object], ...] = ()

    def __post_init__(self):
        if any(not (w > 0.0 and math.isfinite(w)) for w in self.prefix):
            raise SpecError("weights must be positive and finite")
        if not self.tail.coef > 0.0:
            raise SpecError("weight tail must have a positive coefficient")

    @classmethod
    def power_law(cls, exponent: float, scale: float = 1.0) -> "WeightSeq":
        return cls("power", (), Rule(float(scale), 1.0, float(exponent)),
                   (("exponent", float(exponent)), ("scale", float(scale))))

    @classmethod
    def constant(cls, value: float = 1.0) -> "WeightSeq":
        return cls("constant", (), Rule(float(value)), (("value", float(value)),))

    @classmethod
    def geometric(cls, ratio: float, scale: float = 1.0) -> "WeightSeq":
        return cls("geometric", (), Rule(float(scale), float(ratio), 0.0),
                   (("ratio", float(ratio)), ("scale", float(scale))))

    @classmethod
    def prefixed(cls, values: Sequence[float], exponent: float = 0.0, scale: float = 1.0) -> "WeightSeq":
        vals = tuple(float(v) for v in values)
        return cls("prefix", vals, Rule(float(scale), 1.0, float(exponent)),
                   (("values", vals), ("exponent", float(exponent)), ("scale", float(scale))))

    def __call__(self, k):
        k_arr = np.asarray(k)
        if np.any(k_arr < 1):
            raise SpecError("sequences are 1-indexed")
        out = np.asarray(self.tail(k_arr), dtype=float)
        if self.prefix:
            pre = np.asarray(self.prefix)
            inside = k_arr <= len(pre)
            if np.ndim(out) == 0:
                return float(pre[int(k_arr) - 1]) if inside else float(out)
            out = np.where(inside, pre[np.clip(k_arr, 1, len(pre)) - 1], out)
        return out

    def values(self, K: int) -> np.ndarray:
        return np.asarray(self(np.arange(1, K + 1)), dtype=float)

    @property
    def tail_start(self) -> int:
        return len(self.prefix)

    def monotone_nonincreasing(self) -> bool:
        tail_ok = self.tail.ratio < 1.0 or (self.tail.ratio == 1.0 and self.tail.power <= 0.0)
        if not tail_ok:
            return False
        seq = list(self.prefix) + [float(self.tail(len(self.prefix) + 1))]
        return all(a >= b for a, b in zip(seq, seq[1:]))

    def to_dict(self) -> dict:
        return {"kind": self.kind, "params": {k: (list(v) if isinstance(v, tuple) else v) for k, v in self.params}}

    @classmethod
    def from_dict(cls, d: Mapping) -> "WeightSeq":
        kind = d["kind"]
        p = dict(d.get("params", {}))
        if kind == "power":
            return cls.power_law(p["exponent"], p.get("scale", 1.0))
        if kind == "constant":
            return cls.constant(p.get("value", 1.0))
        if kind == "geometric":
            return cls.geometric(p["ratio"], p.get("scale", 1.0))
        if kind == "prefix":
            return cls.prefixed(p["values"], p.get("exponent", 0.0), p.get("scale", 1.0))
        raise SpecError(f"unknown weight kind {kind!r}")


@dataclass(frozen=True)
class SpaceSpec:
    """The weighted space l^p_alpha with norm ||(x_k / alpha_k)||_{l^p}."""

    p: float
    weights: WeightSeq

    def __post_init__(self):
        if not (self.p >= 1.0 and math.isfinite(self.p)):
            raise SpecError(f"p must lie in [1, inf), got {self.p}")

    def norm_prefix(self, x: np.ndarray) -> np.ndarray:
        """Truncated norms of the columns of x (shape (K,) or (K, n))."""
        x = np.asarray(x, dtype=float)
        K = x.shape[0]
        alpha = self.weights.values(K)
        if x.ndim == 2:
            alpha = alpha[:, None]
        return np.sum(np.abs(x / alpha) ** self.p, axis=0) ** (1.0 / self.p)

    def to_dict(self) -> dict:
        return {"p": self.p, "weights": self.weights.to_dict()}

    @classmethod
    def from_dict(cls, d: Mapping) -> "SpaceSpec":
        return cls(float(d["p"]), WeightSeq.from_dict(d["weights"]))


@dataclass(frozen=True)
class Point:
    """Element of R^N as ``base + delta + tail``.

    ``base`` is ``"zero"`` or ``"shift"`` (the shift m of whichever measure the
    point is evaluated against); ``delta`` is a finite sparse map k -> value;
    ``tail`` is a sum of rules active for ``k > tail_start``.
    """

    base: str = "zero"
    delta: Mapping[int, float] = field(default_factory=dict)
    tail: tuple[Rule, ...] = ()
    tail_start: int = 0

    def __post_init__(self):
        if self.base not in ("zero", "shift"):
            raise SpecError(f"unknown point base {self.base!r}")
        clean = {}
        for k, v in dict(self.delta).items():
            k = int(k)
            if k < 1:
                raise SpecError("point indices are 1-based")
            if not math.isfinite(float(v)):
                raise SpecError("point entries must be finite")
            if float(v) != 0.0:
                clean[k] = float(v)
        object.__setattr__(self, "delta", clean)
        object.__setattr__(self, "tail", merge_rules(self.tail))

    # construction helpers
    @classmethod
    def zero(cls) -> "Point":
        return cls()

    @classmethod
    def at_shift(cls, delta: Mapping[int, float] | None = None) -> "Point":
        return cls("shift", dict(delta or {}))

    @classmethod
    def from_array(cls, x, base: str = "zero") -> "Point":
        return cls(base, {i + 1: float(v) for i, v in enumerate(np.asarray(x, dtype=float))})

    @classmethod
    def unit(cls, k: int, value: float = 1.0, base: str = "zero") -> "Point":
        return cls(base, {k: value})

    @property
    def finite_support(self) -> bool:
        return not self.tail

    @property
    def support_max(self) -> int:
        return max(self.delta, default=0)

    def tail_values(self, k) -> np.ndarray:
        k = np.asarray(k)
        out = np.zeros(k.shape, dtype=float)
        if self.tail:
            active = k > self.tail_start
            for r in self.tail:
                out = out + np.where(active, r(np.maximum(k, 1)), 0.0)
        return out

    def offset_values(self, K: int) -> np.ndarray:
        """delta + tail on 1..K, ignoring the base."""
        out = self.tail_values(np.arange(1, K + 1))
        for k, v in self.delta.items():
            if k <= K:
                out[k - 1] += v
        return out

    def values(self, K: int, shift: "Point | None" = None) -> np.ndarray:
        out = self.offset_values(K)
        if self.base == "shift":
            if shift is None:
                raise SpecError("a shift-based point needs the measure shift to be materialised")
            out = out + shift.values(K)
        return out

    def resolve(self, shift: "Point | None") -> "Point":
        """Absolute (zero-based) version of this point."""
        if self.base == "zero":
            return self
        if shift is None:
            raise SpecError("a shift-based point needs the measure shift to be resolved")
        return Point("zero", self.delta, self.tail, self.tail_start) + shift.resolve(None)

    def _at_start(self, start: int) -> "Point":
        # move tail terms on (tail_start, start] into delta
        if start <= self.tail_start or not self.tail:
            return Point(self.base, self.delta, self.tail, max(start, self.tail_start) if self.tail else 0)
        ks = np.arange(self.tail_start + 1, start + 1)
        vals = self.tail_values(ks)
        delta = dict(self.delta)
        for k, v in zip(ks.tolist(), vals.tolist()):
            delta[k] = delta.get(k, 0.0) + v
        return Point(self.base, delta, self.tail, start)

    def __add__(self, other: "Point") -> "Point":
        if self.base == "shift" and other.base == "shift":
            raise SpecError("cannot add two shift-based points")
        base = "shift" if "shift" in (self.base, other.base) else "zero"
        start = max(self.tail_start if self.tail else 0, other.tail_start if other.tail else 0)
        a, b = self._at_start(start), other._at_start(start)
        delta = dict(a.delta)
        for k, v in b.delta.items():
            delta[k] = delta.get(k, 0.0) + v
        return Point(base, delta, a.tail + b.tail, start if (a.tail or b.tail) else 0)

    def __neg__(self) -> "Point":
        if self.base == "shift":
            raise SpecError("cannot negate a shift-based point")
        return Point("zero", {k: -v for k, v in self.delta.items()}, tuple(-r for r in self.tail), self.tail_start)

    def __sub__(self, other: "Point") -> "Point":
        if self.base == "shift" and other.base == "shift":
            return Point("zero", self.delta, self.tail, self.tail_start) + (-Point("zero", other.delta, other.tail, other.tail_start))
        return self + (-other)

    def scale(self, c: float) -> "Point":
        if self.base == "shift":
            raise SpecError("cannot scale a shift-based point")
        return Point("zero", {k: c * v for k, v in self.delta.items()}, tuple(r * c for r in self.tail), self.tail_start)

    def _weighted(self, w: WeightSeq, divide: bool) -> "Point":
        if self.base == "shift":
            raise SpecError("resolve the point before reweighting it")
        pt = self._at_start(max(self.tail_start, w.tail_start)) if self.tail else self
        delta = {}
        for k, v in pt.delta.items():
            wk = float(w(k))
            delta[k] = v / wk if divide else v * wk
        tail = tuple((r / w.tail) if divide else (r * w.tail) for r in pt.tail)
        return Point("zero", delta, tail, pt.tail_start)

    def divide_by(self, w: WeightSeq) -> "Point":
        """Coordinatewise x_k / w_k."""
        return self._weighted(w, divide=True)

    def multiply_by(self, w: WeightSeq) -> "Point":
        """Coordinatewise x_k * w_k."""
        return self._weighted(w, divide=False)

    def to_dict(self) -> dict:
        d: dict = {"base": self.base, "delta": {str(k): v for k, v in sorted(self.delta.items())}}
        if self.tail:
            d["tail"] = [r.to_dict() for r in self.tail]
            d["tail_start"] = self.tail_start
        return d

    @classmethod
    def from_dict(cls, d: Mapping) -> "Point":
        tail = tuple(Rule.from_dict(r) for r in d.get("tail", []))
        return cls(d.get("base", "zero"), {int(k): float(v) for k, v in dict(d.get("delta", {})).items()},
                   tail, int(d.get("tail_start", 0)))


@dataclass(frozen=True)
class NormResult:
    """Truncated norm and a bound on the omitted p-th power tail.

    ``tail_bound`` bounds ``sum_{k>K} |x_k/alpha_k|^p`` (None when unknown, inf
    when the tail is certified divergent), so the full norm obeys
    ``norm <= (partial**p + tail_bound)**(1/p)``.
    """

    partial: float
    tail_bound: float | None
    p: float

    @property
    def upper(self) -> float | None:
        if self.tail_bound is None:
            return None
        return (self.partial**self.p + self.tail_bound) ** (1.0 / self.p)


def _pnorm(v: np.ndarray, p: float) -> float:
    # scale by the largest entry so tiny or huge vectors neither underflow nor overflow
    top = float(np.max(np.abs(v), initial=0.0))
    if top == 0.0 or not math.isfinite(top):
        return top
    return top * compensated_sum(np.abs(v / top) ** p) ** (1.0 / p)


def weighted_norm(x: Point, space: SpaceSpec, K: int, shift: Point | None = None) -> NormResult:
    """Truncated l^p_alpha norm of x over k <= K with a rigorous tail bound.

    The ratio x_k / alpha_k is formed in rule space first, so geometric
    sequences whose individual terms underflow still give exact ratios.
    """
    if K < 1:
        raise SpecError("K must be >= 1")
    p = space.p
    z = x.resolve(shift).divide_by(space.weights)
    partial = _pnorm(z.values(K), p)
    cutoff = max(K, z.support_max, z.tail_start if z.tail else 0)
    exact = 0.0
    if cutoff > K:
        exact = compensated_sum(np.abs(z.values(cutoff)[K:]) ** p)
    sb = series_bound(z.tail, p, cutoff) if z.tail else SeriesBound("converges", 0.0)
    if sb.converges:
        tail = exact + sb.bound
    elif sb.diverges:
        tail = math.inf
    else:
        tail = None
    return NormResult(partial, tail, p)


@dataclass(frozen=True)
class EmbeddingVerdict:
    verdict: str  # "embeds" | "unknown"
    certificate: dict

    @property
    def embeds(self) -> bool:
        return self.verdict == "embeds"


def _ratio_point(gamma: WeightSeq, alpha: WeightSeq) -> tuple[np.ndarray, Rule, int]:
    start = max(gamma.tail_start, alpha.tail_start)
    ks = np.arange(1, start + 1)
    prefix = np.asarray(gamma(ks), dtype=float) / np.asarray(alpha(ks), dtype=float) if start else np.zeros(0)
    return prefix, gamma.tail / alpha.tail, start


def embedding_check(q: float, gamma: WeightSeq, p: float, alpha: WeightSeq, K: int = 1000) -> EmbeddingVerdict:
    """Certify l^q_gamma ⊆ l^p_alpha from the Hölder-type sufficient conditions.

    Never returns a negative verdict; failure to certify gives ``"unknown"``.
    """
    if p < 1 or q < 1:
        raise SpecError("p and q must be >= 1")
    prefix, tail, start = _ratio_point(gamma, alpha)
    if p < q:
        r = q * p / (q - p)
        ks = np.arange(1, K + 1)
        ratio = np.asarray(gamma(ks), dtype=float) / np.asarray(alpha(ks), dtype=float)
        partial = compensated_sum(np.abs(ratio) ** r)
        exact = 0.0
        if start > K:
            ks2 = np.arange(K + 1, start + 1)
            exact = compensated_sum((np.asarray(gamma(ks2)) / np.asarray(alpha(ks2))) ** r)
        sb = series_bound([tail], r, max(K, start))
        cert = {"branch": "p<q", "exponent": r, "partial_sum": partial, "K": K, "status": sb.status}
        if sb.converges:
            total = partial + exact + sb.bound
            cert["tail_bound"] = exact + sb.bound
            cert["gamma_norm_upper"] = total ** (1.0 / r)
            return EmbeddingVerdict("embeds", cert)
        return EmbeddingVerdict("unknown", cert)
    cert = {"branch": "p>=q", "K": K}
    if not (gamma.monotone_nonincreasing() or alpha.kind == "constant" or tail.bounded()):
        cert["reason"] = "no monotone certificate for gamma/alpha"
        return EmbeddingVerdict("unknown", cert)
    s = sup_bound(tail, start)
    if s is None:
        cert["reason"] = "gamma/alpha unbounded: sup-norm hypothesis fails"
        cert["unbounded"] = True
        return EmbeddingVerdict("unknown", cert)
    sup = max([s] + [abs(v) for v in prefix.tolist()])
    cert["sup_ratio"] = sup
    return EmbeddingVerdict("embeds", cert)


@dataclass(frozen=True)
class SummabilityReport:
    partial_sum: float
    tail_bound: float | None
    status: str
    K: int
    warning: str | None = None

    @property
    def ok(self) -> bool:
        return self.status == "converges"


def gamma_summability_check(gamma: WeightSeq, ambient: SpaceSpec, K: int = 1000) -> SummabilityReport:
    """Partial sums of sum_k |gamma_k/alpha_k|^p with a tail certificate.

    A divergent sum contradicts the necessary condition gamma in l^p_alpha for a
    product measure of full mass on the ambient space; it is reported as a
    warning rather than raised.
    """
    gpt = Point("zero", {}, (gamma.tail,), 0)
    if gamma.prefix:
        gpt = Point("zero", {k + 1: v - float(gamma.tail(k + 1)) for k, v in enumerate(gamma.prefix)}, (gamma.tail,), 0)
    res = weighted_norm(gpt, ambient, K)
    partial = res.partial**ambient.p
    if res.tail_bound is None:
        return SummabilityReport(partial, None, "unknown", K)
    if math.isinf(res.tail_bound):
        return SummabilityReport(partial, math.inf, "diverges", K,
                                 "gamma is not in l^p_alpha: the product measure cannot have full mass on the ambient space")
    return SummabilityReport(partial, res.tail_bound, "converges", K)
