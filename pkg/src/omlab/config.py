"""Experiment configuration: schema validation and object builders."""
from __future__ import annotations

import hashlib
import json
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np

from .errors import SpecError
from .mapest import LinearGaussian, ZeroPotential
from .measures import BesovParams, CauchyParams, ProductMeasureSpec, make_besov, make_cauchy
from .om import besov_family, cauchy_family
from .weights import Point, SpaceSpec, WeightSeq

__all__ = [
    "ConfigError",
    "schema",
    "validate_config",
    "load_config",
    "config_hash",
    "build_measure",
    "build_point",
    "build_family",
    "build_problem",
]


class ConfigError(SpecError):
    """Schema violation; ``pointer`` locates the offending value."""

    def __init__(self, message: str, pointer: str = ""):
        super().__init__(f"{pointer or '/'}: {message}")
        self.pointer = pointer


def schema() -> dict:
    return json.loads(resources.files("omlab").joinpath("config_schema.json").read_text())


def validate_config(cfg: dict) -> dict:
    validator = jsonschema.Draft202012Validator(schema())
    errors = sorted(validator.iter_errors(cfg), key=lambda e: list(e.absolute_path))
    if errors:
        err = errors[0]
        pointer = "/" + "/".join(str(p) for p in err.absolute_path)
        raise ConfigError(err.message, pointer)
    return cfg


def load_config(path, seed: int | None = None) -> dict:
    """Read a config or a run manifest; an explicit seed overrides the stored one."""
    raw = json.loads(Path(path).read_text())
    if isinstance(raw, dict) and "config_hash" in raw and "config" in raw:
        raw = raw["config"]
    if seed is not None:
        raw = dict(raw, seed=int(seed))
    return validate_config(raw)


def config_hash(cfg: dict) -> str:
    blob = json.dumps(cfg, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()


def _point(d: dict | None) -> Point:
    if not d:
        return Point()
    d = dict(d)
    d.pop("scale", None)
    return Point.from_dict(d)


def build_measure(cfg: dict) -> ProductMeasureSpec:
    m = cfg["measure"]
    if m["family"] == "besov":
        return make_besov(BesovParams(float(m["s"]), int(m.get("d", 1)), float(m["p"]),
                                      float(m.get("eta", 1.0)), _point(m.get("m"))))
    return make_cauchy(CauchyParams(WeightSeq.from_dict(m["gamma"]), float(m.get("q", 1.0)),
                                    _point(m.get("m"))))


def build_point(d: dict | None, spec: ProductMeasureSpec) -> Point:
    """Point from JSON; ``"scale": "gamma"`` reads entries in units of gamma_k."""
    pt = _point(d)
    if d and d.get("scale") == "gamma":
        if pt.base == "shift":
            rel = Point("zero", pt.delta, pt.tail, pt.tail_start).multiply_by(spec.gamma)
            return Point("shift", rel.delta, rel.tail, rel.tail_start)
        return pt.multiply_by(spec.gamma)
    return pt


def build_metric(cfg: dict, spec: ProductMeasureSpec) -> SpaceSpec:
    return SpaceSpec.from_dict(cfg["metric"]) if "metric" in cfg else spec.ambient


def build_family(cfg: dict, limit: ProductMeasureSpec):
    """Callable n -> member of the family converging to ``limit``."""
    fam = cfg.get("family")
    if fam is None:
        raise SpecError("this command needs a 'family' block")
    kind = fam["kind"]
    pert = _point(fam.get("shift_perturbation")) if fam.get("shift_perturbation") else None
    m = cfg["measure"]
    if kind == "besov-s":
        if m["family"] != "besov":
            raise SpecError("besov-s families need a Besov limit measure")
        base = BesovParams(float(m["s"]), int(m.get("d", 1)), float(m["p"]), float(m.get("eta", 1.0)),
                           _point(m.get("m")))
        shift = (lambda n: base.m + pert.scale(1.0 / n)) if pert else None
        return lambda n: besov_family(base, n, shift)
    if kind == "cauchy-gamma":
        if m["family"] != "cauchy":
            raise SpecError("cauchy-gamma families need a Cauchy limit measure")
        base = CauchyParams(WeightSeq.from_dict(m["gamma"]), float(m.get("q", 1.0)), _point(m.get("m")))
        return lambda n: cauchy_family(base, n)
    return lambda n: limit


def build_problem(cfg: dict, spec: ProductMeasureSpec, K: int):
    """Linear-Gaussian potential from explicit data or a seeded random instance.

    Random instances use ``A_ij ~ N(0, 1/M)``, a truth drawn from ``spec`` and
    noise of scale sigma, all from the problem seed.
    """
    pr = cfg.get("problem")
    if pr is None or pr.get("zero_potential"):
        return ZeroPotential(K)
    sigma = float(pr["sigma"])
    rng = np.random.default_rng(int(pr.get("random", {}).get("seed", cfg["seed"])))
    if "A" in pr:
        A = np.asarray(pr["A"], dtype=float)
    elif pr.get("identity"):
        A = np.eye(K)
    elif "random" in pr:
        M = int(pr["random"]["M"])
        A = rng.standard_normal((M, K)) / np.sqrt(M)
    else:
        raise SpecError("problem needs A, identity or random")
    if A.shape[1] != K:
        raise SpecError(f"A has {A.shape[1]} columns but K = {K}")
    if "y" in pr:
        y = np.asarray(pr["y"], dtype=float)
    else:
        truth = spec.shift_values(K) + spec.gamma_values(K) * spec.ref.sample(rng, K)
        y = A @ truth + sigma * rng.standard_normal(A.shape[0])
    return LinearGaussian(A, y, sigma)
