"""Product measures on weighted sequence spaces: OM functionals, shift densities,
small-ball ratios and MAP estimation for desk-scale inverse problems."""
from .errors import HypothesisError, InsufficientSamples, NumericalError, OmLabError, SpecError
from .weights import Point, Rule, SpaceSpec, WeightSeq, weighted_norm
from .densities import make_besov_ref, make_cauchy_ref, validate_assumptions
from .measures import BesovParams, CauchyParams, ProductMeasureSpec, make_besov, make_cauchy, sample
from .om import formal_neg_log_density, om_besov, om_cauchy, sublevel_box
from .shift import kakutani_product, shepp_test, shift_density_generic

__all__ = [
    "OmLabError", "SpecError", "HypothesisError", "NumericalError", "InsufficientSamples",
    "Rule", "WeightSeq", "SpaceSpec", "Point", "weighted_norm",
    "make_besov_ref", "make_cauchy_ref", "validate_assumptions",
    "BesovParams", "CauchyParams", "ProductMeasureSpec", "make_besov", "make_cauchy", "sample",
    "formal_neg_log_density", "om_besov", "om_cauchy", "sublevel_box",
    "kakutani_product", "shepp_test", "shift_density_generic",
]
