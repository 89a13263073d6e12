import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import stats

from omlab.densities import (custom_reference, fisher_information, make_besov_ref, make_cauchy_ref,
                             ref_from_dict, validate_assumptions)
from omlab.errors import SpecError

from oracle_values import BESOV2_PDF0, FISHER_BESOV15, FISHER_BESOV2, FISHER_CAUCHY

BUILTINS = {"besov1": lambda: make_besov_ref(1.0), "besov15": lambda: make_besov_ref(1.5),
            "besov2": lambda: make_besov_ref(2.0), "cauchy": make_cauchy_ref}


@pytest.fixture(params=sorted(BUILTINS))
def ref(request):
    return BUILTINS[request.param]()


def epanechnikov():
    # compact support: the Fisher information diverges at the endpoints
    def pdf(u):
        u = np.asarray(u, dtype=float)
        return np.where(np.abs(u) < 1, 0.75 * (1 - u**2), 0.0)

    # the median of three uniforms on [-1, 1] has this density
    return custom_reference("epanechnikov", pdf, lambda rng, size: np.median(rng.uniform(-1, 1, (3, size)), axis=0))


def test_density_values():
    assert make_besov_ref(2.0).pdf(0.0) == pytest.approx(BESOV2_PDF0, rel=1e-15)
    b1 = make_besov_ref(1.0)
    assert b1.pdf(0.7) == pytest.approx(math.exp(-0.7) / 2, rel=1e-15)
    assert b1.neg_log(1.0) == pytest.approx(1.0)
    c = make_cauchy_ref()
    assert c.neg_log(1.0) == pytest.approx(math.log(2), rel=1e-15)
    assert c.pdf(0.0) == pytest.approx(1 / math.pi, rel=1e-15)
    assert c.pdf(2.0) == c.pdf(-2.0)


def test_q_vanishes_at_zero(ref):
    assert ref.neg_log(0.0) == 0.0


def test_q_even_nonnegative_nondecreasing(ref):
    u = np.linspace(0, 40, 1000)
    q = ref.neg_log(u)
    assert np.all(q >= 0)
    assert np.all(np.diff(q) >= 0)
    np.testing.assert_array_equal(q, ref.neg_log(-u))


def test_unit_mass(ref):
    from scipy import integrate
    pieces = [integrate.quad(ref.pdf, a, b, limit=500, epsabs=1e-13)[0]
              for a, b in [(-np.inf, -1), (-1, 0), (0, 1), (1, np.inf)]]
    assert sum(pieces) == pytest.approx(1.0, abs=1e-8)


def test_sampler_ks(ref):
    x = ref.sample(np.random.default_rng(7), 100_000)
    ks = stats.kstest(x, ref.cdf).statistic
    assert ks < 1.63 / math.sqrt(x.size)


@pytest.mark.parametrize("name,expected", [("cauchy", FISHER_CAUCHY), ("besov2", FISHER_BESOV2),
                                           ("besov15", FISHER_BESOV15), ("besov1", 1.0)])
def test_fisher_quadrature_matches_oracle(name, expected):
    ref = BUILTINS[name]()
    quad = fisher_information(ref, use_closed_form=False)
    assert quad.finite
    assert quad.value == pytest.approx(expected, rel=1e-6)
    assert ref.fisher_closed_form == pytest.approx(expected, rel=1e-12)


def test_fisher_divergence_detected():
    res = fisher_information(epanechnikov(), use_closed_form=False)
    assert not res.finite


@pytest.mark.parametrize("name,verdicts", [
    ("cauchy", ("pass", "pass", "pass")),
    ("besov2", ("pass", "pass", "pass")),
])
def test_assumption_verdicts_smooth(name, verdicts):
    rep = validate_assumptions(BUILTINS[name]())
    assert (rep.A2, rep.A4, rep.A5) == verdicts
    assert rep.usable()


def test_laplace_fails_smoothness_but_uses_branch():
    rep = validate_assumptions(make_besov_ref(1.0))
    assert rep.A2 == "pass"
    assert rep.A5 == "fail"
    assert rep.A6_branch
    assert rep.usable()


def test_custom_density_with_infinite_fisher_is_unusable():
    rep = validate_assumptions(epanechnikov())
    assert rep.A4 == "fail"
    assert not rep.usable()


@pytest.mark.parametrize("p", [0.5, 2.5])
def test_besov_p_out_of_range(p):
    with pytest.raises(SpecError):
        make_besov_ref(p)


def test_ref_dict_roundtrip(ref):
    again = ref_from_dict(ref.to_dict())
    u = np.linspace(-3, 3, 13)
    np.testing.assert_array_equal(again.pdf(u), ref.pdf(u))


@given(st.floats(-50, 50, allow_nan=False))
def test_logpdf_consistent(u):
    for ref in (make_besov_ref(1.5), make_cauchy_ref()):
        assert ref.logpdf(u) == pytest.approx(math.log(float(ref.pdf(u))), abs=1e-12)
