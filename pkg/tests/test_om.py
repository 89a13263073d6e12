import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from omlab.errors import HypothesisError
from omlab.measures import BesovParams, CauchyParams, make_besov, make_cauchy
from omlab.om import (besov_family, cauchy_family, formal_neg_log_density, gamma_probe, invert_q, om_besov,
                      om_cauchy, recovery_sequence, sublevel_box)
from omlab.weights import Point, Rule, WeightSeq

from oracle_values import CAUCHY_BOX_A, LOG17

coords = st.floats(-30, 30, allow_nan=False)
sparse = st.dictionaries(st.integers(1, 25), coords, max_size=6)
BESOV_P = st.sampled_from([1.0, 1.25, 1.5, 2.0])


def test_om_at_shift_is_zero(any_spec):
    ev = formal_neg_log_density(any_spec, Point.at_shift())
    assert ev.value == 0.0 and ev.in_e is True


def test_single_term_besov1():
    spec = make_besov(BesovParams(s=1.0, d=1, p=1.0))
    assert formal_neg_log_density(spec, Point(delta={1: 0.3})).value == pytest.approx(0.3, rel=1e-15)


def test_single_term_cauchy_geometric(cauchy_geo):
    # gamma_2 = 1/4, so (h_2 - m_2)/gamma_2 = 4
    assert formal_neg_log_density(cauchy_geo, Point(delta={2: 1.0})).value == pytest.approx(LOG17, rel=1e-15)


def test_besov2_has_no_half_prefactor():
    bp = BesovParams(s=2.0, p=2.0)
    h = Point(delta={1: 0.4, 3: -0.05})
    g = make_besov(bp).gamma_values(3)
    expected = (0.4 / g[0]) ** 2 + (0.05 / g[2]) ** 2
    assert om_besov(bp, h).value == pytest.approx(expected, rel=1e-14)


def test_besov1_three_unit_terms():
    bp = BesovParams(s=1.5, p=1.0)
    g = make_besov(bp).gamma_values(3)
    h = Point(delta={k + 1: float(g[k]) for k in range(3)})
    assert om_besov(bp, h).value == pytest.approx(3.0, rel=1e-15)


def test_cauchy_closed_forms():
    cp = CauchyParams(WeightSeq.geometric(0.5))
    assert om_cauchy(cp, Point.at_shift()).value == 0.0
    assert om_cauchy(cp, Point(delta={1: 0.5})).value == pytest.approx(math.log(2), rel=1e-15)
    ev = om_cauchy(cp, Point(tail=(Rule(1.0, ratio=0.5),)))
    assert ev.value == math.inf and ev.in_e is False
    assert formal_neg_log_density(make_cauchy(cp), Point(tail=(Rule(1.0, ratio=0.5),))).in_e is False


def test_power_tail_membership():
    bp = BesovParams(s=2.0, p=2.0)
    spec = make_besov(bp)
    inside = Point(tail=(Rule(1.0, power=-3.0),))  # z_k = k^-1, summable squares
    outside = Point(tail=(Rule(1.0, power=-2.5),))  # z_k = k^-1/2
    a, b = formal_neg_log_density(spec, inside), om_besov(bp, inside)
    assert a.in_e and b.in_e
    assert a.value == pytest.approx(b.value, rel=1e-12)
    assert formal_neg_log_density(spec, outside).in_e is False
    assert om_besov(bp, outside).in_e is False


@given(sparse, BESOV_P, st.floats(0.6, 3))
def test_besov_closed_form_matches_generic(delta, p, s):
    bp = BesovParams(s=s, p=p)
    h = Point(delta=delta)
    a = formal_neg_log_density(make_besov(bp), h).value
    assert om_besov(bp, h).value == pytest.approx(a, rel=1e-12, abs=1e-300)


@given(sparse, st.floats(0.3, 0.9))
def test_cauchy_closed_form_matches_generic(delta, ratio):
    cp = CauchyParams(WeightSeq.geometric(ratio))
    h = Point(delta=delta)
    a = formal_neg_log_density(make_cauchy(cp), h).value
    assert om_cauchy(cp, h).value == pytest.approx(a, rel=1e-12, abs=1e-300)


@given(st.dictionaries(st.integers(1, 10), st.floats(-3, 3), min_size=1, max_size=5))
def test_om_nondecreasing_along_rays(direction):
    for spec in (make_besov(BesovParams(1.5, p=1.0)), make_cauchy(CauchyParams(WeightSeq.geometric(0.5)))):
        v = Point(delta=direction)
        vals = [formal_neg_log_density(spec, Point("shift", v.scale(c).delta)).value for c in np.linspace(0, 3, 31)]
        assert all(b >= a for a, b in zip(vals, vals[1:]))


@pytest.mark.parametrize("name,t,a", [("cauchy", math.log(2), 1.0), ("besov2", 4.0, 2.0),
                                      ("cauchy", 0.5, CAUCHY_BOX_A[0]), ("cauchy", 4.0, CAUCHY_BOX_A[2])])
def test_box_radius(name, t, a, besov2, cauchy_geo):
    spec = cauchy_geo if name == "cauchy" else besov2
    box = sublevel_box(spec, t)
    assert box.a == pytest.approx(a, rel=1e-11)
    assert spec.ref.neg_log(box.a) >= t


def test_box_at_zero_level_is_the_shift(besov1):
    box = sublevel_box(besov1, 0.0)
    assert box.a == 0.0
    lo, hi = box.intervals(4)
    np.testing.assert_array_equal(lo, hi)


def test_invert_q_bisection_matches_analytic():
    q = lambda u: np.log1p(np.asarray(u) ** 2)
    for t in (0.1, 1.0, 10.0, 50.0):
        assert invert_q(q, t) == pytest.approx(math.sqrt(math.expm1(t)), rel=1e-11)


@settings(max_examples=30)
@given(st.sampled_from(["besov1", "besov2", "cauchy"]), st.sampled_from([0.5, math.log(2), 4.0]),
       st.integers(0, 2**32))
def test_sublevel_points_lie_in_box(name, t, seed):
    spec = {"besov1": make_besov(BesovParams(1.5, p=1.0)), "besov2": make_besov(BesovParams(2.0, p=2.0)),
            "cauchy": make_cauchy(CauchyParams(WeightSeq.power_law(-2.0), 2.0))}[name]
    K = 6
    rng = np.random.default_rng(seed)
    g = spec.gamma_values(K)
    x = g[:, None] * rng.uniform(-3, 3, (K, 400)) * (rng.random((K, 400)) < 0.5)
    keep = [j for j in range(x.shape[1])
            if formal_neg_log_density(spec, Point.from_array(x[:, j])).value <= t]
    assert sublevel_box(spec, t).contains(x[:, keep]).all()


def test_recovery_sequence_examples(besov2):
    x = Point(delta={1: 1.3, 2: -0.2})
    r = recovery_sequence(besov2, besov2, x)
    np.testing.assert_allclose(r.values(4, besov2.shift), x.values(4), rtol=1e-15)
    double = make_cauchy(CauchyParams(WeightSeq.geometric(0.5, 2.0)))
    base = make_cauchy(CauchyParams(WeightSeq.geometric(0.5)))
    e1 = recovery_sequence(double, base, Point(delta={1: 1.0}))
    np.testing.assert_allclose(e1.values(3, double.shift), [2.0, 0.0, 0.0])
    at_m = recovery_sequence(double, base, Point.at_shift())
    assert at_m.values(3, double.shift).tolist() == [0.0, 0.0, 0.0]


def test_probe_constant_family_gap_zero(besov2):
    rows = gamma_probe(lambda n: besov2, besov2, Point(delta={1: 0.5}), [1, 2, 4])
    assert all(r.gap == 0.0 for r in rows)


def test_probe_besov_family_constant_sequence_converges():
    bp = BesovParams(s=2.0, p=2.0)
    limit = make_besov(bp)
    x = Point(delta={1: 0.8, 2: -0.5, 5: 1.0})
    rows = gamma_probe(lambda n: besov_family(bp, n), limit, x, [1, 4, 16, 64, 256])
    gaps = [abs(r.I_n_constant - r.I_inf) for r in rows]
    assert all(b < a for a, b in zip(gaps, gaps[1:]))
    assert all(r.gap <= 1e-12 * r.I_inf for r in rows)


def test_probe_cauchy_family():
    cp = CauchyParams(WeightSeq.geometric(0.5))
    limit = make_cauchy(cp)
    x = Point(delta={1: 0.3, 3: 0.2})
    rows = gamma_probe(lambda n: cauchy_family(cp, n), limit, x, [1, 2, 4, 8, 16])
    diffs = [abs(r.I_n_constant - r.I_inf) for r in rows]
    assert all(b < a for a, b in zip(diffs, diffs[1:]))


def test_family_with_growing_scales_is_refused():
    cp = CauchyParams(WeightSeq.geometric(0.5))
    limit = make_cauchy(cp)
    bad = lambda n: make_cauchy(CauchyParams(WeightSeq.geometric(0.5, 1.0 + n)))
    with pytest.raises(HypothesisError):
        gamma_probe(bad, limit, Point(delta={1: 0.1}), [1, 2, 4])
