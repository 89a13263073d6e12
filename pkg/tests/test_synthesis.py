import numpy as np
import pytest
from hypothesis import given, strategies as st

from omlab.errors import HypothesisError, SpecError
from omlab.measures import BesovParams, make_besov
from omlab.om import neg_log_density_array
from omlab.synthesis import (coordinates, embedded_basis, identity_basis, in_range, load_basis_csv,
                             orthonormal_basis, pushforward_om, random_orthonormal_basis, synthesize,
                             transport_shift_density)
from omlab.shift import log_shift_density_array

BASES = {"identity": lambda: identity_basis(12), "random": lambda: random_orthonormal_basis(12, seed=4),
         "embedded": lambda: embedded_basis(16, 12)}


@pytest.fixture(params=sorted(BASES))
def basis(request):
    return BASES[request.param]()


def test_identity_synthesis():
    x = np.arange(5.0)
    np.testing.assert_array_equal(synthesize(identity_basis(5), x), x)


def test_zero_maps_to_zero(basis):
    assert not synthesize(basis, np.zeros(basis.N)).any()
    assert not coordinates(basis, np.zeros(basis.M)).any()


def test_round_trip_100_vectors(basis, rng):
    for _ in range(100):
        x = rng.standard_normal(basis.N)
        np.testing.assert_allclose(coordinates(basis, synthesize(basis, x)), x, rtol=0, atol=1e-12)


def test_isometry(basis, rng):
    x = rng.standard_normal(basis.N)
    assert np.linalg.norm(synthesize(basis, x)) == pytest.approx(np.linalg.norm(x), rel=1e-13)


def test_non_orthonormal_rejected():
    with pytest.raises(SpecError):
        orthonormal_basis(np.array([[1.0, 0.5], [0.0, 1.0]]))


def test_load_csv(tmp_path):
    Q = random_orthonormal_basis(4, seed=1).matrix
    path = tmp_path / "basis.csv"
    np.savetxt(path, Q, delimiter=",", fmt="%.17g")
    np.testing.assert_array_equal(load_basis_csv(path).matrix, Q)


def test_pushforward_refuses_non_isometry():
    b = orthonormal_basis(np.array([[2.0, 0.0], [0.0, 1.0]]), require=False)
    with pytest.raises(HypothesisError):
        pushforward_om(lambda x: 0.0, b)


def test_off_range_is_infinite():
    b = embedded_basis(5, 3)
    om = pushforward_om(lambda x: float(np.sum(x**2)), b)
    assert om(np.array([1.0, 0, 0, 0, 0])) == 1.0
    assert om(np.array([0, 0, 0, 0, 1e-3])) == np.inf
    assert not in_range(b, np.array([0, 0, 0, 0, 1e-3]))


@given(st.lists(st.floats(-10, 10), min_size=12, max_size=12))
def test_om_invariant_under_isometric_pushforward(xs):
    spec = make_besov(BesovParams(2.0, p=2.0))
    om = lambda x: float(neg_log_density_array(spec, x))
    x = np.array(xs)
    for b in (random_orthonormal_basis(12, seed=0), embedded_basis(15, 12)):
        assert pushforward_om(om, b)(synthesize(b, x)) == pytest.approx(om(x), rel=1e-12, abs=1e-12)


def test_besov2_pushforward_is_weighted_l2(rng):
    spec = make_besov(BesovParams(2.0, p=2.0))
    b = random_orthonormal_basis(6, seed=2)
    h = rng.standard_normal(6) * spec.gamma_values(6)
    om = pushforward_om(lambda x: float(neg_log_density_array(spec, x)), b)
    assert om(synthesize(b, h)) == pytest.approx(np.sum((h / spec.gamma_values(6)) ** 2), rel=1e-12)


def test_transported_shift_density(rng):
    spec = make_besov(BesovParams(1.5, p=1.5))
    b = random_orthonormal_basis(5, seed=3)
    log_r = lambda h, x: float(log_shift_density_array(spec, h, x[:, None])[0])
    h, x = rng.standard_normal(5) * 0.1, rng.standard_normal(5) * 0.1
    assert transport_shift_density(log_r, b)(synthesize(b, h), synthesize(b, x)) == pytest.approx(log_r(h, x), rel=1e-12)
