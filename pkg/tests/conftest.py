import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from omlab import BesovParams, CauchyParams, WeightSeq, make_besov, make_cauchy

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("ci", max_examples=300, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def besov1():
    # gamma_k = 1/k, ambient l^1 with delta_k = k
    return make_besov(BesovParams(s=1.5, d=1, p=1.0, eta=1.0))


@pytest.fixture
def besov2():
    # gamma_k = k^-2, ambient l^2 with delta_k = 1/k
    return make_besov(BesovParams(s=2.0, d=1, p=2.0, eta=1.0))


@pytest.fixture
def cauchy_unit():
    return make_cauchy(CauchyParams(WeightSeq.prefixed([1.0], -2.0), q=2.0))


@pytest.fixture
def cauchy_geo():
    return make_cauchy(CauchyParams(WeightSeq.geometric(0.5), q=1.0))


@pytest.fixture(params=["besov1", "besov2", "cauchy_geo"])
def any_spec(request):
    return request.getfixturevalue(request.param)


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS, format_line

    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for key in sorted(RESULTS, key=lambda c: int(c[1:])):
            terminalreporter.write_line(format_line(key, *RESULTS[key]))
