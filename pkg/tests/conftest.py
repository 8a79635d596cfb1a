from fractions import Fraction

import numpy as np
import pytest
from hypothesis import HealthCheck, assume, settings
from hypothesis import strategies as st

from selfsim_spectra.errors import InvalidParameters
from selfsim_spectra.selfsim import JumpMeasure, validate, zeta_exact
from selfsim_spectra.asympt import table_params

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

F = Fraction
THIRD = F(1, 3)

# acceptance lines collected by test_acceptance.py and echoed at session end
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[key])


@pytest.fixture
def acceptance_ledger():
    return ACCEPTANCE


@pytest.fixture(params=[1, 2, 3], ids=["table1", "table2", "table3"])
def table_set(request):
    return table_params(request.param)


@pytest.fixture
def t1():
    return table_params(1)


@pytest.fixture
def t2():
    return table_params(2)


@pytest.fixture
def t3():
    return table_params(3)


@pytest.fixture
def single_atom():
    return JumpMeasure.from_points([F(1, 2)], [1.0])


def _try_params(n, weights, m, d, beta):
    total = sum(weights)
    a = [F(w, total) for w in weights]
    try:
        return validate(n, a, m, d, beta)
    except InvalidParameters:
        return None


@st.composite
def valid_params(draw, max_n=5, need_jump=True, d_nonzero=False):
    """Random valid similarity data with rational entries."""
    n = draw(st.integers(2, max_n))
    weights = draw(st.lists(st.integers(1, 6), min_size=n, max_size=n))
    m = draw(st.integers(1, n))
    num = draw(st.integers(1 if d_nonzero else 0, 9))
    sign = draw(st.sampled_from([1, -1]))
    d = sign * F(num, 10)
    beta = draw(st.lists(st.integers(-3, 3), min_size=n, max_size=n))
    p = _try_params(n, weights, m, d, [F(b) for b in beta])
    assume(p is not None)
    if need_jump:
        assume(any(z != 0 for z in zeta_exact(p)))
    return p


def random_param_sets(count, seed=20261018, max_n=5):
    """Deterministic stream of valid parameter sets with at least one jump."""
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        n = int(rng.integers(2, max_n + 1))
        weights = [int(w) for w in rng.integers(1, 6, size=n)]
        m = int(rng.integers(1, n + 1))
        d = F(int(rng.integers(1, 10)), 10) * (1 if rng.random() < 0.6 else -1)
        if rng.random() < 0.2:
            d *= F(int(rng.integers(10, 20)), 10)
        beta = [F(int(b)) for b in rng.integers(-3, 4, size=n)]
        p = _try_params(n, weights, m, d, beta)
        if p is not None and any(z != 0 for z in zeta_exact(p)):
            out.append(p)
    return out
