import os
import random
import subprocess
import sys
from fractions import Fraction

import pytest

from dimarket import generators, kernel
from dimarket.engine import Market, run_all_states
from dimarket.model import ProductBiasedPrior, prior_from_weights
from dimarket.schema import all_states_summary

needs_ext = pytest.mark.skipif("cython" not in kernel.BACKENDS, reason="compiled extension not built")


def test_python_backend_always_available():
    assert "python" in kernel.BACKENDS
    assert kernel.BACKEND in kernel.BACKENDS


def test_env_var_forces_python():
    env = dict(os.environ, DIMARKET_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "import dimarket.kernel as k; print(k.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"


def _contexts(n, weights, gvals):
    return [kernel.make_context(n, weights, gvals, b) for b in sorted(kernel.BACKENDS)]


@needs_ext
@pytest.mark.parametrize("seed", range(25))
def test_slice_sums_and_groups_agree(seed):
    rng = random.Random(seed)
    n = rng.randint(1, 9)
    weights = [rng.randint(1, 10 ** rng.choice((2, 6))) for _ in range(1 << n)]
    gvals = [rng.choice((1, -1)) for _ in range(1 << n)]
    members = sorted(rng.sample(range(1 << n), rng.randint(1, 1 << n)))
    coeffs = [rng.randint(-50, 50) for _ in range(2 * n)]
    py, cy = _contexts(n, weights, gvals)
    assert list(map(list, py.slice_sums(members))) == list(map(list, cy.slice_sums(members)))
    assert py.price_groups(members, coeffs) == cy.price_groups(members, coeffs)


@needs_ext
def test_big_integer_fallback():
    # weights past 64 bits force the object path in the extension
    n = 6
    rng = random.Random(2)
    weights = [rng.randint(1, 10 ** 30) for _ in range(1 << n)]
    gvals = [rng.choice((1, -1)) for _ in range(1 << n)]
    members = list(range(1 << n))
    coeffs = [rng.randint(-10 ** 25, 10 ** 25) for _ in range(2 * n)]
    py, cy = _contexts(n, weights, gvals)
    assert list(map(list, py.slice_sums(members))) == list(map(list, cy.slice_sums(members)))
    assert py.price_groups(members, coeffs) == cy.price_groups(members, coeffs)


@needs_ext
@pytest.mark.parametrize("seed", range(10))
def test_full_runs_agree(seed):
    rng = random.Random(100 + seed)
    n = rng.randint(2, 7)
    g = generators.random_security(rng, n)
    P = generators.random_prior(rng, n)
    a = run_all_states(g, P, market=Market(g, P, backend="python"))
    b = run_all_states(g, P, market=Market(g, P, backend="cython"))
    assert all_states_summary(a) == all_states_summary(b)
    assert [a.trace(s) for s in range(1 << n)] == [b.trace(s) for s in range(1 << n)]


@needs_ext
def test_huge_denominators_agree():
    g = generators.random_table_security(random.Random(5), 8)
    P = ProductBiasedPrior(8, Fraction(999_999_937, 1_999_999_999))
    a = run_all_states(g, P, market=Market(g, P, backend="python"))
    b = run_all_states(g, P, market=Market(g, P, backend="cython"))
    assert all_states_summary(a) == all_states_summary(b)


def test_pure_python_market_runs():
    g = generators.random_table_security(random.Random(1), 4)
    P = prior_from_weights(4, list(range(1, 17)))
    r = run_all_states(g, P, market=Market(g, P, backend="python"))
    assert r.terminated
