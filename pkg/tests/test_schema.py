import json
import random
from fractions import Fraction as F

import pytest

from dimarket import generators
from dimarket.engine import run_dynamics
from dimarket.model import ResourceError, SpinState
from dimarket.schema import (
    SchemaError,
    build_prior,
    build_security,
    build_state,
    dump_trace,
    dumps,
    format_rational,
    parse_rational,
    prior_to_json,
    security_to_json,
    summary_csv,
    trace_from_json,
    trace_to_json,
)


@pytest.mark.parametrize("x", [F(0), F(-1), F(3, 8), F(-10 ** 30, 7)])
def test_rational_round_trip(x):
    assert parse_rational(format_rational(x)) == x
    assert "/" in format_rational(x)


def test_parse_rational_rejects_floats():
    with pytest.raises(SchemaError):
        parse_rational(0.25)
    with pytest.raises(SchemaError):
        parse_rational("a/b")
    assert parse_rational(3) == 3


@pytest.mark.parametrize("seed", range(20))
def test_security_and_prior_round_trip(seed):
    rng = random.Random(seed)
    n = rng.randint(1, 5)
    g = generators.random_security(rng, n)
    P = generators.random_prior(rng, n)
    g2 = build_security(json.loads(dumps(security_to_json(g))))
    P2 = build_prior(json.loads(dumps(prior_to_json(P))))
    assert g2.values == g.values and type(g2) is type(g)
    assert P2.masses == P.masses and type(P2) is type(P)


def test_build_errors():
    with pytest.raises(SchemaError, match="kind"):
        build_security({"sign": 1})
    with pytest.raises(SchemaError):
        build_security({"kind": "nope", "n_players": 2})
    with pytest.raises(SchemaError, match="99/100"):
        build_prior({"kind": "table", "masses": ["1/4", "1/4", "1/4", "24/100"]})
    with pytest.raises(SchemaError):
        build_prior({"kind": "product_biased", "n_players": 2, "p": "3/2"})
    with pytest.raises(ResourceError):
        build_prior({"kind": "uniform", "n_players": 40})


def test_magnetization_form():
    assert build_prior({"kind": "product_biased", "n_players": 3, "m": "1/2"}).p == F(3, 4)


def test_build_state():
    assert build_state([1, -1], 2) == SpinState(2, 1)
    assert build_state({"bits": 3}, 2) == SpinState(2, 3)
    with pytest.raises(SchemaError):
        build_state([1, -1, 1], 2)
    with pytest.raises(SchemaError):
        build_state("++", 2)


def test_trace_round_trip(maj3, uniform3):
    t = run_dynamics(maj3, uniform3, SpinState.from_spins([1, 1, -1]))
    doc = json.loads(dump_trace(t))
    assert doc["rounds"][0]["price"] == "1/6"
    assert trace_from_json(doc) == t
    assert dump_trace(trace_from_json(doc)) == dump_trace(t)


def test_trace_json_is_canonical(xor2, biased2):
    t = run_dynamics(xor2, biased2, SpinState(2, 1))
    text = dump_trace(t)
    assert text == dumps(trace_to_json(t))
    assert ", " not in text and list(json.loads(text)) == sorted(json.loads(text))


def test_summary_csv_cells():
    rows = [{"true_state": 0, "equilibrium_round": None, "final_price": F(-1, 3), "converged": False}]
    assert summary_csv(rows).splitlines() == ["true_state,equilibrium_round,final_price,converged",
                                              "0,,-1/3,false"]
