"""JSON forms of securities, priors, traces and reports.

Rationals travel as ``"num/den"`` strings (always with an explicit denominator);
tables are flat arrays in state-bitmask order.  Serialization is canonical:
``dumps`` sorts keys and uses compact separators, so equal objects give equal
bytes.
"""
from __future__ import annotations

import csv
import io
import json
from fractions import Fraction
from typing import Iterable

from .model import (
    ModelError,
    ParitySecurity,
    Prior,
    ProductBiasedPrior,
    ProductPrior,
    ResourceError,
    Security,
    SpinState,
    SymmetricLevelsPrior,
    SymmetricSecurity,
    TablePrior,
    TableSecurity,
    ThresholdSecurity,
    as_fraction,
    bias_from_magnetization,
    check_players,
)


class SchemaError(ModelError):
    """A JSON document does not follow the expected schema."""


def format_rational(x) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def parse_rational(text) -> Fraction:
    if isinstance(text, float):
        raise SchemaError(f"rationals must be strings like '3/4', got float {text!r}")
    try:
        return as_fraction(text)
    except ModelError as exc:
        raise SchemaError(str(exc)) from exc


def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def _require(d: dict, key: str, where: str):
    if not isinstance(d, dict):
        raise SchemaError(f"{where}: expected an object, got {type(d).__name__}")
    if key not in d:
        raise SchemaError(f"{where}: missing field {key!r}")
    return d[key]


def _n_from(d: dict, n, where: str) -> int:
    n_doc = d.get("n_players", n)
    if n_doc is None:
        raise SchemaError(f"{where}: n_players is required")
    if n is not None and n_doc != n:
        raise SchemaError(f"{where}: n_players={n_doc} but the experiment has {n}")
    return check_players(n_doc)


# securities --------------------------------------------------------------

def security_to_json(g: Security) -> dict:
    if isinstance(g, ParitySecurity):
        return {"kind": "parity", "n_players": g.n_players, "sign": g.sign, "mask": sorted(g.mask)}
    if isinstance(g, SymmetricSecurity):
        return {"kind": "symmetric", "n_players": g.n_players, "levels": list(g.levels)}
    if isinstance(g, ThresholdSecurity):
        return {"kind": "threshold", "n_players": g.n_players,
                "w": [format_rational(w) for w in g.weights], "theta": format_rational(g.theta)}
    if isinstance(g, TableSecurity):
        return {"kind": "table", "n_players": g.n_players, "values": list(g.table)}
    raise SchemaError(f"cannot serialize {type(g).__name__}")


def build_security(doc: dict, n: int | None = None) -> Security:
    kind = _require(doc, "kind", "security")
    try:
        if kind == "parity":
            n = _n_from(doc, n, "security")
            return ParitySecurity(n, doc.get("sign", 1), frozenset(doc.get("mask", [])))
        if kind == "symmetric":
            levels = _require(doc, "levels", "security")
            n = _n_from(doc, n if n is not None else len(levels) - 1, "security")
            return SymmetricSecurity(n, tuple(levels))
        if kind == "threshold":
            w = [parse_rational(x) for x in _require(doc, "w", "security")]
            n = _n_from(doc, n if n is not None else len(w), "security")
            return ThresholdSecurity(n, tuple(w), parse_rational(doc.get("theta", "0/1")))
        if kind == "table":
            values = _require(doc, "values", "security")
            n = _n_from(doc, n if n is not None else max(len(values).bit_length() - 1, 1), "security")
            return TableSecurity(n, tuple(values))
    except SchemaError:
        raise
    except ModelError as exc:
        if isinstance(exc, ResourceError):
            raise
        raise SchemaError(f"security: {exc}") from exc
    raise SchemaError(f"security: unknown kind {kind!r}")


# priors ------------------------------------------------------------------

def prior_to_json(P: Prior) -> dict:
    if isinstance(P, ProductBiasedPrior):
        return {"kind": "product_biased", "n_players": P.n_players, "p": format_rational(P.p)}
    if isinstance(P, ProductPrior):
        return {"kind": "product", "n_players": P.n_players, "p": [format_rational(p) for p in P.ps]}
    if isinstance(P, SymmetricLevelsPrior):
        return {"kind": "symmetric_levels", "n_players": P.n_players,
                "levels": [format_rational(q) for q in P.levels]}
    if isinstance(P, TablePrior):
        return {"kind": "table", "n_players": P.n_players, "masses": [format_rational(m) for m in P.table]}
    raise SchemaError(f"cannot serialize {type(P).__name__}")


def build_prior(doc: dict, n: int | None = None) -> Prior:
    """Construct and validate a prior from its JSON form.

    ``product_biased`` accepts either ``p`` or the magnetization ``m = 2p - 1``;
    ``uniform`` is shorthand for ``p = 1/2``.
    """
    kind = _require(doc, "kind", "prior")
    try:
        if kind == "uniform":
            return ProductBiasedPrior(_n_from(doc, n, "prior"), Fraction(1, 2))
        if kind == "product_biased":
            n = _n_from(doc, n, "prior")
            if "m" in doc:
                return bias_from_magnetization(n, parse_rational(doc["m"]))
            return ProductBiasedPrior(n, parse_rational(_require(doc, "p", "prior")))
        if kind == "product":
            ps = [parse_rational(p) for p in _require(doc, "p", "prior")]
            return ProductPrior(_n_from(doc, n if n is not None else len(ps), "prior"), tuple(ps))
        if kind == "symmetric_levels":
            levels = [parse_rational(q) for q in _require(doc, "levels", "prior")]
            return SymmetricLevelsPrior(_n_from(doc, n if n is not None else len(levels) - 1, "prior"),
                                        tuple(levels))
        if kind == "table":
            masses = [parse_rational(m) for m in _require(doc, "masses", "prior")]
            n = _n_from(doc, n if n is not None else max(len(masses).bit_length() - 1, 1), "prior")
            return TablePrior(n, tuple(masses))
    except SchemaError:
        raise
    except ModelError as exc:
        if isinstance(exc, ResourceError):
            raise
        raise SchemaError(f"prior: {exc}") from exc
    raise SchemaError(f"prior: unknown kind {kind!r}")


# states ------------------------------------------------------------------

def build_state(doc, n: int) -> SpinState:
    """A state given as a list of +1/-1 spins or as ``{"bits": k}``."""
    try:
        if isinstance(doc, dict):
            return SpinState(n, _require(doc, "bits", "true_state"))
        if isinstance(doc, list):
            s = SpinState.from_spins(doc)
            if s.n_players != n:
                raise SchemaError(f"true_state has {s.n_players} spins, expected {n}")
            return s
    except SchemaError:
        raise
    except ModelError as exc:
        raise SchemaError(f"true_state: {exc}") from exc
    raise SchemaError(f"true_state: expected a spin list or {{'bits': k}}, got {doc!r}")


# traces ------------------------------------------------------------------

def trace_to_json(trace) -> dict:
    return {
        "n_players": trace.true_state.n_players,
        "true_state": trace.true_state.bits,
        "spins": list(trace.true_state.spins),
        "equilibrium_round": trace.equilibrium_round,
        "terminated": trace.terminated,
        "final_price": format_rational(trace.final_price),
        "converged_to_truth": trace.converged_to_truth,
        "rounds": [
            {"round": r.round, "price": format_rational(r.price),
             "bids": [format_rational(b) for b in r.bids], "block": list(r.block_after.members)}
            for r in trace.rounds
        ],
    }


def trace_from_json(doc: dict):
    from .engine import Block, RoundRecord, Trace

    n = doc["n_players"]
    before = Block.full(n)
    records = []
    for r in doc["rounds"]:
        after = Block(n, tuple(r["block"]))
        records.append(RoundRecord(r["round"], before, tuple(parse_rational(b) for b in r["bids"]),
                                   parse_rational(r["price"]), after))
        before = after
    return Trace(SpinState(n, doc["true_state"]), tuple(records), doc["equilibrium_round"],
                 parse_rational(doc["final_price"]), doc["converged_to_truth"])


def dump_trace(trace) -> str:
    return dumps(trace_to_json(trace))


SUMMARY_FIELDS = ["true_state", "equilibrium_round", "final_price", "converged"]


def summary_csv(rows: Iterable[dict], fields=SUMMARY_FIELDS) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: _csv_cell(row.get(k)) for k in fields})
    return buf.getvalue()


def _csv_cell(v):
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, Fraction):
        return format_rational(v)
    return v


def all_states_summary(result) -> list[dict]:
    return [{"true_state": b, "equilibrium_round": result.equilibrium_round(b),
             "final_price": result.final_price(b), "converged": result.converged(b)}
            for b in range(1 << result.n)]
