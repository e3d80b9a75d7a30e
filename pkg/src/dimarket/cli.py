"""Command-line harness: ``dimarket {run,all-states,sweep,classify,verify}``.

Experiments are described by a JSON config::

    {"schema": "dimarket.experiment/1",
     "n_players": 2,
     "security": {"kind": "parity", "sign": 1, "mask": [1, 2]},
     "prior": {"kind": "product_biased", "p": "3/4"},
     "true_state": [1, -1]}

Exit codes: 0 success, 1 a verification suite failed, 2 invalid input,
3 resource cap exceeded.
"""
from __future__ import annotations

import argparse
import json
import random
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import analysis, generators, suites
from .engine import run_all_states, run_dynamics
from .model import ModelError, ResourceError
from .schema import (
    SchemaError,
    all_states_summary,
    build_prior,
    build_security,
    build_state,
    dumps,
    format_rational,
    prior_to_json,
    security_to_json,
    summary_csv,
    trace_to_json,
)

SCHEMA = "dimarket.experiment/1"
EXIT_OK, EXIT_FAILED, EXIT_INPUT, EXIT_RESOURCE = 0, 1, 2, 3

SWEEP_FIELDS = ["security_index", "prior_index", "true_state", "equilibrium_round", "final_price",
                "converged", "gamma0", "classes", "prediction"]


def load_config(path, mode: str) -> dict:
    if path is None:
        return {}
    try:
        doc = json.loads(Path(path).read_text())
    except OSError as exc:
        raise SchemaError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise SchemaError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise SchemaError("config must be a JSON object")
    if doc.get("schema", SCHEMA) != SCHEMA:
        raise SchemaError(f"unsupported config schema {doc.get('schema')!r}; expected {SCHEMA!r}")
    if "mode" in doc and doc["mode"] != mode:
        raise SchemaError(f"config is for mode {doc['mode']!r}, not {mode!r}")
    return doc


def _n_players(cfg: dict):
    n = cfg.get("n_players")
    if n is not None and (not isinstance(n, int) or isinstance(n, bool)):
        raise SchemaError(f"n_players must be an integer, got {n!r}")
    return n


def _security_and_prior(cfg: dict):
    if "security" not in cfg:
        raise SchemaError("config needs a 'security'")
    n = _n_players(cfg)
    g = build_security(cfg["security"], n)
    P = build_prior(cfg["prior"], g.n_players) if "prior" in cfg else None
    return g, P


def _max_rounds(args, cfg):
    value = args.max_rounds if args.max_rounds is not None else cfg.get("max_rounds")
    if value is not None and (not isinstance(value, int) or value < 1):
        raise SchemaError(f"max_rounds must be a positive integer, got {value!r}")
    return value


def _seed(args, cfg) -> int:
    seed = args.seed if args.seed is not None else cfg.get("seed", 0)
    if not isinstance(seed, int):
        raise SchemaError(f"seed must be an integer, got {seed!r}")
    return seed


def _emit(text: str, out):
    if out:
        Path(out).write_text(text if text.endswith("\n") else text + "\n")
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def summary_line(trace) -> str:
    eq = trace.equilibrium_round if trace.terminated else "none"
    return f"eq@{eq} price={trace.final_price} truth={'true' if trace.converged_to_truth else 'false'}"


# commands ------------------------------------------------------------------

def cmd_run(args) -> int:
    cfg = load_config(args.config, "run")
    g, P = _security_and_prior(cfg)
    if P is None:
        raise SchemaError("config needs a 'prior'")
    if "true_state" not in cfg:
        raise SchemaError("config needs a 'true_state'")
    state = build_state(cfg["true_state"], g.n_players)
    trace = run_dynamics(g, P, state, _max_rounds(args, cfg))
    print(summary_line(trace))
    if args.out:
        _emit(dumps(trace_to_json(trace)), args.out)
    return EXIT_OK


def cmd_all_states(args) -> int:
    cfg = load_config(args.config, "all-states")
    g, P = _security_and_prior(cfg)
    if P is None:
        raise SchemaError("config needs a 'prior'")
    result = run_all_states(g, P, _max_rounds(args, cfg))
    rows = all_states_summary(result)
    hits = sum(r["converged"] for r in rows)
    eqs = [r["equilibrium_round"] for r in rows if r["equilibrium_round"] is not None]
    print(f"converged {hits}/{len(rows)} max_eq={max(eqs) if eqs else 'none'}")
    if args.out and str(args.out).endswith(".csv"):
        _emit(summary_csv(rows), args.out)
    elif args.out:
        doc = {"security": security_to_json(g), "prior": prior_to_json(P),
               "traces": [trace_to_json(result.trace(b)) for b in range(1 << g.n_players)]}
        _emit(dumps(doc), args.out)
    else:
        _emit(summary_csv(rows), None)
    return EXIT_OK


def cmd_classify(args) -> int:
    cfg = load_config(args.config, "classify")
    g, P = _security_and_prior(cfg)
    report = analysis.classify(g, P)
    _emit(dumps(analysis.report_to_json(report)), args.out)
    return EXIT_OK


def cmd_verify(args) -> int:
    cfg = load_config(args.config, "verify")
    name = args.suite or cfg.get("suite")
    if name is None:
        raise SchemaError("name a suite: dimarket verify A1 (or 'all')")
    names = list(suites.SUITES) if name == "all" else [name]
    unknown = [s for s in names if s not in suites.SUITES]
    if unknown:
        raise SchemaError(f"unknown suite {unknown[0]!r}; choose from {', '.join(suites.SUITES)} or all")
    ok = True
    log = suites.EquilibriumLog() if "A5" in names and len(names) > 1 else None
    lines = []
    for s in names:
        fn = suites.SUITES[s]
        if log is not None and s in ("A1", "A2", "A3", "A4", "A5"):
            res = fn(log=log)
        else:
            res = fn()
        print(res.line())
        for msg in res.failures[:suites.MAX_LISTED_FAILURES]:
            print(f"    {msg}")
        lines.append(res.line())
        ok = ok and res.passed
    if args.out:
        _emit("\n".join(lines), args.out)
    return EXIT_OK if ok else EXIT_FAILED


# sweeps --------------------------------------------------------------------

def _expand_securities(entries, n, rng):
    out = []
    for e in entries:
        if not isinstance(e, dict):
            raise SchemaError(f"sweep security entry must be an object, got {e!r}")
        gen = e.get("generate")
        if gen is None:
            out.append(build_security(e, n))
            continue
        count = e.get("count", 1)
        if gen == "parity_all":
            out.extend(generators.all_parities(n))
        elif gen == "parity":
            out.extend(generators.random_parity(rng, n) for _ in range(count))
        elif gen == "symmetric":
            out.extend(generators.random_symmetric(rng, n) for _ in range(count))
        elif gen == "threshold":
            bound = e.get("bound", 8)
            out.extend(generators.random_threshold(rng, n, bound) for _ in range(count))
        elif gen == "table":
            out.extend(generators.random_table_security(rng, n) for _ in range(count))
        else:
            raise SchemaError(f"unknown security generator {gen!r}")
    return out


def _expand_priors(entries, n, rng):
    from .model import ProductBiasedPrior

    out = []
    for e in entries:
        if not isinstance(e, dict):
            raise SchemaError(f"sweep prior entry must be an object, got {e!r}")
        gen = e.get("generate")
        if gen is None:
            out.append(build_prior(e, n))
            continue
        count = e.get("count", 1)
        if gen == "biased":
            from .schema import parse_rational

            for p in e.get("p", []):
                try:
                    out.append(ProductBiasedPrior(n, parse_rational(p)))
                except ModelError as exc:
                    raise SchemaError(f"sweep prior: {exc}") from exc
        elif gen == "table":
            out.extend(generators.random_table_prior(rng, n) for _ in range(count))
        elif gen == "symmetric":
            out.extend(generators.random_symmetric_prior(rng, n) for _ in range(count))
        elif gen == "product":
            out.extend(generators.random_product_prior(rng, n) for _ in range(count))
        else:
            raise SchemaError(f"unknown prior generator {gen!r}")
    return out


def _sweep_pair(task):
    gi, pi, g, P, tags, max_rounds = task
    try:
        g0 = analysis.gamma0(g, P)
    except analysis.ClassificationError:
        g0 = None
    prediction = analysis.predict_round_two(g, P)
    result = run_all_states(g, P, max_rounds)
    rows = []
    for b in range(1 << g.n_players):
        rows.append({
            "security_index": gi,
            "prior_index": pi,
            "true_state": b,
            "equilibrium_round": result.equilibrium_round(b),
            "final_price": result.final_price(b),
            "converged": result.converged(b),
            "gamma0": format_rational(g0) if g0 is not None else None,
            "classes": "|".join(tags),
            "prediction": prediction.reason if prediction.holds else "",
        })
    return rows


def sweep_rows(cfg: dict, seed: int, max_rounds=None, jobs: int = 1) -> list[dict]:
    n = _n_players(cfg)
    if n is None:
        raise SchemaError("sweep configs need n_players")
    spec = cfg.get("sweep")
    if not isinstance(spec, dict):
        raise SchemaError("config needs a 'sweep' object with 'securities' and 'priors'")
    rng = random.Random(seed)
    securities = _expand_securities(spec.get("securities", []), n, rng)
    priors = _expand_priors(spec.get("priors", []), n, rng)
    if not securities or not priors:
        raise SchemaError("sweep needs at least one security and one prior")
    need_gamma = bool(spec.get("require_gamma0_nonzero", False))
    tags = [analysis.classify(g, threshold=n <= analysis.LP_MAX_PLAYERS).tags for g in securities]
    tasks = []
    for gi, g in enumerate(securities):
        for pi, P in enumerate(priors):
            if need_gamma:
                try:
                    if analysis.gamma0(g, P) == 0:
                        continue
                except analysis.ClassificationError:
                    continue
            tasks.append((gi, pi, g, P, tags[gi], max_rounds))
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            chunks = list(pool.map(_sweep_pair, tasks, chunksize=max(1, len(tasks) // (4 * jobs))))
    else:
        chunks = [_sweep_pair(t) for t in tasks]
    return [row for chunk in chunks for row in chunk]


def cmd_sweep(args) -> int:
    cfg = load_config(args.config, "sweep")
    rows = sweep_rows(cfg, _seed(args, cfg), _max_rounds(args, cfg), args.jobs)
    hits = sum(r["converged"] for r in rows)
    eqs = [r["equilibrium_round"] for r in rows if r["equilibrium_round"] is not None]
    print(f"rows={len(rows)} converged={hits} max_eq={max(eqs) if eqs else 'none'}", file=sys.stderr)
    _emit(summary_csv(rows, SWEEP_FIELDS), args.out)
    return EXIT_OK


COMMANDS = {
    "run": cmd_run,
    "all-states": cmd_all_states,
    "sweep": cmd_sweep,
    "classify": cmd_classify,
    "verify": cmd_verify,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dimarket", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", type=Path, help="experiment config (JSON)")
        p.add_argument("--out", type=Path, help="output file")
        p.add_argument("--seed", type=int)
        p.add_argument("--max-rounds", type=int, dest="max_rounds")
        p.add_argument("--jobs", type=int, default=1)
        if name == "verify":
            p.add_argument("suite", nargs="?", help="A1..A9 or all")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "suite", None) is None:
        args.suite = None
    try:
        return COMMANDS[args.command](args)
    except ResourceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except ModelError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
