"""Acceptance suites A1-A9, shared by ``dimarket verify`` and the test suite.

Each suite returns a :class:`SuiteResult`; a suite passes when it records no
failures.  Runs executed by A1-A4 feed an :class:`EquilibriumLog`, which A5
extends with its own random instances.
"""
from __future__ import annotations

import random
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional

from . import analysis
from .engine import Block, beta_gamma, check_consensus, conditional_bid, run_all_states, run_dynamics
from .generators import (
    all_parities,
    random_parity,
    random_prior,
    random_security,
    random_symmetric,
    random_symmetric_prior,
    random_table_prior,
    random_threshold,
)
from .model import (
    ParitySecurity,
    ProductBiasedPrior,
    SpinState,
    SymmetricSecurity,
    TableSecurity,
    ThresholdSecurity,
    make_parity,
    uniform_prior,
)
from .oracle import naive_run
from .schema import dump_trace

MAX_LISTED_FAILURES = 20


@dataclass
class SuiteResult:
    name: str
    description: str
    cases: int = 0
    failures: list = field(default_factory=list)
    seconds: float = 0.0

    @property
    def passed(self) -> bool:
        return not self.failures and self.cases > 0

    def fail(self, msg: str):
        self.failures.append(msg)

    def line(self) -> str:
        verdict = "PASS" if self.passed else "FAIL"
        return (f"{self.name} {verdict}: {self.description} "
                f"[{self.cases} cases, {len(self.failures)} failures, {self.seconds:.1f}s]")


@dataclass
class EquilibriumLog:
    """Termination bound and bid/price agreement at equilibrium, per run.

    The bound counts refining rounds: a run whose partition last changes at round
    ``t`` is detected as stationary at round ``t + 1``.
    """

    runs: int = 0
    failures: list = field(default_factory=list)

    def check(self, g, P, result, label: str):
        self.runs += 1
        n = g.n_players
        bound = (1 << n) - 1
        if not result.terminated:
            self.failures.append(f"{label}: no equilibrium within the round limit")
            return
        refinements = max(leaf.round for leaf in result.leaves) - 1
        if refinements > bound:
            self.failures.append(f"{label}: {refinements} refining rounds > 2^N - 1 = {bound}")
        for msg in check_consensus(g, P, result):
            self.failures.append(f"{label}: {msg}")


def _timed(fn):
    def wrapper(*args, **kwargs):
        start = time.perf_counter()
        res = fn(*args, **kwargs)
        res.seconds = time.perf_counter() - start
        return res
    wrapper.__name__ = fn.__name__
    wrapper.__doc__ = fn.__doc__
    return wrapper


def _round_two_check(res, g, P, result, label):
    values = g.values
    for b in range(1 << g.n_players):
        eq = result.equilibrium_round(b)
        if eq is None or eq > 2:
            res.fail(f"{label} state {b}: equilibrium round {eq}")
        elif result.price_at(b, 2) != values[b] or not result.converged(b):
            res.fail(f"{label} state {b}: c_2 = {result.price_at(b, 2)} != g = {values[b]}")


@_timed
def suite_a1(seed: int = 1, log: Optional[EquilibriumLog] = None) -> SuiteResult:
    """Parity securities under uniformly biased priors reach the payoff by round 2."""
    res = SuiteResult("A1", "parity x biased prior, N=2..10, truth by round 2")
    rng = random.Random(seed)
    ps = [Fraction(1, 4), Fraction(1, 3), Fraction(2, 3), Fraction(9, 10)]
    for n in range(2, 11):
        securities = all_parities(n) if n <= 6 else [random_parity(rng, n) for _ in range(50)]
        for g in securities:
            for p in ps:
                P = ProductBiasedPrior(n, p)
                result = run_all_states(g, P)
                label = f"N={n} sign={g.sign} mask={sorted(g.mask)} p={p}"
                _round_two_check(res, g, P, result, label)
                if log is not None:
                    log.check(g, P, result, "A1 " + label)
                res.cases += 1
    return res


@_timed
def suite_a2(log: Optional[EquilibriumLog] = None) -> SuiteResult:
    """Full-mask parity under the unbiased prior never moves off price 0."""
    res = SuiteResult("A2", "full parity x uniform prior, N=2..8, price 0 and no convergence")
    for n in range(2, 9):
        g = make_parity(n, 1, range(1, n + 1))
        result = run_all_states(g, uniform_prior(n))
        if log is not None:
            log.check(g, uniform_prior(n), result, f"A2 N={n}")
        for b in range(1 << n):
            trace = result.trace(b)
            if any(r.price != 0 for r in trace.rounds) or trace.converged_to_truth:
                res.fail(f"N={n} state {b}: prices {[str(p) for p in trace.prices]}")
            res.cases += 1
    return res


@_timed
def suite_a3(seed: int = 3, log: Optional[EquilibriumLog] = None, per_n: int = 50) -> SuiteResult:
    """Totally symmetric securities and priors with nonzero covariance converge by round 2."""
    res = SuiteResult("A3", f"symmetric g x symmetric prior (gamma0 != 0), N=2..8, {per_n}x{per_n}")
    rng = random.Random(seed)
    for n in range(2, 9):
        securities = [random_symmetric(rng, n) for _ in range(per_n)]
        priors = [random_symmetric_prior(rng, n) for _ in range(per_n)]
        for gi, g in enumerate(securities):
            for pi, P in enumerate(priors):
                if analysis.gamma0(g, P) == 0:
                    continue
                result = run_all_states(g, P)
                label = f"N={n} A={g.levels} prior#{pi}"
                _round_two_check(res, g, P, result, label)
                if log is not None:
                    log.check(g, P, result, "A3 " + label)
                res.cases += 1
    return res


@_timed
def suite_a4(seed: int = 4, log: Optional[EquilibriumLog] = None,
             securities_per_n: int = 30, priors_per_n: int = 100) -> SuiteResult:
    """Threshold securities reach the payoff within N rounds under random full-support priors."""
    res = SuiteResult("A4", f"threshold x random prior, N=2..8, {securities_per_n}x{priors_per_n}, "
                            "truth within N rounds")
    rng = random.Random(seed)
    for n in range(2, 9):
        securities = [random_threshold(rng, n) for _ in range(securities_per_n)]
        priors = [random_table_prior(rng, n) for _ in range(priors_per_n)]
        for gi, g in enumerate(securities):
            values = g.values
            for pi, P in enumerate(priors):
                result = run_all_states(g, P)
                for b in range(1 << n):
                    if result.equilibrium_round(b) is None:
                        res.fail(f"N={n} threshold#{gi} prior#{pi} state {b}: no equilibrium")
                    elif result.price_at(b, n) != values[b] or not result.converged(b):
                        res.fail(f"N={n} threshold#{gi} prior#{pi} state {b}: "
                                 f"c_N = {result.price_at(b, n)} != g = {values[b]}")
                if log is not None:
                    log.check(g, P, result, f"A4 N={n} threshold#{gi} prior#{pi}")
                res.cases += 1
    return res


@_timed
def suite_a5(seed: int = 5, log: Optional[EquilibriumLog] = None, extra: int = 500) -> SuiteResult:
    """Equilibrium within 2^N - 1 rounds, with every bid equal to the price there."""
    if log is None:
        log = EquilibriumLog()
        suite_a1(log=log)
        suite_a2(log=log)
        suite_a3(log=log)
        suite_a4(log=log)
    res = SuiteResult("A5", f"common-knowledge equilibrium over A1-A4 runs + {extra} random pairs")
    rng = random.Random(seed)
    for k in range(extra):
        n = rng.randint(1, 6)
        g, P = random_security(rng, n), random_prior(rng, n)
        log.check(g, P, run_all_states(g, P), f"random#{k} N={n}")
    res.cases = log.runs
    res.failures = list(log.failures)
    return res


@_timed
def suite_a6(seed: int = 6, instances: int = 1000) -> SuiteResult:
    """The fast engine and the naive reference agree byte for byte."""
    res = SuiteResult("A6", f"engine vs naive reference, {instances} instances, N=2..5")
    rng = random.Random(seed)
    for k in range(instances):
        n = rng.randint(2, 5)
        g, P = random_security(rng, n), random_prior(rng, n)
        s = SpinState(n, rng.randrange(1 << n))
        fast = dump_trace(run_dynamics(g, P, s))
        slow = dump_trace(naive_run(g, P, s))
        if fast != slow:
            res.fail(f"instance {k} (N={n}, state {s.bits}): traces differ")
        res.cases += 1
    return res


@_timed
def suite_a7() -> SuiteResult:
    """XOR under the uniform prior: stuck at price 0 from round 1."""
    res = SuiteResult("A7", "XOR x uniform prior, N=2: equilibrium at round 1, price 0, no convergence")
    g = make_parity(2, 1, (1, 2))
    P = uniform_prior(2)
    for b in range(4):
        trace = run_dynamics(g, P, SpinState(2, b))
        if trace.equilibrium_round != 1 or trace.final_price != 0 or trace.converged_to_truth:
            res.fail(f"state {b}: eq={trace.equilibrium_round} price={trace.final_price}")
        res.cases += 1
    return res


def _structural_checks(rng, g, P, result, fail: Callable[[str], None]):
    n = g.n_players
    size = 1 << n
    prev = None
    for part in result.partitions:
        seen = []
        for B in part.blocks:
            seen.extend(B.members)
        if sorted(seen) != list(range(size)):
            fail(f"round {part.round}: blocks do not partition the state space")
        if prev is not None:
            owner = {}
            for i, B in enumerate(prev.blocks):
                for s in B.members:
                    owner[s] = i
            for B in part.blocks:
                if len({owner[s] for s in B.members}) != 1:
                    fail(f"round {part.round}: a block straddles two earlier blocks")
        prev = part
    b = rng.randrange(size)
    trace = result.trace(b)
    for r in trace.rounds:
        if b not in r.block_after or b not in r.block_before:
            fail(f"state {b} left its own block at round {r.round}")
        if not r.block_after <= r.block_before:
            fail(f"round {r.round}: block grew")
        if not -1 <= r.price <= 1 or any(not -1 <= x <= 1 for x in r.bids):
            fail(f"round {r.round}: price or bid outside [-1, 1]")
        if r.price != sum(r.bids, Fraction(0)) / n:
            fail(f"round {r.round}: price is not the mean bid")
    # affine bid identity on a random block of a random round
    part = rng.choice(result.partitions)
    B = rng.choice(part.blocks)
    for i in range(n):
        bits = {(s >> i) & 1 for s in B.members}
        if len(bits) < 2:
            continue
        beta, gamma = beta_gamma(g, P, B, i)
        if conditional_bid(g, P, B, i, 1) != beta + gamma or conditional_bid(g, P, B, i, -1) != beta - gamma:
            fail(f"affine bid identity fails for player {i + 1} in round {part.round}")
    # classification round trips at this N
    sign = rng.choice((1, -1))
    mask = frozenset(j + 1 for j in range(n) if rng.random() < 0.5)
    parity = ParitySecurity(n, sign, mask)
    if analysis.parity_decompose(TableSecurity(n, parity.values)) != (sign, mask):
        fail(f"parity round trip fails for sign={sign} mask={sorted(mask)}")
    levels = tuple(rng.choice((1, -1)) for _ in range(n + 1))
    if analysis.is_totally_symmetric(SymmetricSecurity(n, levels)) != levels:
        fail(f"symmetric round trip fails for {levels}")
    if n <= 6:
        witness = analysis.recognize_threshold(g)
        if witness is not None and ThresholdSecurity(n, *witness).values != g.values:
            fail(f"threshold witness {witness} does not reproduce the security")
        if isinstance(g, ThresholdSecurity) and witness is None:
            fail("a threshold security was not recognized")


@_timed
def suite_a8(seed: int = 8, instances: int = 10_000) -> SuiteResult:
    """Structural invariants over random instances."""
    res = SuiteResult("A8", f"structural properties over {instances} random instances, N<=8")
    rng = random.Random(seed)
    sizes = [1, 2, 3, 4, 5, 6, 7, 8]
    weights = [6, 10, 10, 10, 8, 4, 2, 1]
    for k in range(instances):
        n = rng.choices(sizes, weights)[0]
        g, P = random_security(rng, n), random_prior(rng, n)
        result = run_all_states(g, P)
        _structural_checks(rng, g, P, result, lambda msg: res.fail(f"instance {k} N={n}: {msg}"))
        res.cases += 1
    return res


@_timed
def suite_a9() -> SuiteResult:
    """Symmetric instances with zero covariance fail to reveal a non-constant payoff."""
    res = SuiteResult("A9", "gamma0 = 0 symmetric instances do not converge everywhere")
    cases = [(make_parity(2, 1, (1, 2)), uniform_prior(2))]
    for n in range(3, 7):
        cases.append((make_parity(n, 1, range(1, n + 1)), uniform_prior(n)))
        # balanced symmetric payoff with zero covariance under the uniform prior
        for levels in _zero_covariance_levels(n):
            cases.append((SymmetricSecurity(n, levels), uniform_prior(n)))
    for g, P in cases:
        if analysis.gamma0(g, P) != 0:
            res.fail(f"{g}: gamma0 is not 0")
            continue
        result = run_all_states(g, P)
        if all(result.converged(b) for b in range(1 << g.n_players)):
            res.fail(f"N={g.n_players} levels={analysis.is_totally_symmetric(g)}: every state converged")
        res.cases += 1
    return res


def _zero_covariance_levels(n: int, limit: int = 3):
    import math

    out = []
    for code in range(1 << (n + 1)):
        levels = tuple(1 if (code >> k) & 1 else -1 for k in range(n + 1))
        if len(set(levels)) == 1:
            continue
        cov = sum(math.comb(n, k) * a * (2 * k - n) for k, a in enumerate(levels))
        if cov == 0:
            out.append(levels)
            if len(out) == limit:
                break
    return out


SUITES = {
    "A1": suite_a1,
    "A2": suite_a2,
    "A3": suite_a3,
    "A4": suite_a4,
    "A5": suite_a5,
    "A6": suite_a6,
    "A7": suite_a7,
    "A8": suite_a8,
    "A9": suite_a9,
}
