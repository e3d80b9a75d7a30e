"""Naive reference dynamics for differential testing.

Carries the observer's full distribution over states for every possible true
state and applies the Bayesian update literally: recompute every hypothetical
state's clearing price, zero out the states whose price differs from the one
observed, renormalize.  Cost is O(N 4^N) per round, so keep N small.

Nothing here is shared with :mod:`dimarket.engine` except the result types.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Optional

from .engine import Block, RoundRecord, Trace
from .model import Prior, Security, SpinState, _check_dims, payoff, prior_mass


def _player_distribution(pex, spins_i, spin):
    """The player's posterior: observer's distribution restricted to their own spin."""
    cond = [m if si == spin else Fraction(0) for si, m in zip(spins_i, pex)]
    z = sum(cond, Fraction(0))
    return [m / z for m in cond]


def _bid(gvals, pex, spins_i, spin):
    dist = _player_distribution(pex, spins_i, spin)
    return sum((gv * q for gv, q in zip(gvals, dist)), Fraction(0))


def _support(pex):
    return tuple(s for s, m in enumerate(pex) if m != 0)


def naive_distributions(g: Security, P: Prior, rounds: int):
    """Yield ``(bids, prices, pex)`` per round for every true state at once.

    ``pex[s]`` is the observer's distribution when the true state is ``s``,
    ``bids[s]`` the bids that produced round ``t``'s price ``prices[s]``.
    """
    _check_dims(g, P)
    n = g.n_players
    size = 1 << n
    states = [SpinState(n, s) for s in range(size)]
    initial = [prior_mass(P, st) for st in states]
    gvals = [payoff(g, st) for st in states]
    # spin of player i in every state, in state order
    spins = [[st.spin(i) for st in states] for i in range(n)]
    pex = [list(initial) for _ in range(size)]
    for _ in range(rounds):
        bids = []
        for sigma in range(size):
            bids.append([_bid(gvals, pex[sigma], spins[i], spins[i][sigma]) for i in range(n)])
        prices = [sum(b, Fraction(0)) / n for b in bids]
        new = []
        for sigma in range(size):
            filtered = [m if prices[hat] == prices[sigma] else Fraction(0)
                        for hat, m in enumerate(pex[sigma])]
            z = sum(filtered, Fraction(0))
            new.append([m / z for m in filtered])
        yield bids, prices, new
        pex = new


def naive_run(g: Security, P: Prior, true_state: SpinState, max_rounds: Optional[int] = None) -> Trace:
    _check_dims(g, true_state)
    n = g.n_players
    if max_rounds is None:
        max_rounds = 1 << n
    sigma = true_state.bits
    before = tuple(range(1 << n))
    records = []
    eq_round = None
    for t, (bids, prices, pex) in enumerate(naive_distributions(g, P, max_rounds), start=1):
        after = _support(pex[sigma])
        records.append(RoundRecord(t, Block(n, before), tuple(bids[sigma]), prices[sigma], Block(n, after)))
        if after == before:
            eq_round = t
            break
        before = after
    final = records[-1].price
    return Trace(true_state, tuple(records), eq_round, final, final == payoff(g, true_state))
