"""Exact market dynamics as partition refinement of the state space.

At every round each player bids the expectation of the payoff conditional on
their own spin and on the set of states consistent with all prices announced so
far.  The price is the average bid.  Because a block's bids depend only on the
block, the dynamics for every true state are read off one shared refinement:
each block splits into sub-blocks of equal price, and a block that does not split
never splits again.
"""
from __future__ import annotations

import math
from collections.abc import Mapping
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Optional

from . import kernel
from .model import DimensionError, ModelError, Prior, Security, SpinState, _check_dims


class PreconditionError(ModelError):
    """An operation was called outside its domain (empty slice, state outside block)."""


@dataclass(frozen=True)
class Block:
    """A set of price-indistinguishable states, as sorted state bitmasks."""

    n_players: int
    members: tuple

    def __post_init__(self):
        members = tuple(sorted(set(self.members)))
        if not members:
            raise ModelError("a block must be nonempty")
        if members[0] < 0 or members[-1] >= 1 << self.n_players:
            raise ModelError(f"block members out of range for {self.n_players} players")
        object.__setattr__(self, "members", members)

    @classmethod
    def full(cls, n: int) -> "Block":
        return cls(n, tuple(range(1 << n)))

    def __contains__(self, item) -> bool:
        bits = item.bits if isinstance(item, SpinState) else item
        i = _bisect(self.members, bits)
        return i < len(self.members) and self.members[i] == bits

    def __len__(self):
        return len(self.members)

    def __iter__(self) -> Iterator[int]:
        return iter(self.members)

    def __le__(self, other: "Block") -> bool:
        return set(self.members) <= set(other.members)


def _bisect(seq, x):
    lo, hi = 0, len(seq)
    while lo < hi:
        mid = (lo + hi) // 2
        if seq[mid] < x:
            lo = mid + 1
        else:
            hi = mid
    return lo


def _trusted_block(n, members):
    # members already sorted, unique and in range
    b = object.__new__(Block)
    object.__setattr__(b, "n_players", n)
    object.__setattr__(b, "members", tuple(members))
    return b


@dataclass(frozen=True)
class Partition:
    n_players: int
    blocks: tuple
    round: int = 0

    def block_of(self, bits: int) -> Block:
        for b in self.blocks:
            if bits in b:
                return b
        raise ModelError(f"state {bits} is not covered by the partition")

    @classmethod
    def trivial(cls, n: int) -> "Partition":
        return cls(n, (Block.full(n),), 0)


@dataclass(frozen=True)
class RoundRecord:
    round: int
    block_before: Block
    bids: tuple
    price: Fraction
    block_after: Block


@dataclass(frozen=True)
class Trace:
    true_state: SpinState
    rounds: tuple
    equilibrium_round: Optional[int]
    final_price: Fraction
    converged_to_truth: bool

    @property
    def terminated(self) -> bool:
        return self.equilibrium_round is not None

    @property
    def prices(self) -> list[Fraction]:
        return [r.price for r in self.rounds]

    def price_at(self, t: int) -> Fraction:
        """Price announced at round ``t``; frozen at the equilibrium value afterwards."""
        if t < 1:
            raise ValueError("rounds start at 1")
        if t <= len(self.rounds):
            return self.rounds[t - 1].price
        if not self.terminated:
            raise ValueError(f"run stopped at round {len(self.rounds)} before equilibrium")
        return self.final_price


# --------------------------------------------------------------------------
# per-block quantities straight from the prior


def _members(B) -> tuple:
    return B.members if isinstance(B, Block) else tuple(B)


def conditional_bid(g: Security, P: Prior, B, i: int, spin: int) -> Fraction:
    """Expected payoff given player ``i`` (zero-based) holds ``spin`` and the state is in ``B``."""
    _check_dims(g, P)
    if spin not in (1, -1):
        raise ModelError(f"spin must be +1 or -1, got {spin!r}")
    bit = 1 if spin > 0 else 0
    num = den = 0
    weights, _ = P.integer_weights
    values = g.values
    for s in _members(B):
        if (s >> i) & 1 == bit:
            w = weights[s]
            den += w
            num += values[s] * w
    if den == 0:
        raise PreconditionError(f"no state of the block has player {i + 1} at {spin:+d}")
    return Fraction(num, den)


def clearing_price(g: Security, P: Prior, B, s: SpinState) -> Fraction:
    _check_dims(g, s)
    if s.bits not in set(_members(B)):
        raise PreconditionError(f"state {s} is not in the block")
    total = sum((conditional_bid(g, P, B, i, s.spin(i)) for i in range(g.n_players)), Fraction(0))
    return total / g.n_players


def beta_gamma(g: Security, P: Prior, B, i: int) -> tuple[Fraction, Fraction]:
    """Affine decomposition ``bid(spin) = beta + gamma * spin`` of player ``i``'s bid.

    Built from the four block sums of ``P``, ``sigma_i P``, ``g P`` and
    ``g sigma_i P``.  When the block holds only one value of ``sigma_i`` the bid
    is the block expectation and ``gamma`` is 0.
    """
    _check_dims(g, P)
    z = zs = gz = gzs = 0
    weights, _ = P.integer_weights
    values = g.values
    for s in _members(B):
        w = weights[s]
        sign = 1 if (s >> i) & 1 else -1
        z += w
        zs += sign * w
        gz += values[s] * w
        gzs += values[s] * sign * w
    if z + zs == 0 or z - zs == 0:
        return Fraction(gz, z), Fraction(0)
    up = Fraction(gz + gzs, z + zs)
    down = Fraction(gz - gzs, z - zs)
    return (up + down) / 2, (up - down) / 2


# --------------------------------------------------------------------------
# the refinement engine


_UNIT_PRICE = {1: Fraction(1), -1: Fraction(-1)}


class Market:
    """A (security, prior) pair prepared for fast exact refinement."""

    def __init__(self, g: Security, P: Prior, backend: Optional[str] = None):
        _check_dims(g, P)
        self.security = g
        self.prior = P
        self.n = g.n_players
        self._weights, _ = P.integer_weights
        self._ctx = kernel.make_context(self.n, self._weights, g.values, backend)

    def block_bids(self, members) -> list:
        """Bids indexed ``2*i + bit``; ``None`` where the slice is empty."""
        return bids_from_sums(self._ctx.slice_sums(members))

    def split(self, members):
        """Slice sums of the block and its sub-blocks of equal price.

        Returns ``(sums, [(price, sub_members), ...])`` with sub-blocks ordered by
        smallest member; ``bids_from_sums(sums)`` recovers the bids.
        """
        if len(members) == 1:
            return self._singleton(members[0])
        sums = self._ctx.slice_sums(members)
        mass, gmass = sums
        # any common multiple of the slice masses puts all bids over one denominator
        scale = math.lcm(*(m for m in mass if m))
        coeffs = [gm * (scale // m) if m else 0 for m, gm in zip(mass, gmass)]
        groups = self._ctx.price_groups(members, coeffs)
        denom = self.n * scale
        return sums, [(Fraction(key, denom), sub) for key, sub in groups]

    def _singleton(self, s):
        # a single state never splits and every player bids its payoff
        n = self.n
        w = self._weights[s]
        v = self.security.values[s]
        mass = [0] * (2 * n)
        gmass = [0] * (2 * n)
        for i in range(n):
            k = 2 * i + ((s >> i) & 1)
            mass[k] = w
            gmass[k] = v * w
        return (mass, gmass), [(_UNIT_PRICE[v], [s])]


def bids_from_sums(sums) -> list:
    mass, gmass = sums
    return [Fraction(gm, m) if m else None for m, gm in zip(mass, gmass)]


def _bids_for(sums, bits, n) -> tuple:
    mass, gmass = sums
    idx = [2 * i + ((bits >> i) & 1) for i in range(n)]
    return tuple(Fraction(gmass[k], mass[k]) for k in idx)


def refine_partition(g: Security, P: Prior, part: Partition) -> Partition:
    _check_dims(g, part)
    market = Market(g, P)
    blocks = []
    for B in part.blocks:
        _, groups = market.split(B.members)
        blocks.extend(_trusted_block(g.n_players, sub) for _, sub in groups)
    blocks.sort(key=lambda b: b.members[0])
    return Partition(g.n_players, tuple(blocks), part.round + 1)


def _check_max_rounds(max_rounds, n):
    if max_rounds is None:
        return 1 << n
    if max_rounds < 1:
        raise ModelError(f"max_rounds must be at least 1, got {max_rounds}")
    return max_rounds


def run_dynamics(g: Security, P: Prior, true_state: SpinState,
                 max_rounds: Optional[int] = None, market: Optional[Market] = None) -> Trace:
    """Follow the true state's block until it stops splitting or ``max_rounds`` pass."""
    _check_dims(g, P)
    _check_dims(g, true_state)
    n = g.n_players
    max_rounds = _check_max_rounds(max_rounds, n)
    market = market or Market(g, P)
    bits = true_state.bits
    block = Block.full(n)
    records = []
    eq_round = None
    for t in range(1, max_rounds + 1):
        sums, groups = market.split(block.members)
        for price, sub in groups:
            if bits in sub:
                break
        if len(sub) == len(block):
            after = block
        else:
            after = _trusted_block(n, sub)
        records.append(RoundRecord(t, block, _bids_for(sums, bits, n), price, after))
        if after is block:
            eq_round = t
            break
        block = after
    final = records[-1].price
    return Trace(true_state, tuple(records), eq_round, final, final == g.values[bits])


class _Node:
    __slots__ = ("block", "round", "price", "parent", "sums", "stationary")

    def __init__(self, block, round, price, parent):
        self.block = block
        self.round = round
        self.price = price
        self.parent = parent
        self.sums = None
        self.stationary = False


class AllStatesResult(Mapping):
    """Traces of every true state, read off one shared refinement.

    Behaves as a mapping ``SpinState -> Trace``; traces are assembled on access.
    The summary accessors (``equilibrium_round``, ``final_price``, ...) take state
    bitmasks and avoid building traces.
    """

    def __init__(self, market: Market, leaves: list, partitions: list):
        self.market = market
        self.n = market.n
        self.partitions = partitions
        self._leaf = [None] * (1 << self.n)
        for leaf in leaves:
            for s in leaf.block.members:
                self._leaf[s] = leaf

    # Mapping protocol
    def __getitem__(self, state) -> Trace:
        bits = state.bits if isinstance(state, SpinState) else state
        if isinstance(state, SpinState) and state.n_players != self.n:
            raise DimensionError(f"state has {state.n_players} players, market has {self.n}")
        return self.trace(bits)

    def __iter__(self):
        return (SpinState(self.n, b) for b in range(1 << self.n))

    def __len__(self):
        return 1 << self.n

    # summaries
    @property
    def leaves(self) -> list:
        seen, out = set(), []
        for leaf in self._leaf:
            if id(leaf) not in seen:
                seen.add(id(leaf))
                out.append(leaf)
        return out

    @property
    def final_partition(self) -> Partition:
        return self.partitions[-1]

    @property
    def terminated(self) -> bool:
        return all(leaf.stationary for leaf in self._leaf)

    def equilibrium_round(self, bits: int) -> Optional[int]:
        leaf = self._leaf[bits]
        return leaf.round if leaf.stationary else None

    def final_price(self, bits: int) -> Fraction:
        return self._leaf[bits].price

    def converged(self, bits: int) -> bool:
        return self._leaf[bits].price == self.market.security.values[bits]

    def price_at(self, bits: int, t: int) -> Fraction:
        node = self._leaf[bits]
        if t > node.round:
            if not node.stationary:
                raise ValueError(f"run stopped at round {node.round} before equilibrium")
            return node.price
        while node.round > t:
            node = node.parent
        return node.price

    def trace(self, bits: int) -> Trace:
        n = self.n
        path = []
        node = self._leaf[bits]
        while node.parent is not None:
            path.append(node)
            node = node.parent
        path.reverse()
        records = []
        for node in path:
            parent = node.parent
            records.append(RoundRecord(node.round, parent.block, _bids_for(self._sums(parent), bits, n),
                                       node.price, node.block))
        leaf = self._leaf[bits]
        return Trace(SpinState(n, bits), tuple(records), self.equilibrium_round(bits), leaf.price,
                     self.converged(bits))

    def equilibrium_bids(self, leaf) -> list:
        """Bid table of a stationary block, as computed at its last round."""
        return bids_from_sums(self._sums(leaf.parent))

    def _sums(self, node):
        # singleton blocks skip the kernel during the run; fill in on demand
        if node.sums is None:
            node.sums = self.market._singleton(node.block.members[0])[0]
        return node.sums


def run_all_states(g: Security, P: Prior, max_rounds: Optional[int] = None,
                   market: Optional[Market] = None) -> AllStatesResult:
    _check_dims(g, P)
    n = g.n_players
    max_rounds = _check_max_rounds(max_rounds, n)
    market = market or Market(g, P)
    values = g.values
    root = _Node(Block.full(n), 0, None, None)
    active = [root]
    done = []
    partitions = [Partition(n, (root.block,), 0)]
    t = 0
    while active and t < max_rounds:
        t += 1
        nxt = []
        for node in active:
            members = node.block.members
            if len(members) == 1:
                child = _Node(node.block, t, _UNIT_PRICE[values[members[0]]], node)
                child.stationary = True
                done.append(child)
                continue
            node.sums, groups = market.split(members)
            if len(groups) == 1:
                child = _Node(node.block, t, groups[0][0], node)
                child.stationary = True
                done.append(child)
            else:
                for price, sub in groups:
                    nxt.append(_Node(_trusted_block(n, sub), t, price, node))
        active = nxt
        blocks = [leaf.block for leaf in done] + [node.block for node in active]
        blocks.sort(key=lambda b: b.members[0])
        partitions.append(Partition(n, tuple(blocks), t))
    return AllStatesResult(market, done + active, partitions)


def check_consensus(g: Security, P: Prior, result: AllStatesResult) -> list[str]:
    """Violations of bid/price agreement at equilibrium, recomputed from the prior.

    At a stationary block every player's conditional bid must equal the block's
    price for every state of the block.
    """
    problems = []
    n = g.n_players
    weights, _ = P.integer_weights
    values = g.values
    for leaf in result.leaves:
        if not leaf.stationary:
            problems.append(f"block starting {leaf.block.members[0]} did not reach equilibrium")
            continue
        num = [0] * (2 * n)
        den = [0] * (2 * n)
        for s in leaf.block.members:
            w = weights[s]
            gw = values[s] * w
            for i in range(n):
                k = 2 * i + ((s >> i) & 1)
                num[k] += gw
                den[k] += w
        price = leaf.price
        pn, pd = price.numerator, price.denominator
        for k in range(2 * n):
            if den[k] and num[k] * pd != den[k] * pn:
                problems.append(f"player {k // 2 + 1} spin {'+' if k & 1 else '-'} bids "
                                f"{Fraction(num[k], den[k])} but price is {price} "
                                f"on block starting {leaf.block.members[0]}")
    return problems


def iter_blocks(result: AllStatesResult) -> Iterable[tuple[int, Block]]:
    for part in result.partitions:
        for b in part.blocks:
            yield part.round, b
