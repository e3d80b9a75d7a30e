"""States, securities and priors for the Boolean information market.

A state of the world is one spin per player, ``sigma_i in {+1, -1}``.  States are
encoded as integers: bit ``i`` is set exactly when player ``i + 1`` holds ``+1``.
Every table in the package (payoff tables, prior masses, partition blocks) is
indexed by this encoding.

All probabilities are :class:`fractions.Fraction` values; nothing here uses
floating point.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Sequence

MAX_PLAYERS = 24


class ModelError(ValueError):
    """Invalid security, prior or state."""


class DimensionError(ModelError):
    """Objects built for different numbers of players were combined."""


class ResourceError(ModelError):
    """The request would enumerate more states than the desk-scale cap allows."""


def check_players(n: int, cap: int = MAX_PLAYERS) -> int:
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        raise ModelError(f"n_players must be a positive integer, got {n!r}")
    if n > cap:
        raise ResourceError(f"n_players={n} exceeds the cap of {cap}")
    return n


def as_fraction(value) -> Fraction:
    """Coerce ints, Fractions and ``"num/den"`` strings to an exact Fraction.

    Floats are refused: a float has already lost the value it was meant to hold.
    """
    if isinstance(value, bool):
        raise ModelError(f"not a rational: {value!r}")
    if isinstance(value, (int, Fraction)):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise ModelError(f"not a rational: {value!r}") from exc
    raise ModelError(f"not an exact rational: {value!r} ({type(value).__name__})")


def spins_of(bits: int, n: int) -> tuple[int, ...]:
    return tuple(1 if (bits >> i) & 1 else -1 for i in range(n))


def popcount(bits: int) -> int:
    return bin(bits).count("1")


@dataclass(frozen=True, order=True)
class SpinState:
    """One assignment of the private bits, stored as an ``n_players``-bit mask."""

    n_players: int
    bits: int

    def __post_init__(self):
        check_players(self.n_players)
        if not isinstance(self.bits, int) or not 0 <= self.bits < (1 << self.n_players):
            raise ModelError(f"bits={self.bits!r} out of range for {self.n_players} players")

    @classmethod
    def from_spins(cls, spins: Sequence[int]) -> "SpinState":
        bits = 0
        for i, s in enumerate(spins):
            if s not in (1, -1):
                raise ModelError(f"spin {i + 1} must be +1 or -1, got {s!r}")
            if s == 1:
                bits |= 1 << i
        return cls(len(spins), bits)

    @property
    def spins(self) -> tuple[int, ...]:
        return spins_of(self.bits, self.n_players)

    def spin(self, i: int) -> int:
        """Spin of the player with zero-based index ``i``."""
        return 1 if (self.bits >> i) & 1 else -1

    def __str__(self):
        return "(" + ",".join("+" if s > 0 else "-" for s in self.spins) + ")"


def all_states(n: int) -> list[SpinState]:
    return [SpinState(n, b) for b in range(1 << n)]


# --------------------------------------------------------------------------
# securities


@dataclass(frozen=True)
class Security:
    n_players: int

    def value(self, bits: int) -> int:
        raise NotImplementedError

    @cached_property
    def values(self) -> tuple[int, ...]:
        """Payoff table in bitmask order."""
        return tuple(self.value(b) for b in range(1 << self.n_players))


@dataclass(frozen=True)
class ParitySecurity(Security):
    """``sign * prod_{i in mask} sigma_i``; ``mask`` holds one-based player numbers."""

    sign: int = 1
    mask: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        check_players(self.n_players)
        if self.sign not in (1, -1):
            raise ModelError(f"parity sign must be +1 or -1, got {self.sign!r}")
        mask = frozenset(self.mask)
        bad = [j for j in mask if not isinstance(j, int) or not 1 <= j <= self.n_players]
        if bad:
            raise ModelError(f"parity mask entries out of range 1..{self.n_players}: {sorted(bad, key=str)}")
        object.__setattr__(self, "mask", mask)

    @cached_property
    def bitmask(self) -> int:
        return sum(1 << (j - 1) for j in self.mask)

    def value(self, bits: int) -> int:
        # number of -1 spins inside the mask decides the sign
        minus = popcount(~bits & self.bitmask)
        return -self.sign if minus & 1 else self.sign


@dataclass(frozen=True)
class SymmetricSecurity(Security):
    """Payoff ``levels[k]`` on every state with exactly ``k`` players at +1."""

    levels: tuple = ()

    def __post_init__(self):
        check_players(self.n_players)
        levels = tuple(self.levels)
        if len(levels) != self.n_players + 1:
            raise ModelError(f"need {self.n_players + 1} levels, got {len(levels)}")
        for k, a in enumerate(levels):
            if a not in (1, -1):
                raise ModelError(f"level A_{k} must be +1 or -1, got {a!r}")
        object.__setattr__(self, "levels", levels)

    def value(self, bits: int) -> int:
        return self.levels[popcount(bits)]


@dataclass(frozen=True)
class ThresholdSecurity(Security):
    """+1 exactly when ``sum_i w_i sigma_i >= theta``."""

    weights: tuple = ()
    theta: Fraction = Fraction(0)

    def __post_init__(self):
        check_players(self.n_players)
        weights = tuple(as_fraction(w) for w in self.weights)
        if len(weights) != self.n_players:
            raise ModelError(f"need {self.n_players} weights, got {len(weights)}")
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "theta", as_fraction(self.theta))

    def value(self, bits: int) -> int:
        total = sum((w if (bits >> i) & 1 else -w for i, w in enumerate(self.weights)), Fraction(0))
        return 1 if total >= self.theta else -1


@dataclass(frozen=True)
class TableSecurity(Security):
    table: tuple = ()

    def __post_init__(self):
        check_players(self.n_players)
        table = tuple(self.table)
        if len(table) != 1 << self.n_players:
            raise ModelError(f"payoff table needs {1 << self.n_players} entries, got {len(table)}")
        for b, v in enumerate(table):
            if v not in (1, -1):
                raise ModelError(f"payoff table entry {b} must be +1 or -1, got {v!r}")
        object.__setattr__(self, "table", tuple(int(v) for v in table))

    def value(self, bits: int) -> int:
        return self.table[bits]

    @cached_property
    def values(self) -> tuple[int, ...]:
        return self.table


def make_parity(n: int, sign: int = 1, mask: Iterable[int] = ()) -> ParitySecurity:
    return ParitySecurity(n, sign, frozenset(mask))


def make_symmetric(levels: Sequence[int]) -> SymmetricSecurity:
    return SymmetricSecurity(len(levels) - 1, tuple(levels))


def make_threshold(weights: Sequence, theta=0) -> ThresholdSecurity:
    return ThresholdSecurity(len(weights), tuple(weights), theta)


def make_table(values: Sequence[int]) -> TableSecurity:
    n = len(values).bit_length() - 1
    if n < 1 or len(values) != 1 << n:
        raise ModelError(f"table length {len(values)} is not 2^N for N >= 1")
    return TableSecurity(n, tuple(values))


def constant_security(n: int, value: int = 1) -> ParitySecurity:
    return make_parity(n, value, ())


def majority(n: int) -> ThresholdSecurity:
    return make_threshold([1] * n, 1 if n % 2 else 0)


def _check_dims(a, b):
    if a.n_players != b.n_players:
        raise DimensionError(f"{type(a).__name__} has {a.n_players} players, "
                             f"{type(b).__name__} has {b.n_players}")


def payoff(g: Security, s: SpinState) -> int:
    _check_dims(g, s)
    return g.value(s.bits)


def original_payoff(g: Security, s: SpinState) -> Fraction:
    """The 0/1 payoff ``(1 + g) / 2``."""
    return Fraction(1 + payoff(g, s), 2)


def security_to_table(g: Security) -> TableSecurity:
    check_players(g.n_players)
    return TableSecurity(g.n_players, g.values)


# --------------------------------------------------------------------------
# priors


@dataclass(frozen=True)
class Prior:
    n_players: int

    def mass(self, bits: int) -> Fraction:
        raise NotImplementedError

    @cached_property
    def masses(self) -> tuple[Fraction, ...]:
        return tuple(self.mass(b) for b in range(1 << self.n_players))

    @cached_property
    def integer_weights(self) -> tuple[tuple[int, ...], int]:
        """``(weights, scale)`` with ``mass(b) == weights[b] / scale`` for every state."""
        scale = math.lcm(*(m.denominator for m in self.masses))
        return tuple(m.numerator * (scale // m.denominator) for m in self.masses), scale

    def _validate_masses(self, masses: Sequence[Fraction]):
        bad = [(b, m) for b, m in enumerate(masses) if m <= 0]
        if bad:
            b, m = bad[0]
            raise ModelError(f"prior mass of state {b} is {m}; full support is required "
                             f"({len(bad)} non-positive entries)")
        total = sum(masses, Fraction(0))
        if total != 1:
            raise ModelError(f"prior masses sum to {total}, not 1")


def _check_probability(p: Fraction, what: str) -> Fraction:
    p = as_fraction(p)
    if not 0 < p < 1:
        raise ModelError(f"{what} must lie strictly between 0 and 1, got {p}")
    return p


@dataclass(frozen=True)
class ProductBiasedPrior(Prior):
    """Every player independently at +1 with probability ``p``."""

    p: Fraction = Fraction(1, 2)

    def __post_init__(self):
        check_players(self.n_players)
        object.__setattr__(self, "p", _check_probability(self.p, "p"))

    @property
    def magnetization(self) -> Fraction:
        return 2 * self.p - 1

    def mass(self, bits: int) -> Fraction:
        k = popcount(bits)
        return self.p ** k * (1 - self.p) ** (self.n_players - k)

    @cached_property
    def integer_weights(self):
        a, b = self.p.numerator, self.p.denominator
        n = self.n_players
        per_level = [a ** k * (b - a) ** (n - k) for k in range(n + 1)]
        return tuple(per_level[popcount(s)] for s in range(1 << n)), b ** n


@dataclass(frozen=True)
class ProductPrior(Prior):
    """Independent players with individual probabilities ``p_i`` of +1."""

    ps: tuple = ()

    def __post_init__(self):
        check_players(self.n_players)
        ps = tuple(_check_probability(p, f"p_{i + 1}") for i, p in enumerate(self.ps))
        if len(ps) != self.n_players:
            raise ModelError(f"need {self.n_players} probabilities, got {len(ps)}")
        object.__setattr__(self, "ps", ps)

    def mass(self, bits: int) -> Fraction:
        m = Fraction(1)
        for i, p in enumerate(self.ps):
            m *= p if (bits >> i) & 1 else 1 - p
        return m


@dataclass(frozen=True)
class SymmetricLevelsPrior(Prior):
    """Mass ``levels[k]`` on each state with ``k`` players at +1."""

    levels: tuple = ()

    def __post_init__(self):
        check_players(self.n_players)
        levels = tuple(as_fraction(q) for q in self.levels)
        if len(levels) != self.n_players + 1:
            raise ModelError(f"need {self.n_players + 1} level masses, got {len(levels)}")
        for k, q in enumerate(levels):
            if q <= 0:
                raise ModelError(f"level mass q_{k} is {q}; full support is required")
        total = sum((math.comb(self.n_players, k) * q for k, q in enumerate(levels)), Fraction(0))
        if total != 1:
            raise ModelError(f"sum_k C(N,k) q_k = {total}, not 1")
        object.__setattr__(self, "levels", levels)

    def mass(self, bits: int) -> Fraction:
        return self.levels[popcount(bits)]


@dataclass(frozen=True)
class TablePrior(Prior):
    table: tuple = ()

    def __post_init__(self):
        check_players(self.n_players)
        table = tuple(as_fraction(m) for m in self.table)
        if len(table) != 1 << self.n_players:
            raise ModelError(f"prior table needs {1 << self.n_players} entries, got {len(table)}")
        self._validate_masses(table)
        object.__setattr__(self, "table", table)

    def mass(self, bits: int) -> Fraction:
        return self.table[bits]

    @cached_property
    def masses(self):
        return self.table


def uniform_prior(n: int) -> ProductBiasedPrior:
    return ProductBiasedPrior(n, Fraction(1, 2))


def bias_from_magnetization(n: int, m) -> ProductBiasedPrior:
    """Uniformly biased prior whose per-player mean spin is ``m`` (that is, tanh h)."""
    m = as_fraction(m)
    if not -1 < m < 1:
        raise ModelError(f"magnetization must lie strictly between -1 and 1, got {m}")
    return ProductBiasedPrior(n, (1 + m) / 2)


def prior_from_weights(n: int, weights: Sequence[int]) -> TablePrior:
    """Normalize positive integer weights into a table prior."""
    total = sum(weights)
    return TablePrior(n, tuple(Fraction(w, total) for w in weights))


def symmetric_prior_from_weights(n: int, weights: Sequence[int]) -> SymmetricLevelsPrior:
    total = sum(math.comb(n, k) * w for k, w in enumerate(weights))
    return SymmetricLevelsPrior(n, tuple(Fraction(w, total) for w in weights))


def prior_mass(prior: Prior, s: SpinState) -> Fraction:
    _check_dims(prior, s)
    return prior.mass(s.bits)
