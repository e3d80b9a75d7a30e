"""Seeded random securities and priors for sweeps and test campaigns.

Random priors are integer weights drawn from ``[1, 1000]`` and normalized, so
they have full support and stay exact.
"""
from __future__ import annotations

import random
from fractions import Fraction

from .model import (
    ParitySecurity,
    ProductBiasedPrior,
    ProductPrior,
    SymmetricSecurity,
    TableSecurity,
    ThresholdSecurity,
    prior_from_weights,
    symmetric_prior_from_weights,
)

WEIGHT_RANGE = (1, 1000)


def random_parity(rng: random.Random, n: int) -> ParitySecurity:
    mask = frozenset(i + 1 for i in range(n) if rng.random() < 0.5)
    return ParitySecurity(n, rng.choice((1, -1)), mask)


def all_parities(n: int) -> list[ParitySecurity]:
    return [ParitySecurity(n, sign, frozenset(i + 1 for i in range(n) if (m >> i) & 1))
            for sign in (1, -1) for m in range(1 << n)]


def random_symmetric(rng: random.Random, n: int) -> SymmetricSecurity:
    return SymmetricSecurity(n, tuple(rng.choice((1, -1)) for _ in range(n + 1)))


def random_threshold(rng: random.Random, n: int, bound: int = 8) -> ThresholdSecurity:
    """Integer weights and threshold in ``[-bound, bound]``; constant payoffs are redrawn."""
    while True:
        g = ThresholdSecurity(n, tuple(rng.randint(-bound, bound) for _ in range(n)),
                              rng.randint(-bound, bound))
        if len(set(g.values)) == 2:
            return g


def random_table_security(rng: random.Random, n: int) -> TableSecurity:
    return TableSecurity(n, tuple(rng.choice((1, -1)) for _ in range(1 << n)))


def random_security(rng: random.Random, n: int):
    kind = rng.choice(("table", "table", "parity", "symmetric", "threshold"))
    if kind == "parity":
        return random_parity(rng, n)
    if kind == "symmetric":
        return random_symmetric(rng, n)
    if kind == "threshold":
        return random_threshold(rng, n)
    return random_table_security(rng, n)


def random_table_prior(rng: random.Random, n: int):
    return prior_from_weights(n, [rng.randint(*WEIGHT_RANGE) for _ in range(1 << n)])


def random_symmetric_prior(rng: random.Random, n: int):
    return symmetric_prior_from_weights(n, [rng.randint(*WEIGHT_RANGE) for _ in range(n + 1)])


def random_biased_prior(rng: random.Random, n: int):
    den = rng.randint(2, 12)
    return ProductBiasedPrior(n, Fraction(rng.randint(1, den - 1), den))


def random_product_prior(rng: random.Random, n: int):
    ps = []
    for _ in range(n):
        den = rng.randint(2, 12)
        ps.append(Fraction(rng.randint(1, den - 1), den))
    return ProductPrior(n, tuple(ps))


def random_prior(rng: random.Random, n: int):
    kind = rng.choice(("table", "table", "biased", "product", "symmetric"))
    if kind == "biased":
        return random_biased_prior(rng, n)
    if kind == "product":
        return random_product_prior(rng, n)
    if kind == "symmetric":
        return random_symmetric_prior(rng, n)
    return random_table_prior(rng, n)
