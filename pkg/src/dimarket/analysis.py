"""Classification of securities and convergence predictions.

Three classes of securities are known to reach the true payoff:

* weighted threshold functions, for every full-support prior;
* parity securities ``sign * prod_{i in R} sigma_i`` under a uniformly biased
  product prior with ``p != 1/2``, by round 2;
* totally symmetric securities under a totally symmetric prior whose
  payoff/spin covariance is nonzero, by round 2.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .engine import Block, beta_gamma
from .model import (
    ModelError,
    ParitySecurity,
    Prior,
    ProductBiasedPrior,
    ProductPrior,
    ResourceError,
    Security,
    SymmetricLevelsPrior,
    SymmetricSecurity,
    ThresholdSecurity,
    _check_dims,
    popcount,
)
from .simplex import solve_margin_system

LP_MAX_PLAYERS = 12


class ClassificationError(ModelError):
    """Inputs lack the symmetry an operation relies on."""


def walsh_hadamard(values) -> list[Fraction]:
    """Fourier coefficients ``E[g(sigma) prod_{i in S} sigma_i]`` indexed by mask ``S``.

    Uses the in-place butterfly on integer payoffs, then fixes the sign so that a
    set bit means sigma = +1.
    """
    a = list(values)
    size = len(a)
    h = 1
    while h < size:
        for start in range(0, size, 2 * h):
            for j in range(start, start + h):
                x, y = a[j], a[j + h]
                a[j], a[j + h] = x + y, x - y
        h *= 2
    # butterfly gives sum_b g(b) (-1)^{|b & S|}; with sigma_i = 2 b_i - 1 each
    # factor sigma_i equals -(-1)^{b_i}
    return [Fraction(-v if popcount(S) & 1 else v, size) for S, v in enumerate(a)]


def parity_decompose(g: Security) -> Optional[tuple[int, frozenset]]:
    """``(sign, mask)`` when ``g`` is a signed parity, else None; mask is one-based."""
    if isinstance(g, ParitySecurity):
        return g.sign, g.mask
    spectrum = walsh_hadamard(g.values)
    nonzero = [(S, c) for S, c in enumerate(spectrum) if c != 0]
    if len(nonzero) != 1 or abs(nonzero[0][1]) != 1:
        return None
    S, c = nonzero[0]
    return int(c), frozenset(i + 1 for i in range(g.n_players) if (S >> i) & 1)


def is_totally_symmetric(g: Security) -> Optional[tuple[int, ...]]:
    """Level vector ``A_0..A_N`` if the payoff depends only on the number of +1 spins."""
    levels = [None] * (g.n_players + 1)
    for b, v in enumerate(g.values):
        k = popcount(b)
        if levels[k] is None:
            levels[k] = v
        elif levels[k] != v:
            return None
    return tuple(levels)


def is_symmetric_prior(P: Prior) -> bool:
    if isinstance(P, (ProductBiasedPrior, SymmetricLevelsPrior)):
        return True
    levels = {}
    for b, m in enumerate(P.masses):
        if levels.setdefault(popcount(b), m) != m:
            return False
    return True


def recognize_threshold(g: Security) -> Optional[tuple[tuple[int, ...], int]]:
    """Integer ``(weights, theta)`` realizing ``g`` as ``sum w_i sigma_i >= theta``, or None.

    Solves the margin-one system ``g(s) (w . s - theta) >= 1`` exactly, then
    clears denominators and common factors; the margin stays at least one because
    the left side is a nonzero integer.
    """
    n = g.n_players
    if n > LP_MAX_PLAYERS:
        raise ResourceError(f"threshold recognition is limited to {LP_MAX_PLAYERS} players, got {n}")
    rows = []
    for b, v in enumerate(g.values):
        spins = [1 if (b >> i) & 1 else -1 for i in range(n)]
        rows.append([v * s for s in spins] + [-v])
    x = solve_margin_system(rows)
    if x is None:
        return None
    lcm = math.lcm(*(c.denominator for c in x))
    ints = [int(c * lcm) for c in x]
    gcd = math.gcd(*ints) or 1
    ints = [c // gcd for c in ints]
    return tuple(ints[:n]), ints[n]


def _moments(g: Security, P: Prior, i: int):
    weights, scale = P.integer_weights
    eg = egs = es = 0
    for b, (v, w) in enumerate(zip(g.values, weights)):
        s = 1 if (b >> i) & 1 else -1
        eg += v * w
        egs += v * s * w
        es += s * w
    return Fraction(eg, scale), Fraction(egs, scale), Fraction(es, scale)


def covariance_gaps(g: Security, P: Prior) -> list[Fraction]:
    """``E[g sigma_i] - E[g] E[sigma_i]`` for every player ``i``."""
    _check_dims(g, P)
    out = []
    for i in range(g.n_players):
        eg, egs, es = _moments(g, P, i)
        out.append(egs - eg * es)
    return out


def gamma0(g: Security, P: Prior) -> Fraction:
    """Covariance between payoff and a single spin under the prior.

    Nonzero exactly when the first-round bid slope is nonzero.  Raises
    :class:`ClassificationError` if the value depends on which player is used.
    """
    gaps = covariance_gaps(g, P)
    if any(c != gaps[0] for c in gaps):
        raise ClassificationError(f"covariance differs across players: {[str(c) for c in gaps]}")
    return gaps[0]


def gamma0_slope(g: Security, P: Prior) -> Fraction:
    """The first-round bid slope ``gamma`` itself (the covariance over ``1 - E[sigma]^2``)."""
    full = Block.full(g.n_players)
    slopes = [beta_gamma(g, P, full, i)[1] for i in range(g.n_players)]
    if any(c != slopes[0] for c in slopes):
        raise ClassificationError(f"first-round slope differs across players: {[str(c) for c in slopes]}")
    return slopes[0]


@dataclass(frozen=True)
class Prediction:
    holds: bool
    reason: str

    def __bool__(self):
        return self.holds


def _uniform_bias(P: Prior) -> Optional[Fraction]:
    if isinstance(P, ProductBiasedPrior):
        return P.p
    if isinstance(P, ProductPrior) and all(p == P.ps[0] for p in P.ps):
        return P.ps[0]
    return None


def predict_round_two(g: Security, P: Prior) -> Prediction:
    """Whether a known result guarantees the true price by round 2.

    A false prediction means no result applies; it does not predict failure.
    """
    _check_dims(g, P)
    p = _uniform_bias(P)
    if p is not None and p != Fraction(1, 2) and parity_decompose(g) is not None:
        return Prediction(True, "parity-biased")
    if is_totally_symmetric(g) is not None and is_symmetric_prior(P):
        if gamma0(g, P) != 0:
            return Prediction(True, "symmetric-gamma0")
        return Prediction(False, "symmetric-gamma0-zero")
    return Prediction(False, "none")


@dataclass(frozen=True)
class ClassificationReport:
    n_players: int
    parity: Optional[tuple] = None
    symmetric: Optional[tuple] = None
    threshold: Optional[tuple] = None
    gamma0: Optional[Fraction] = None
    gamma0_slope: Optional[Fraction] = None
    prediction: Optional[Prediction] = None
    tags: tuple = field(default=())


def classify(g: Security, P: Optional[Prior] = None, threshold: bool = True) -> ClassificationReport:
    """Structural tags plus, given a prior, the covariance and round-2 prediction.

    ``threshold=False`` skips the LP; otherwise more than ``LP_MAX_PLAYERS``
    players raises :class:`ResourceError` rather than reporting "not threshold".
    """
    parity = parity_decompose(g)
    symmetric = is_totally_symmetric(g)
    witness = recognize_threshold(g) if threshold else None
    tags = tuple(t for t, hit in (("parity", parity), ("symmetric", symmetric), ("threshold", witness))
                 if hit is not None)
    g0 = slope = prediction = None
    if P is not None:
        _check_dims(g, P)
        try:
            g0 = gamma0(g, P)
            slope = gamma0_slope(g, P)
        except ClassificationError:
            g0 = slope = None
        prediction = predict_round_two(g, P)
    return ClassificationReport(g.n_players, parity, symmetric, witness, g0, slope, prediction, tags)


def report_to_json(report: ClassificationReport) -> dict:
    from .schema import format_rational

    doc = {"n_players": report.n_players, "tags": list(report.tags),
           "parity": None, "symmetric": None, "threshold": None,
           "gamma0": None, "gamma0_slope": None, "prediction": None}
    if report.parity is not None:
        doc["parity"] = {"sign": report.parity[0], "mask": sorted(report.parity[1])}
    if report.symmetric is not None:
        doc["symmetric"] = {"levels": list(report.symmetric)}
    if report.threshold is not None:
        w, theta = report.threshold
        doc["threshold"] = {"w": [format_rational(x) for x in w], "theta": format_rational(theta)}
    if report.gamma0 is not None:
        doc["gamma0"] = format_rational(report.gamma0)
    if report.gamma0_slope is not None:
        doc["gamma0_slope"] = format_rational(report.gamma0_slope)
    if report.prediction is not None:
        doc["prediction"] = {"round_two": report.prediction.holds, "reason": report.prediction.reason}
    return doc


def threshold_security(witness, n: int) -> ThresholdSecurity:
    w, theta = witness
    return ThresholdSecurity(n, tuple(w), theta)


def symmetric_security(levels) -> SymmetricSecurity:
    return SymmetricSecurity(len(levels) - 1, tuple(levels))
