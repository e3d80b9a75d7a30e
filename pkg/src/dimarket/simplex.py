"""Exact rational feasibility for systems ``a_s . x >= 1``.

Rather than pivoting on the 2^N-row primal, the solver runs phase one of the
simplex method on the alternative system

    sum_s lam_s a_s = 0,   sum_s lam_s = 1,   lam >= 0,

which has only ``dim + 1`` rows.  By Gordan/Farkas exactly one of the two
systems is solvable.  If phase one ends with a positive artificial sum, the
optimal dual multipliers ``y`` satisfy ``a_s . y[:-1] + y[-1] <= 0`` with
``y[-1] > 0``, so ``x = -y[:-1] / y[-1]`` solves the primal.  Bland's rule keeps
the heavily degenerate pivots from cycling.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Optional, Sequence


def solve_margin_system(rows: Sequence[Sequence[int]]) -> Optional[list[Fraction]]:
    """Return ``x`` with ``row . x >= 1`` for every row, or None if none exists."""
    rows = [list(r) for r in rows]
    if not rows:
        raise ValueError("need at least one constraint")
    dim = len(rows[0])
    m = dim + 1  # equality rows
    ncols = len(rows)
    width = ncols + m  # lambda columns, then one artificial per row
    # tableau[r] = coefficients over all columns, rhs kept separately
    tab = []
    for j in range(dim):
        tab.append([Fraction(row[j]) for row in rows] + [Fraction(int(k == j)) for k in range(m)])
    tab.append([Fraction(1)] * ncols + [Fraction(int(k == dim)) for k in range(m)])
    rhs = [Fraction(0)] * dim + [Fraction(1)]
    basis = [ncols + k for k in range(m)]
    # reduced costs for phase one: cost 1 on artificials
    red = [-sum(tab[r][c] for r in range(m)) for c in range(ncols)] + [Fraction(0)] * m

    while True:
        enter = next((c for c in range(width) if red[c] < 0), None)
        if enter is None:
            break
        best = None
        for r in range(m):
            a = tab[r][enter]
            if a > 0:
                ratio = rhs[r] / a
                if best is None or ratio < best[0] or (ratio == best[0] and basis[r] < basis[best[1]]):
                    best = (ratio, r)
        if best is None:  # cannot happen: the phase-one objective is bounded below by 0
            raise ArithmeticError("unbounded phase-one problem")
        p = best[1]
        _pivot(tab, rhs, red, p, enter)
        basis[p] = enter

    infeasibility = sum(rhs[r] for r in range(m) if basis[r] >= ncols)
    if infeasibility == 0:
        return None
    # duals y_k = sum over basic rows of cost(basis) * B^{-1}[row][k]
    y = [sum((tab[r][ncols + k] for r in range(m) if basis[r] >= ncols), Fraction(0)) for k in range(m)]
    scale = y[dim]
    return [-v / scale for v in y[:dim]]


def _pivot(tab, rhs, red, p, q):
    prow = tab[p]
    piv = prow[q]
    if piv != 1:
        inv = 1 / piv
        prow[:] = [v * inv if v else v for v in prow]
        rhs[p] *= inv
    nz = [c for c, v in enumerate(prow) if v]
    for r, row in enumerate(tab):
        if r == p:
            continue
        f = row[q]
        if f:
            for c in nz:
                row[c] -= f * prow[c]
            rhs[r] -= f * rhs[p]
    f = red[q]
    if f:
        for c in nz:
            red[c] -= f * prow[c]
