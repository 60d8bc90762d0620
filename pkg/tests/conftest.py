"""Brute-force oracles shared by the test modules."""
from __future__ import annotations

from itertools import combinations_with_replacement
from fractions import Fraction

import numpy as np
import pytest

from jstab.polyalg import Ideal, WeightVector


def monomials(nvars, K):
    out = []
    for combo in combinations_with_replacement(range(nvars), K):
        e = [0] * nvars
        for i in combo:
            e[i] += 1
        out.append(tuple(e))
    return out


def _poly_rows(ideal: Ideal, K: int):
    """Coefficient rows of all degree-K multiples of the generators."""
    cols = {m: i for i, m in enumerate(monomials(ideal.nvars, K))}
    rows = []
    for g in ideal.generators:
        if g.degree > K:
            continue
        for m in monomials(ideal.nvars, K - g.degree):
            row = [Fraction(0)] * len(cols)
            for mono, c in g.terms.items():
                row[cols[tuple(a + b for a, b in zip(mono, m))]] += c
            rows.append(row)
    return rows, len(cols)


def exact_rank(rows):
    rows = [list(r) for r in rows]
    rank = 0
    ncols = len(rows[0]) if rows else 0
    for c in range(ncols):
        piv = next((i for i in range(rank, len(rows)) if rows[i][c] != 0), None)
        if piv is None:
            continue
        rows[rank], rows[piv] = rows[piv], rows[rank]
        for i in range(len(rows)):
            if i != rank and rows[i][c] != 0:
                f = rows[i][c] / rows[rank][c]
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[rank])]
        rank += 1
    return rank


def dimension_by_linear_algebra(ideal: Ideal, K: int) -> int:
    """dim of degree-K part of the quotient, from the rank of the multiples."""
    rows, ncols = _poly_rows(ideal, K)
    return ncols - (exact_rank(rows) if rows else 0)


def monomial_weight_sum(gens_monos, weights, nvars, K):
    """Sum of weights of degree-K monomials outside a monomial ideal."""
    total = 0
    for m in monomials(nvars, K):
        if any(all(a >= b for a, b in zip(m, g)) for g in gens_monos):
            continue
        total += sum(w * e for w, e in zip(weights, m))
    return total


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
