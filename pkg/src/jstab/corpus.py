"""Small embedded varieties used by tests, the CLI and the sweeps."""
from __future__ import annotations

from itertools import combinations
from typing import Dict, List

from .polyalg import Ideal, Polynomial


def rational_normal_curve(r: int) -> Ideal:
    """P^1 embedded by O(r) in P^r (2x2 minors); r=1 gives the zero ideal."""
    n = r + 1
    gens = []
    for i, j in combinations(range(r), 2):
        # Z_i Z_{j+1} - Z_{i+1} Z_j
        a = [0] * n
        a[i] += 1
        a[j + 1] += 1
        b = [0] * n
        b[i + 1] += 1
        b[j] += 1
        gens.append(Polynomial({tuple(a): 1, tuple(b): -1}, n))
    return Ideal(tuple(gens), n)


def conic() -> Ideal:
    return Ideal.parse(["Z0*Z2 - Z1^2"], 3)


def twisted_cubic() -> Ideal:
    return Ideal.parse(["Z0*Z3 - Z1*Z2", "Z1*Z3 - Z2^2", "Z0*Z2 - Z1^2"], 4)


def segre_quadric() -> Ideal:
    """P^1 x P^1 in P^3 with coordinates Z0=x0y0, Z1=x0y1, Z2=x1y0, Z3=x1y1."""
    return Ideal.parse(["Z0*Z3 - Z1*Z2"], 4)


def plane_cubic() -> Ideal:
    return Ideal.parse(["Z0^3 + Z1^3 + Z2^3 - 3*Z0*Z1*Z2 + Z0*Z1^2"], 3)


def nodal_conic() -> Ideal:
    return Ideal.parse(["Z1^2 - Z0*Z2 - Z0*Z1"], 3)


def projective_space(n: int) -> Ideal:
    return Ideal.zero(n + 1)


def corpus() -> Dict[str, Ideal]:
    return {
        "P1": projective_space(1),
        "P2": projective_space(2),
        "conic": conic(),
        "twisted_cubic": twisted_cubic(),
        "rnc4": rational_normal_curve(4),
        "segre": segre_quadric(),
        "plane_cubic": plane_cubic(),
    }


def named(name: str) -> Ideal:
    table = corpus()
    if name not in table:
        raise KeyError(f"unknown corpus ideal {name!r}; choose from {sorted(table)}")
    return table[name]


def names() -> List[str]:
    return sorted(corpus())
