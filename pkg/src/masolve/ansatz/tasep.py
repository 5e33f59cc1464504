"""TASEP quadratic algebra: rewriting to E^a D^b and boundary evaluation."""

from __future__ import annotations

from fractions import Fraction

from ..models import check_capacity, configurations
from ..steady import StationaryDistribution, normalize
from .words import AlgebraWord, ReductionSystem, parse_word, tasep_system

_SYSTEM = tasep_system()


def as_word(w) -> AlgebraWord:
    if isinstance(w, AlgebraWord):
        return w
    if isinstance(w, str):
        return AlgebraWord.parse(w)
    return AlgebraWord.monomial(w)


def tasep_reduce(w, system: ReductionSystem | None = None) -> AlgebraWord:
    """Normal form as a combination of E^a D^b."""
    return (system or _SYSTEM).reduce(as_word(w))


def _split(mono: tuple) -> tuple:
    a = 0
    while a < len(mono) and mono[a] == "E":
        a += 1
    return a, len(mono) - a


def weight_polynomial(w, system: ReductionSystem | None = None) -> dict:
    """``{(a, b): coeff}`` such that the word evaluates to sum coeff / (alpha^a beta^b)."""
    out = {}
    for mono, c in tasep_reduce(w, system).items():
        key = _split(mono)
        out[key] = out.get(key, 0) + c
    return {k: v for k, v in out.items() if v != 0}


def tasep_evaluate(w, alpha, beta, system: ReductionSystem | None = None,
                   left_eigenvalue=None, right_eigenvalue=None):
    """Value of the word in units of the scalar product of the boundary vectors.

    ``<W|E = left_eigenvalue <W|`` and ``D|V> = right_eigenvalue |V>``,
    defaulting to 1/alpha and 1/beta.
    """
    le = Fraction(1) / Fraction(alpha) if left_eigenvalue is None else left_eigenvalue
    re_ = Fraction(1) / Fraction(beta) if right_eigenvalue is None else right_eigenvalue
    total = Fraction(0)
    for (a, b), c in weight_polynomial(w, system).items():
        total += c * le ** a * re_ ** b
    return total


def config_word(config) -> tuple:
    """Occupied site -> D, empty site -> E."""
    return tuple("D" if t else "E" for t in config)


def tasep_ma_steady(alpha, beta, L: int, cap: int | None = None) -> StationaryDistribution:
    """Stationary distribution from the DE algebra, exact."""
    check_capacity(2, L, cap)
    alpha, beta = Fraction(alpha), Fraction(beta)
    weights = [tasep_evaluate(config_word(c), alpha, beta) for c in configurations(L, 2)]
    return normalize(weights, L, 2)


def partition_polynomial(L: int) -> dict:
    """Z_L * alpha^L * beta^L as ``{(i, j): coeff}`` meaning coeff * alpha^i * beta^j."""
    poly = weight_polynomial(AlgebraWord(
        {(): Fraction(0)}) + (AlgebraWord.gen("D") + AlgebraWord.gen("E")) ** L)
    out = {}
    for (a, b), c in poly.items():
        key = (L - a, L - b)
        out[key] = out.get(key, 0) + c
    return out


__all__ = ["as_word", "tasep_reduce", "weight_polynomial", "tasep_evaluate", "config_word",
           "tasep_ma_steady", "partition_polynomial", "parse_word"]
