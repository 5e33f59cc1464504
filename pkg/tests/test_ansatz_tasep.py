from fractions import Fraction
from math import factorial

import pytest

from masolve.ansatz import (AlgebraWord, partition_polynomial, tasep_evaluate, tasep_ma_steady,
                            weight_polynomial)
from masolve.models import ModelSpec
from masolve.steady import stationary


def _z_closed(L, al, be):
    a, b = 1 / al, 1 / be
    total = Fraction(0)
    for p in range(1, L + 1):
        c = Fraction(p * factorial(2 * L - 1 - p), factorial(L) * factorial(L - p))
        total += c * (b ** (p + 1) - a ** (p + 1)) / (b - a)
    return total


def test_small_words():
    assert tasep_evaluate("E D E D D", 1, 1) == 2
    assert weight_polynomial("D E") == {(0, 1): 1, (1, 0): 1}
    assert tasep_evaluate("", Fraction(1, 2), 3) == 1


@pytest.mark.parametrize("L", [1, 2, 3, 4, 5, 6])
def test_partition_function_matches_closed_form(L):
    al, be = Fraction(2, 7), Fraction(5, 3)
    z = tasep_evaluate((AlgebraWord.gen("D") + AlgebraWord.gen("E")) ** L, al, be)
    assert z == _z_closed(L, al, be)


def test_partition_polynomial_L5():
    poly = partition_polynomial(5)
    assert poly[(0, 5)] == 1 and poly[(5, 0)] == 1
    assert poly[(1, 4)] == 1 and poly[(1, 5)] == 4
    # at alpha = beta = 1 all 2^5 weights sum to Catalan(6)
    assert sum(poly.values()) == 132


@pytest.mark.parametrize("L", [1, 2, 3, 4, 5])
def test_matches_nullspace(L):
    al, be = Fraction(3, 4), Fraction(1, 5)
    assert tasep_ma_steady(al, be, L).probs == stationary(ModelSpec.tasep(al, be), L).probs
