import itertools
import random
from fractions import Fraction

import pytest

from masolve.ansatz import AlgebraWord, dissep_system, parse_word, tasep_system
from masolve.errors import ValidationError


def test_parse_forms():
    assert parse_word("E D E D^2") == ("E", "D", "E", "D", "D")
    assert parse_word("EDEDD") == ("E", "D", "E", "D", "D")
    assert parse_word("G2^3 G1") == ("G2", "G2", "G2", "G1")
    assert parse_word("1") == ()
    with pytest.raises(ValidationError):
        parse_word("E ? D")


def test_word_arithmetic():
    E, D = AlgebraWord.gen("E"), AlgebraWord.gen("D")
    w = (D + E) ** 2
    assert dict(w.items())[("D", "E")] == 1
    assert (w - w).is_zero()
    assert (2 * E + E) == AlgebraWord.monomial(("E",), Fraction(3))


def test_tasep_normal_forms_sorted():
    s = tasep_system()
    red = s.reduce(AlgebraWord.monomial(parse_word("D E")))
    assert red == AlgebraWord.gen("D") + AlgebraWord.gen("E")
    for mono in red.items():
        assert s.is_normal(mono[0])


def test_unknown_letter_rejected():
    with pytest.raises(ValidationError):
        tasep_system().reduce(AlgebraWord.monomial(("E", "X")))


@pytest.mark.parametrize("length", range(1, 7))
def test_tasep_confluence_exhaustive(length):
    s = tasep_system()
    for mono in itertools.product("ED", repeat=length):
        assert len(s.all_normal_forms(mono)) == 1


@pytest.mark.parametrize("length", range(1, 7))
def test_dissep_confluence_exhaustive(length):
    s = dissep_system(Fraction(2, 5))
    for mono in itertools.product(("G1", "G2", "G3"), repeat=length):
        forms = s.all_normal_forms(mono)
        assert len(forms) == 1
        assert dict(next(iter(forms))) == s.normal_form_monomial(mono)


def test_dissep_normal_form_is_ordered_with_phi_power():
    phi = Fraction(1, 3)
    s = dissep_system(phi)
    rng = random.Random(7)
    for _ in range(40):
        mono = tuple(rng.choice(("G1", "G2", "G3")) for _ in range(rng.randint(1, 12)))
        nf = s.normal_form_monomial(mono)
        assert len(nf) == 1
        (word, coef), = nf.items()
        assert list(word) == sorted(mono)
        # each G2 passing a G1 or a G3 passing a G2 costs one factor phi
        inv = sum(1 for i, j in itertools.combinations(range(len(mono)), 2)
                  if (mono[i], mono[j]) in (("G2", "G1"), ("G3", "G2")))
        assert coef == phi ** inv


def test_random_tasep_words_reduce_consistently():
    s = tasep_system()
    rng = random.Random(11)
    for _ in range(30):
        mono = tuple(rng.choice("ED") for _ in range(rng.randint(1, 12)))
        red = s.reduce(AlgebraWord.monomial(mono))
        assert all(s.is_normal(m) for m, _ in red.items())
        assert all(c > 0 for _, c in red.items())


def test_mutated_system_is_independent():
    s = tasep_system()
    m = s.mutated(("D", "E"), ((Fraction(1), ("D",)), (Fraction(2), ("E",))))
    assert s.rules[("D", "E")] != m.rules[("D", "E")]
    assert m.reduce(AlgebraWord.monomial(("D", "E"))) == AlgebraWord.gen("D") + 2 * AlgebraWord.gen("E")
