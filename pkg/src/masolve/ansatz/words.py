"""Noncommutative words with exact coefficients and quadratic rewrite systems."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable

from ..errors import ValidationError
from ..exact import format_rational

_TOKEN = re.compile(r"\s*(E|D|G[123]|1)(?:\^(\d+))?")


class AlgebraWord:
    """Formal linear combination of generator sequences.

    ``terms`` maps a tuple of generator names to its coefficient; zero
    coefficients are dropped on construction.  Coefficients can be Fractions
    or RationalFunctions.
    """

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        out = {}
        for mono, c in (terms or {}).items():
            mono = tuple(mono)
            nc = out.get(mono, 0) + c
            if nc == 0:
                out.pop(mono, None)
            else:
                out[mono] = nc
        self.terms = out

    @classmethod
    def gen(cls, name: str) -> "AlgebraWord":
        return cls({(name,): Fraction(1)})

    @classmethod
    def scalar(cls, c) -> "AlgebraWord":
        return cls({(): c})

    @classmethod
    def monomial(cls, letters: Iterable[str], coeff=Fraction(1)) -> "AlgebraWord":
        return cls({tuple(letters): coeff})

    @classmethod
    def parse(cls, text: str) -> "AlgebraWord":
        return cls.monomial(parse_word(text))

    def __repr__(self):
        return f"AlgebraWord({self})"

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for mono, c in sorted(self.terms.items(), key=lambda t: (len(t[0]), t[0])):
            coef = format_rational(c) if isinstance(c, Fraction) else str(c)
            parts.append(f"{coef}*{'.'.join(mono) or '1'}")
        return " + ".join(parts)

    def __eq__(self, other):
        if not isinstance(other, AlgebraWord):
            return NotImplemented
        return (self - other).is_zero()

    def is_zero(self) -> bool:
        return not self.terms

    def items(self):
        return self.terms.items()

    def __add__(self, other):
        if not isinstance(other, AlgebraWord):
            other = AlgebraWord.scalar(other)
        t = dict(self.terms)
        for mono, c in other.terms.items():
            t[mono] = t.get(mono, 0) + c
        return AlgebraWord(t)

    __radd__ = __add__

    def __neg__(self):
        return AlgebraWord({m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        if not isinstance(other, AlgebraWord):
            other = AlgebraWord.scalar(other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, AlgebraWord):
            t = {}
            for m1, c1 in self.terms.items():
                for m2, c2 in other.terms.items():
                    key = m1 + m2
                    t[key] = t.get(key, 0) + c1 * c2
            return AlgebraWord(t)
        return AlgebraWord({m: c * other for m, c in self.terms.items()})

    def __rmul__(self, other):
        return AlgebraWord({m: other * c for m, c in self.terms.items()})

    def __pow__(self, k: int):
        out = AlgebraWord.scalar(Fraction(1))
        for _ in range(k):
            out = out * self
        return out


def parse_word(text: str) -> tuple:
    """``"E D E D^2"`` -> ``('E', 'D', 'E', 'D', 'D')``; ``"EDEDD"`` also works."""
    pos, out = 0, []
    text = text.strip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ValidationError(f"cannot parse word {text!r} at position {pos}")
        name, power = m.group(1), int(m.group(2) or 1)
        if name != "1":
            out.extend([name] * power)
        pos = m.end()
        while pos < len(text) and text[pos].isspace():
            pos += 1
    return tuple(out)


@dataclass
class ReductionSystem:
    """Rewrite rules ``(a, b) -> sum of coeff * word`` on adjacent letters.

    Every system used here either shortens the word (TASEP) or keeps the
    length and removes an inversion of a fixed letter order (DiSSEP), so
    leftmost-first rewriting terminates.
    """

    name: str
    alphabet: tuple
    rules: dict
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def is_normal(self, mono: tuple) -> bool:
        return all((a, b) not in self.rules for a, b in zip(mono, mono[1:]))

    def _check_alphabet(self, mono: tuple):
        bad = [g for g in mono if g not in self.alphabet]
        if bad:
            raise ValidationError(f"letters {bad} not in the {self.name} alphabet {self.alphabet}")

    def normal_form_monomial(self, mono: tuple) -> dict:
        """Normal form of a single word as ``{normal word: coefficient}``."""
        cached = self._cache.get(mono)
        if cached is not None:
            return cached
        self._check_alphabet(mono)
        for i in range(len(mono) - 1):
            rhs = self.rules.get((mono[i], mono[i + 1]))
            if rhs is None:
                continue
            out: dict = {}
            for coef, word in rhs:
                for nm, c in self.normal_form_monomial(mono[:i] + tuple(word) + mono[i + 2:]).items():
                    out[nm] = out.get(nm, 0) + coef * c
            out = {k: v for k, v in out.items() if v != 0}
            self._cache[mono] = out
            return out
        out = {mono: Fraction(1)}
        self._cache[mono] = out
        return out

    def reduce(self, w: AlgebraWord) -> AlgebraWord:
        t: dict = {}
        for mono, c in w.items():
            for nm, k in self.normal_form_monomial(mono).items():
                t[nm] = t.get(nm, 0) + c * k
        return AlgebraWord(t)

    def all_normal_forms(self, mono: tuple) -> set:
        """Normal forms reached by every possible choice of redex (exhaustive search).

        Used to check confluence on short words; returns a set of frozen
        normal forms, which has one element when the system is confluent.
        """
        results, seen = set(), set()
        stack = [AlgebraWord.monomial(mono)]
        while stack:
            word = stack.pop()
            key = frozenset(word.items())
            if key in seen:
                continue
            seen.add(key)
            branched = False
            for mono_r, c_r in word.items():
                for i in range(len(mono_r) - 1):
                    rhs = self.rules.get((mono_r[i], mono_r[i + 1]))
                    if rhs is None:
                        continue
                    branched = True
                    rest = AlgebraWord({m: v for m, v in word.items() if m != mono_r})
                    repl = AlgebraWord({})
                    for coef, wd in rhs:
                        repl = repl + AlgebraWord.monomial(mono_r[:i] + tuple(wd) + mono_r[i + 2:], c_r * coef)
                    stack.append(rest + repl)
            if not branched:
                results.add(key)
        return results

    def mutated(self, pair: tuple, rhs) -> "ReductionSystem":
        rules = dict(self.rules)
        rules[pair] = tuple(rhs)
        return ReductionSystem(f"{self.name}[mutated {pair[0]}{pair[1]}]", self.alphabet, rules)


def tasep_system() -> ReductionSystem:
    """DE -> D + E; normal words are E^a D^b."""
    one = Fraction(1)
    return ReductionSystem("tasep", ("E", "D"), {("D", "E"): ((one, ("D",)), (one, ("E",)))})


def dissep_system(phi) -> ReductionSystem:
    """G2G1 -> phi G1G2, G3G1 -> G1G3, G3G2 -> phi G2G3; normal words G1^a G2^b G3^c."""
    phi = Fraction(phi)
    one = Fraction(1)
    return ReductionSystem("dissep", ("G1", "G2", "G3"), {
        ("G2", "G1"): ((phi, ("G1", "G2")),),
        ("G3", "G1"): ((one, ("G1", "G3")),),
        ("G3", "G2"): ((phi, ("G2", "G3")),),
    })
