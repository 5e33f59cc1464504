import random
from fractions import Fraction

import pytest
from hypothesis import settings, strategies as st

from masolve.models import ModelSpec

settings.register_profile("default", max_examples=40, deadline=None)
settings.load_profile("default")


def small_fractions(lo=1, hi=9, den=7):
    return st.builds(Fraction, st.integers(lo, hi), st.integers(1, den))


positive_rates = small_fractions()
signed_fractions = st.builds(Fraction, st.integers(-9, 9), st.integers(1, 7))


def random_dissep(rng: random.Random) -> ModelSpec:
    """Rational DiSSEP spec with kappa > 0 and generic boundary rates."""
    def q():
        return Fraction(rng.randint(1, 9), rng.randint(1, 9))
    return ModelSpec.dissep(q(), q(), q(), q(), Fraction(rng.randint(2, 9), rng.randint(1, 4)))


@pytest.fixture
def rng():
    return random.Random(20240611)


@pytest.fixture
def tasep_spec():
    return ModelSpec.tasep(Fraction(1, 2), Fraction(1, 3))


@pytest.fixture
def dissep_spec():
    return ModelSpec.dissep(Fraction(1, 3), Fraction(1, 2), Fraction(2, 5), Fraction(1, 7), Fraction(3, 2))
