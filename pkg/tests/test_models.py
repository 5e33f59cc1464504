import itertools
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from masolve.errors import CapacityError, ValidationError
from masolve.exact import Matrix
from masolve.models import (ModelSpec, apply_generator, assemble_markov, build_local_operators,
                            config_index, configurations, index_config)

from .conftest import positive_rates


def test_tasep_local_operators():
    al, be = Fraction(2, 3), Fraction(1, 5)
    ops = build_local_operators(ModelSpec.tasep(al, be))
    assert ops.B == Matrix.from_fractions([[-al, 0], [al, 0]])
    assert ops.Bbar == Matrix.from_fractions([[0, be], [0, -be]])
    assert ops.m[1, 2] == 1 and ops.m[2, 2] == -1


def test_dissep_bulk_diagonal():
    k = Fraction(3, 2)
    ops = build_local_operators(ModelSpec.dissep(1, 1, 1, 1, k))
    assert [ops.m[i, i] for i in range(4)] == [-1, -k * k, -k * k, -1]


def test_two_tasep_L2_table():
    al = Fraction(1, 3)
    B = build_local_operators(ModelSpec.two_tasep("L2", "R3", alpha=al)).B
    assert [B[i, 0] for i in range(3)] == [-1, 1 - al, al]
    assert [B[i, 1] for i in range(3)] == [0, -al, al]
    assert [B[i, 2] for i in range(3)] == [0, 0, 0]


@pytest.mark.parametrize("left,right", list(itertools.product(["L1", "L2", "L3", "L4"],
                                                              ["R1", "R2", "R3", "R4"])))
def test_two_tasep_tables_are_generators(left, right):
    ops = build_local_operators(ModelSpec.two_tasep(left, right, alpha=Fraction(1, 3),
                                                    beta=Fraction(2, 3), mu=2, nu=3))
    ops.check_generator()


def test_validation():
    with pytest.raises(ValidationError):
        ModelSpec.tasep(-1, 1)
    with pytest.raises(ValidationError):
        ModelSpec.dissep(1, 1, 1, 1, 0)
    with pytest.raises(ValidationError, match="unknown model"):
        ModelSpec("asep")
    with pytest.raises(ValidationError):
        ModelSpec.two_tasep("L2", "R3", alpha=2)  # 1 - alpha < 0
    with pytest.raises(ValidationError):
        ModelSpec.two_tasep("L9", "R3")


def test_two_tasep_ignores_unused_rates():
    # L4 and R4 do not read mu or nu
    ModelSpec.two_tasep("L4", "R4", alpha=1, beta=1, mu=-1, nu=-1)


def test_derived_parameters():
    s = ModelSpec.dissep(Fraction(1, 3), Fraction(1, 2), Fraction(2, 5), Fraction(1, 7), Fraction(3, 2))
    k = s.kappa
    assert s.phi == (k - 1) / (k + 1)
    assert s.a == (2 * k - s.alpha - s.gamma) / (2 * k + s.alpha + s.gamma)
    assert s.d == (s.beta - s.delta) / (2 * k + s.delta + s.beta)


@pytest.mark.parametrize("spec", [
    ModelSpec.tasep(Fraction(1, 2), 3),
    ModelSpec.dissep(1, 2, Fraction(1, 3), 0, Fraction(5, 2)),
    ModelSpec.two_tasep("L1", "R2", alpha=Fraction(1, 4), beta=Fraction(1, 2), mu=2),
])
def test_json_round_trip(spec):
    assert ModelSpec.from_json(spec.to_json()) == spec
    doc = spec.to_dict()
    assert all(isinstance(v, str) for v in doc["rates"].values())


def test_from_dict_rejects_unknown_rate():
    with pytest.raises(ValidationError):
        ModelSpec.from_dict({"model": "tasep", "rates": {"alpah": "1"}})
    with pytest.raises(ValidationError):
        ModelSpec.from_json("{not json")


def test_config_ordering():
    assert list(configurations(2, 2)) == [(0, 0), (0, 1), (1, 0), (1, 1)]
    for idx in range(27):
        assert config_index(index_config(idx, 3, 3), 3) == idx


def test_tasep_L1_generator():
    al, be = Fraction(2, 3), Fraction(1, 4)
    M = assemble_markov(ModelSpec.tasep(al, be), 1)
    assert M.to_matrix() == Matrix.from_fractions([[-al, be], [al, -be]])
    assert apply_generator(M, [1, 0]) == [-al, al]


def test_capacity(monkeypatch):
    with pytest.raises(CapacityError):
        assemble_markov(ModelSpec.tasep(1, 1), 5, cap=16)
    monkeypatch.setenv("MASOLVE_CAP", "8")
    with pytest.raises(CapacityError):
        assemble_markov(ModelSpec.tasep(1, 1), 4)


def _brute_force(spec, L):
    """Generator from the transition rules, site by site."""
    ops = build_local_operators(spec)
    s = ops.species
    n = s ** L
    M = [[Fraction(0)] * n for _ in range(n)]
    for c in configurations(L, s):
        j = config_index(c, s)
        moves = []
        for new in range(s):
            if new != c[0] and ops.B[new, c[0]]:
                moves.append(((new,) + c[1:], ops.B[new, c[0]]))
            if new != c[-1] and ops.Bbar[new, c[-1]]:
                moves.append((c[:-1] + (new,), ops.Bbar[new, c[-1]]))
        for i in range(L - 1):
            old = c[i] * s + c[i + 1]
            for new in range(s * s):
                if new != old and ops.m[new, old]:
                    a, b = divmod(new, s)
                    moves.append((c[:i] + (a, b) + c[i + 2:], ops.m[new, old]))
        for target, rate in moves:
            M[config_index(target, s)][j] += rate
            M[j][j] -= rate
    return Matrix(M)


@pytest.mark.parametrize("spec", [
    ModelSpec.tasep(Fraction(1, 2), Fraction(1, 3)),
    ModelSpec.dissep(Fraction(1, 3), Fraction(1, 2), Fraction(2, 5), Fraction(1, 7), Fraction(3, 2)),
    ModelSpec.two_tasep(),
])
@pytest.mark.parametrize("L", [1, 2, 3, 4])
def test_assembly_matches_transition_rules(spec, L):
    assert assemble_markov(spec, L).to_matrix() == _brute_force(spec, L)


@given(positive_rates, positive_rates, positive_rates, positive_rates, positive_rates,
       st.integers(1, 4))
def test_assembled_generator_property(al, be, ga, de, ka, L):
    for spec in (ModelSpec.tasep(al, be), ModelSpec.dissep(al, be, ga, de, ka)):
        M = assemble_markov(spec, L)
        assert M.is_generator()
        assert sum(apply_generator(M, [1] * M.dim)) == 0
