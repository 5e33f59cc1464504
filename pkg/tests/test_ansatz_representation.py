from fractions import Fraction

import pytest

from masolve.ansatz import (build_truncated_rep, convergence_ratios, dissep_ma_steady,
                            dissep_Z_series, evaluate_converged)
from masolve.ansatz.representation import convergence_warnings
from masolve.errors import TruncationError, ValidationError
from masolve.exact import Matrix
from masolve.models import ModelSpec
from masolve.steady import stationary

from .conftest import random_dissep

N = 8


def _block(m: Matrix, k: int) -> Matrix:
    return Matrix([[m[i, j] for j in range(k)] for i in range(k)])


@pytest.fixture
def rep(dissep_spec):
    return build_truncated_rep(dissep_spec, N)


def test_boundary_vector_leading_entries(rep):
    assert rep.w[0, 0] == 1 and rep.v[0, 0] == 1
    assert rep.v[1, 1] == rep.b / (1 - rep.phi ** 2)
    assert rep.w[1, 1] == rep.a / (1 - rep.phi ** 2)


def test_oscillator_relations_on_block(rep):
    e, d = rep.e_matrix(), rep.d_matrix()
    A0, A = rep.A_matrix(Fraction(0)), rep.A_matrix(rep.phi)
    I = Matrix.identity(N)
    k = N - 1
    assert _block(d @ e, k) == _block(I, k)
    assert _block(e @ d, k) == _block(I - A0, k)
    assert _block(A @ e, k) == _block(e @ A * rep.phi, k)
    assert _block(d @ A, k) == _block(A @ d * rep.phi, k)


def test_generator_exchange_relations_on_block(rep):
    G1, G2, G3 = (rep.generator_matrix(g) for g in ("G1", "G2", "G3"))
    k = (N - 1) * N
    assert _block(G2 @ G1, k) == _block(G1 @ G2 * rep.phi, k)
    assert _block(G3 @ G1, k) == _block(G1 @ G3, k)
    assert _block(G3 @ G2, k) == _block(G2 @ G3 * rep.phi, k)


def test_boundary_residuals_vanish(rep):
    assert not rep.left_residual().any()
    assert not rep.right_residual().any()


def test_boundary_residuals_random(rng):
    for _ in range(10):
        r = build_truncated_rep(random_dissep(rng), 6)
        assert not r.left_residual().any() and not r.right_residual().any()


def test_degenerate_off_diagonal_gives_diagonal_vectors():
    # alpha = gamma makes c = 0
    spec = ModelSpec.dissep(Fraction(1, 3), Fraction(1, 2), Fraction(1, 3), Fraction(1, 7), 2)
    r = build_truncated_rep(spec, 6)
    assert spec.c == 0
    assert all(r.w[i, j] == 0 for i in range(6) for j in range(6) if i != j)
    assert not r.left_residual().any()
    assert convergence_ratios(spec, 3) == (None, None)


def test_word_evaluation_matches_algebra(rep):
    # reordering through the exchange relations leaves the value unchanged
    assert rep.evaluate("G2 G1") == rep.phi * rep.evaluate("G1 G2")
    assert rep.evaluate("G3 G2 G1") == rep.phi ** 2 * rep.evaluate("G1 G2 G3")
    with pytest.raises(ValidationError):
        rep.evaluate("E D")


def test_z_series_partial_sums(dissep_spec):
    assert dissep_Z_series(dissep_spec, 3, 1) == 1
    series = float(dissep_Z_series(dissep_spec, 3, 30))
    value, _ = evaluate_converged(("G2",) * 3, dissep_spec)
    assert abs(series - value) < 1e-12


def test_convergence_warning_and_failure():
    spec = ModelSpec.dissep(Fraction(1, 10), 1, Fraction(3, 2), Fraction(1, 100), 200)
    assert convergence_warnings(spec, 2)
    assert build_truncated_rep(spec, 8, L=2).warnings
    with pytest.raises(TruncationError):
        evaluate_converged(("G2", "G2"), spec, n_max=16)


def test_invalid_truncation():
    with pytest.raises(ValidationError):
        build_truncated_rep(ModelSpec.dissep(1, 1, 1, 1, 1), 1)
    # kappa = 0 (phi = -1) is rejected before a representation is built
    with pytest.raises(ValidationError):
        ModelSpec.dissep(1, 1, 1, 1, 0)


def test_negative_kappa_uses_modulus(dissep_spec):
    flipped = ModelSpec.dissep(dissep_spec.alpha, dissep_spec.beta, dissep_spec.gamma,
                               dissep_spec.delta, -dissep_spec.kappa)
    assert build_truncated_rep(flipped, 6).evaluate("G1 G3") == build_truncated_rep(dissep_spec, 6).evaluate("G1 G3")


@pytest.mark.parametrize("L", [2, 3, 4, 5])
def test_steady_matches_nullspace(L, rng):
    for _ in range(2):
        spec = random_dissep(rng)
        exact = stationary(spec, L)
        ma = dissep_ma_steady(spec, L)
        assert ma.truncation is not None
        assert max(abs(float(x) - y) for x, y in zip(exact.probs, ma.probs)) < 1e-10


@pytest.mark.parametrize("N", [2, 4, 8])
def test_z_series_equals_direct_evaluation(N, dissep_spec):
    rep = build_truncated_rep(dissep_spec, N)
    for L in (1, 2, 3, 4):
        assert dissep_Z_series(dissep_spec, L, N) == rep.evaluate(("G2",) * L)
