from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from masolve.errors import DimensionError, NonInvertibleError, PoleError, ValidationError
from masolve.exact import (Matrix, Polynomial, RationalFunction, X, common_degree, embed,
                           format_rational, mat_mul, mat_tensor, parse_rational, partial_trace,
                           rf, rf_derivative, rf_eval, solve_linear)
from masolve.integrability import tasep_K, tasep_R

from .conftest import signed_fractions

polys = st.lists(signed_fractions, min_size=0, max_size=4).map(Polynomial)
nonzero_polys = polys.filter(lambda p: not p.is_zero())
rfs = st.builds(RationalFunction, polys, nonzero_polys)


@pytest.mark.parametrize("text,value", [("3", Fraction(3)), ("-1/2", Fraction(-1, 2)),
                                        ("6/4", Fraction(3, 2)), ("0.25", Fraction(1, 4))])
def test_parse_rational(text, value):
    assert parse_rational(text) == value


@pytest.mark.parametrize("text", ["1/0", "abc", "1/x", "", "1e3"])
def test_parse_rational_rejects(text):
    with pytest.raises(ValidationError):
        parse_rational(text)


def test_format_round_trip():
    for q in (Fraction(0), Fraction(-7, 3), Fraction(5)):
        assert parse_rational(format_rational(q)) == q
    assert format_rational(Fraction(4, 2)) == "2"


def test_polynomial_normalizes_trailing_zeros():
    p = Polynomial([1, 2, 0, 0])
    assert p.degree == 1
    assert Polynomial([0, 0]).is_zero()


def test_polynomial_divmod_and_gcd():
    x = Polynomial.x()
    a = (x - 1) * (x + 2)
    b = (x - 1) * (x - 3)
    q, r = a.divmod(x - 1)
    assert r.is_zero() and q == x + 2
    assert a.gcd(b) == x - 1


def test_rational_function_canonical_form():
    x = X
    f = (x * x - 1) / (2 * x - 2)
    assert f == (x + 1) / 2
    assert f.den.lead == 1
    assert f.num.gcd(f.den).degree == 0


def test_zero_denominator_rejected():
    with pytest.raises(PoleError):
        RationalFunction(Polynomial([1]), Polynomial())


def test_derivative_examples():
    x = X
    assert rf_derivative(x * x) == 2 * x
    assert rf_derivative(1 / x) == -1 / (x * x)


def test_derivative_of_tasep_K_entry():
    al = Fraction(2, 7)
    K = tasep_K(al)
    d = rf_derivative(K.matrix[0, 0])
    assert rf_eval(d, 1) == 2 * al
    # finite-difference shadow
    f = K.matrix[0, 0]
    h = 1e-6
    fd = (f.float_eval(1 + h) - f.float_eval(1 - h)) / (2 * h)
    assert abs(fd - float(2 * al)) < 1e-6


def test_rf_eval_and_poles():
    f = (X - 1) / (X + 1)
    assert rf_eval(f, 1) == 0
    with pytest.raises(PoleError):
        rf_eval(f, -1)
    assert rf_eval(tasep_R().matrix[1, 2], Fraction(1, 2)) == Fraction(1, 2)


def test_rf_builder_and_reciprocal():
    f = rf([1, 1], [0, 1])   # (1 + x)/x
    assert f.at_reciprocal() == 1 + X
    assert f.compose(1 / X) == 1 + X
    assert f.degree == 1


@given(rfs, rfs)
def test_product_rule(f, g):
    assert rf_derivative(f * g) == rf_derivative(f) * g + f * rf_derivative(g)


@given(rfs, rfs, rfs)
def test_field_axioms(f, g, h):
    assert (f + g) * h == f * h + g * h
    assert f - f == RationalFunction.const(0)
    if not g.is_zero():
        assert (f / g) * g == f


@given(rfs, st.builds(Fraction, st.integers(-50, 50), st.integers(1, 13)))
def test_derivative_matches_central_difference(f, p):
    try:
        exact = rf_eval(rf_derivative(f), p)
        rf_eval(f, p)
    except PoleError:
        return
    h = 1e-6
    try:
        fd = (f.float_eval(float(p) + h) - f.float_eval(float(p) - h)) / (2 * h)
    except ZeroDivisionError:
        return
    assert abs(fd - float(exact)) <= 1e-6 * max(1.0, abs(float(exact))) * 1e2


def test_matrix_products():
    I2 = Matrix.identity(2)
    assert mat_tensor(I2, I2) == Matrix.identity(4)
    P = Matrix.permutation(2)
    assert mat_mul(P, P) == Matrix.identity(4)
    assert partial_trace(P, (2, 2), 0) == I2


def test_shape_mismatch():
    with pytest.raises(DimensionError):
        mat_mul(Matrix.identity(2), Matrix.identity(3))
    with pytest.raises(DimensionError):
        Matrix([[1, 2], [3]])
    with pytest.raises(DimensionError):
        partial_trace(Matrix.identity(3), (2, 2))


mats2 = st.lists(st.lists(signed_fractions, min_size=2, max_size=2), min_size=2, max_size=2).map(Matrix)


@given(mats2, mats2, mats2, mats2)
def test_mixed_product_property(a, b, c, d):
    assert (a.kron(b)) @ (c.kron(d)) == (a @ c).kron(b @ d)


@given(mats2, mats2, mats2)
def test_kron_associative(a, b, c):
    assert a.kron(b).kron(c) == a.kron(b.kron(c))


def test_partial_trace_brute_force():
    a = Matrix.from_fractions([[i * 8 + j for j in range(8)] for i in range(8)])
    out = partial_trace(a, (2, 2, 2), 1)
    for i in range(4):
        for j in range(4):
            (i0, i2), (j0, j2) = divmod(i, 2), divmod(j, 2)
            want = sum(a[i0 * 4 + t * 2 + i2, j0 * 4 + t * 2 + j2] for t in range(2))
            assert out[i, j] == want


def test_embed_reverses_factors():
    P = Matrix.permutation(2)
    A = Matrix.from_fractions([[1, 2], [3, 4]])
    B = Matrix.from_fractions([[0, 1], [5, 7]])
    ab = A.kron(B)
    assert embed(ab, (0, 1), 2, 2) == ab
    assert embed(ab, (1, 0), 2, 2) == P @ ab @ P
    assert embed(A, (1,), 3, 2) == Matrix.identity(2).kron(A).kron(Matrix.identity(2))


def test_common_degree():
    m = Matrix([[X, 1 / (X + 1)], [RationalFunction.const(2), X * X]])
    assert common_degree(m) == 3


def test_solve_linear():
    a = Matrix.from_fractions([[2, 1], [1, 3]])
    x, k = solve_linear(a, [Fraction(3), Fraction(5)])
    assert k == 0 and x == [Fraction(4, 5), Fraction(7, 5)]
    sing = Matrix.from_fractions([[1, 1], [2, 2]])
    x, k = solve_linear(sing, [Fraction(1), Fraction(2)])
    assert k == 1
    with pytest.raises(NonInvertibleError):
        solve_linear(sing, [Fraction(1), Fraction(3)])
