"""Exact scalars, univariate polynomials and rational functions, dense matrices.

Scalars are :class:`fractions.Fraction`, which already keeps a reduced form
with a positive denominator.  Polynomials and rational functions in one
variable ``x`` are built on top of it.  :class:`Matrix` is a small dense
matrix whose entries may be any exact ring element (``Fraction`` or
:class:`RationalFunction`).
"""

from __future__ import annotations

import re
from fractions import Fraction
from itertools import product
from typing import Callable, Iterable, Sequence

from .errors import DimensionError, PoleError, ValidationError

_RATIONAL_RE = re.compile(r"^\s*[+-]?\d+\s*(/\s*\d+\s*)?$")


def parse_rational(text) -> Fraction:
    """Parse an exact literal such as ``"3"``, ``"-1/2"`` or ``"0.25"``."""
    if isinstance(text, (int, Fraction)):
        return Fraction(text)
    if not isinstance(text, str):
        raise ValidationError(f"not a rational literal: {text!r}")
    s = text.strip()
    if _RATIONAL_RE.match(s) or re.match(r"^\s*[+-]?\d*\.\d+\s*$", s):
        try:
            return Fraction(s.replace(" ", ""))
        except (ValueError, ZeroDivisionError) as exc:
            raise ValidationError(f"bad rational literal {text!r}: {exc}") from None
    raise ValidationError(f"bad rational literal {text!r}")


def format_rational(q: Fraction) -> str:
    q = Fraction(q)
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


# ---------------------------------------------------------------------------
# Polynomials
# ---------------------------------------------------------------------------


class Polynomial:
    """Univariate polynomial with Fraction coefficients, ascending degree."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable = ()):
        c = [Fraction(a) for a in coeffs]
        while c and c[-1] == 0:
            c.pop()
        self.coeffs = tuple(c)

    @classmethod
    def x(cls) -> "Polynomial":
        return cls((0, 1))

    @classmethod
    def const(cls, a) -> "Polynomial":
        return cls((a,))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    @property
    def lead(self) -> Fraction:
        return self.coeffs[-1] if self.coeffs else Fraction(0)

    def __repr__(self):
        if not self.coeffs:
            return "Polynomial(0)"
        terms = []
        for k, a in enumerate(self.coeffs):
            if a:
                terms.append(f"{format_rational(a)}*x^{k}" if k else format_rational(a))
        return "Polynomial(" + " + ".join(terms) + ")"

    def __eq__(self, other):
        if isinstance(other, Polynomial):
            return self.coeffs == other.coeffs
        if isinstance(other, (int, Fraction)):
            return self.coeffs == Polynomial.const(other).coeffs
        return NotImplemented

    def __hash__(self):
        return hash(self.coeffs)

    @staticmethod
    def _coerce(other):
        if isinstance(other, Polynomial):
            return other
        if isinstance(other, (int, Fraction)):
            return Polynomial.const(other)
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        n = max(len(self.coeffs), len(o.coeffs))
        a = self.coeffs + (Fraction(0),) * (n - len(self.coeffs))
        b = o.coeffs + (Fraction(0),) * (n - len(o.coeffs))
        return Polynomial(p + q for p, q in zip(a, b))

    __radd__ = __add__

    def __neg__(self):
        return Polynomial(-a for a in self.coeffs)

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        if not self.coeffs or not o.coeffs:
            return Polynomial()
        out = [Fraction(0)] * (len(self.coeffs) + len(o.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a:
                for j, b in enumerate(o.coeffs):
                    out[i + j] += a * b
        return Polynomial(out)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative power of a polynomial")
        out, base = Polynomial.const(1), self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def divmod(self, other: "Polynomial"):
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        rem = list(self.coeffs)
        dq = other.degree
        if len(rem) - 1 < dq:
            return Polynomial(), self
        quot = [Fraction(0)] * (len(rem) - dq)
        inv_lead = 1 / other.lead
        for k in range(len(rem) - 1 - dq, -1, -1):
            q = rem[k + dq] * inv_lead
            quot[k] = q
            if q:
                for j, b in enumerate(other.coeffs):
                    rem[k + j] -= q * b
        return Polynomial(quot), Polynomial(rem[:dq])

    def monic(self) -> "Polynomial":
        if not self.coeffs:
            return self
        inv = 1 / self.lead
        return Polynomial(a * inv for a in self.coeffs)

    def gcd(self, other: "Polynomial") -> "Polynomial":
        a, b = self, other
        while not b.is_zero():
            a, b = b, a.divmod(b)[1]
        return a.monic()

    def __call__(self, x0):
        acc = 0
        for a in reversed(self.coeffs):
            acc = acc * x0 + a
        return acc if self.coeffs else Fraction(0) * x0

    def derivative(self) -> "Polynomial":
        return Polynomial(k * a for k, a in enumerate(self.coeffs) if k)

    def reversed_to(self, n: int) -> "Polynomial":
        """Coefficients of ``x**n * p(1/x)`` (requires ``n >= degree``)."""
        c = self.coeffs + (Fraction(0),) * (n + 1 - len(self.coeffs))
        return Polynomial(reversed(c))


# ---------------------------------------------------------------------------
# Rational functions
# ---------------------------------------------------------------------------


class RationalFunction:
    """Quotient of polynomials kept with a monic denominator and no common factor."""

    __slots__ = ("num", "den")

    def __init__(self, num, den=None):
        num = Polynomial._coerce(num) if not isinstance(num, Polynomial) else num
        if num is None:
            raise TypeError("numerator must be a polynomial or rational")
        den = Polynomial.const(1) if den is None else (
            den if isinstance(den, Polynomial) else Polynomial._coerce(den))
        if den is None:
            raise TypeError("denominator must be a polynomial or rational")
        if den.is_zero():
            raise PoleError("rational function with zero denominator")
        if num.is_zero():
            self.num, self.den = Polynomial(), Polynomial.const(1)
            return
        g = num.gcd(den)
        if g.degree > 0:
            num = num.divmod(g)[0]
            den = den.divmod(g)[0]
        lead = den.lead
        if lead != 1:
            inv = 1 / lead
            num = Polynomial(a * inv for a in num.coeffs)
            den = Polynomial(a * inv for a in den.coeffs)
        self.num, self.den = num, den

    @classmethod
    def x(cls) -> "RationalFunction":
        return cls(Polynomial.x())

    @classmethod
    def const(cls, a) -> "RationalFunction":
        return cls(Polynomial.const(a))

    @staticmethod
    def _coerce(other):
        if isinstance(other, RationalFunction):
            return other
        if isinstance(other, (int, Fraction, Polynomial)):
            return RationalFunction(other)
        return None

    def __repr__(self):
        return f"RationalFunction({self.num!r} / {self.den!r})"

    def __eq__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self.num == o.num and self.den == o.den

    def __hash__(self):
        return hash((self.num, self.den))

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def __bool__(self):
        return not self.is_zero()

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        if self.den == o.den:
            return RationalFunction(self.num + o.num, self.den)
        return RationalFunction(self.num * o.den + o.num * self.den, self.den * o.den)

    __radd__ = __add__

    def __neg__(self):
        out = object.__new__(RationalFunction)
        out.num, out.den = -self.num, self.den
        return out

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return RationalFunction(self.num * o.num, self.den * o.den)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        if o.is_zero():
            raise ZeroDivisionError("division by the zero rational function")
        return RationalFunction(self.num * o.den, self.den * o.num)

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o / self

    def __pow__(self, k: int):
        if k < 0:
            return RationalFunction(self.den, self.num) ** (-k)
        return RationalFunction(self.num ** k, self.den ** k)

    @property
    def degree(self) -> int:
        """max(deg num, deg den); the degree used for identity-testing bounds."""
        return max(self.num.degree, self.den.degree, 0)

    def __call__(self, x0):
        return rf_eval(self, x0)

    def compose(self, g: "RationalFunction") -> "RationalFunction":
        """Return ``self(g(x))``."""
        g = self._coerce(g)

        def horner(p: Polynomial):
            acc = RationalFunction.const(0)
            for a in reversed(p.coeffs):
                acc = acc * g + a
            return acc

        return horner(self.num) / horner(self.den)

    def at_reciprocal(self) -> "RationalFunction":
        """Return ``self(1/x)``."""
        n = max(self.num.degree, self.den.degree, 0)
        return RationalFunction(self.num.reversed_to(n), self.den.reversed_to(n))

    def float_eval(self, x0: float) -> float:
        return float(self.num(float(x0))) / float(self.den(float(x0)))


def rf_eval(f: RationalFunction, x0) -> Fraction:
    """Exact value of ``f`` at the rational point ``x0``; raises PoleError at a pole."""
    x0 = Fraction(x0)
    d = f.den(x0)
    if d == 0:
        raise PoleError(f"pole at x = {format_rational(x0)}")
    return Fraction(f.num(x0)) / d


def rf_derivative(f: RationalFunction) -> RationalFunction:
    return RationalFunction(
        f.num.derivative() * f.den - f.num * f.den.derivative(), f.den * f.den)


X = RationalFunction.x()


def rf(num_coeffs: Sequence, den_coeffs: Sequence = (1,)) -> RationalFunction:
    """Build a rational function from ascending coefficient lists."""
    return RationalFunction(Polynomial(num_coeffs), Polynomial(den_coeffs))


# ---------------------------------------------------------------------------
# Dense matrices
# ---------------------------------------------------------------------------


def _is_zero(v) -> bool:
    return v == 0


class Matrix:
    """Immutable dense matrix over an exact ring.

    Entries are whatever the caller puts in (``Fraction`` or
    ``RationalFunction``); arithmetic is delegated to them.
    """

    __slots__ = ("rows", "shape")

    def __init__(self, rows: Iterable[Iterable]):
        rows = tuple(tuple(r) for r in rows)
        ncol = len(rows[0]) if rows else 0
        if any(len(r) != ncol for r in rows):
            raise DimensionError("ragged rows")
        self.rows = rows
        self.shape = (len(rows), ncol)

    # -- constructors -------------------------------------------------------
    @classmethod
    def zeros(cls, nrows: int, ncols: int | None = None, zero=Fraction(0)) -> "Matrix":
        ncols = nrows if ncols is None else ncols
        return cls([[zero] * ncols for _ in range(nrows)])

    @classmethod
    def identity(cls, n: int, one=Fraction(1), zero=Fraction(0)) -> "Matrix":
        return cls([[one if i == j else zero for j in range(n)] for i in range(n)])

    @classmethod
    def from_fractions(cls, rows) -> "Matrix":
        return cls([[Fraction(v) for v in r] for r in rows])

    @classmethod
    def permutation(cls, s: int) -> "Matrix":
        """Swap operator P on C^s (x) C^s."""
        n = s * s
        out = [[Fraction(0)] * n for _ in range(n)]
        for i in range(s):
            for j in range(s):
                out[j * s + i][i * s + j] = Fraction(1)
        return cls(out)

    # -- basic protocol -----------------------------------------------------
    def __getitem__(self, ij):
        i, j = ij
        return self.rows[i][j]

    def __iter__(self):
        return iter(self.rows)

    def __repr__(self):
        return f"Matrix({[list(r) for r in self.rows]!r})"

    def __eq__(self, other):
        if not isinstance(other, Matrix):
            return NotImplemented
        return self.shape == other.shape and all(
            a == b for ra, rb in zip(self.rows, other.rows) for a, b in zip(ra, rb))

    def __hash__(self):
        return hash(self.rows)

    def is_zero(self) -> bool:
        return all(_is_zero(v) for r in self.rows for v in r)

    def map(self, fn: Callable) -> "Matrix":
        return Matrix([[fn(v) for v in r] for r in self.rows])

    @property
    def T(self) -> "Matrix":
        return Matrix(zip(*self.rows)) if self.rows else self

    # -- arithmetic ---------------------------------------------------------
    def _check_same(self, other):
        if self.shape != other.shape:
            raise DimensionError(f"shape mismatch {self.shape} vs {other.shape}")

    def __add__(self, other: "Matrix") -> "Matrix":
        self._check_same(other)
        return Matrix([[a + b for a, b in zip(ra, rb)] for ra, rb in zip(self.rows, other.rows)])

    def __sub__(self, other: "Matrix") -> "Matrix":
        self._check_same(other)
        return Matrix([[a - b for a, b in zip(ra, rb)] for ra, rb in zip(self.rows, other.rows)])

    def __neg__(self) -> "Matrix":
        return self.map(lambda v: -v)

    def __mul__(self, scalar) -> "Matrix":
        if isinstance(scalar, Matrix):
            raise TypeError("use @ for matrix products")
        return self.map(lambda v: v * scalar)

    __rmul__ = __mul__

    def __matmul__(self, other: "Matrix") -> "Matrix":
        return mat_mul(self, other)

    def kron(self, other: "Matrix") -> "Matrix":
        return mat_tensor(self, other)

    def trace(self):
        if self.shape[0] != self.shape[1]:
            raise DimensionError("trace of a non-square matrix")
        acc = 0
        for i in range(self.shape[0]):
            acc = acc + self.rows[i][i]
        return acc

    def column_sums(self) -> list:
        out = []
        for j in range(self.shape[1]):
            acc = 0
            for i in range(self.shape[0]):
                acc = acc + self.rows[i][j]
            out.append(acc)
        return out

    def to_float(self):
        import numpy as np

        return np.array([[float(v) for v in r] for r in self.rows], dtype=float)


def mat_mul(a: Matrix, b: Matrix) -> Matrix:
    if a.shape[1] != b.shape[0]:
        raise DimensionError(f"cannot multiply {a.shape} by {b.shape}")
    n, m = a.shape[0], b.shape[1]
    brows = b.rows
    out = []
    for ra in a.rows:
        acc = [0] * m
        for k, av in enumerate(ra):
            if _is_zero(av):
                continue
            rb = brows[k]
            for j in range(m):
                bv = rb[j]
                if not _is_zero(bv):
                    acc[j] = acc[j] + av * bv
        out.append(acc)
    if n and m:
        zero = _zero_like(a, b)
        out = [[zero if (isinstance(v, int) and v == 0) else v for v in r] for r in out]
    return Matrix(out) if n else Matrix([])


def _zero_like(a: Matrix, b: Matrix):
    for mat in (a, b):
        for r in mat.rows:
            for v in r:
                if isinstance(v, RationalFunction):
                    return RationalFunction.const(0)
    return Fraction(0)


def mat_tensor(a: Matrix, b: Matrix) -> Matrix:
    """Kronecker product, first factor most significant."""
    (p, q), (r, s) = a.shape, b.shape
    out = []
    for i in range(p):
        for k in range(r):
            out.append([a.rows[i][j] * b.rows[k][l] for j in range(q) for l in range(s)])
    return Matrix(out)


def partial_trace(a: Matrix, dims: Sequence[int], traced: int = 0) -> Matrix:
    """Trace out tensor factor ``traced`` of an operator on ``dims[0] (x) dims[1] (x) ...``."""
    dims = tuple(dims)
    n = 1
    for d in dims:
        n *= d
    if a.shape != (n, n):
        raise DimensionError(f"operator shape {a.shape} does not match dims {dims}")
    if not 0 <= traced < len(dims):
        raise DimensionError("traced factor out of range")
    kept = dims[:traced] + dims[traced + 1:]
    m = n // dims[traced]
    strides = _strides(dims)
    kept_strides = _strides(kept)

    def full_index(kept_idx, t):
        digits = list(kept_idx)
        digits.insert(traced, t)
        return sum(dg * st for dg, st in zip(digits, strides))

    kept_tuples = list(product(*[range(d) for d in kept]))
    out = [[0] * m for _ in range(m)]
    for ki in kept_tuples:
        i = sum(dg * st for dg, st in zip(ki, kept_strides))
        for kj in kept_tuples:
            j = sum(dg * st for dg, st in zip(kj, kept_strides))
            acc = 0
            for t in range(dims[traced]):
                acc = acc + a.rows[full_index(ki, t)][full_index(kj, t)]
            out[i][j] = acc
    return Matrix(out)


def _strides(dims: Sequence[int]) -> tuple:
    st, acc = [], 1
    for d in reversed(dims):
        st.append(acc)
        acc *= d
    return tuple(reversed(st))


def embed(op: Matrix, spaces: Sequence[int], n_spaces: int, d: int) -> Matrix:
    """Act with ``op`` on the ordered tensor factors ``spaces`` of ``(C^d)^{(x) n_spaces}``.

    ``op`` is an operator on ``(C^d)^{(x) len(spaces)}`` whose first factor is
    placed on ``spaces[0]`` and so on; identity elsewhere.  ``embed(R, (1, 0), ...)``
    therefore gives ``R_{10}`` in auxiliary-space notation.
    """
    k = len(spaces)
    if op.shape != (d ** k, d ** k):
        raise DimensionError("operator does not act on the requested factors")
    if len(set(spaces)) != k or any(not 0 <= s < n_spaces for s in spaces):
        raise DimensionError("bad target spaces")
    n = d ** n_spaces
    strides = _strides((d,) * n_spaces)
    sub_strides = _strides((d,) * k)
    zero = Fraction(0)
    for r in op.rows:
        for v in r:
            if isinstance(v, RationalFunction):
                zero = RationalFunction.const(0)
                break
    out = [[zero] * n for _ in range(n)]
    nz = [(i, j, v) for i, r in enumerate(op.rows) for j, v in enumerate(r) if not _is_zero(v)]
    for col in range(n):
        digits = [(col // st) % d for st in strides]
        sub_col = sum(digits[s] * sst for s, sst in zip(spaces, sub_strides))
        base = col - sum(digits[s] * strides[s] for s in spaces)
        for i, j, v in nz:
            if j != sub_col:
                continue
            row = base + sum(((i // sst) % d) * strides[s] for s, sst in zip(spaces, sub_strides))
            out[row][col] = out[row][col] + v
    return Matrix(out)


def eval_matrix(m: Matrix, x0) -> Matrix:
    """Evaluate a matrix of rational functions at ``x0`` (PoleError on any pole)."""
    return m.map(lambda v: rf_eval(v, x0) if isinstance(v, RationalFunction) else Fraction(v))


def derivative_matrix(m: Matrix) -> Matrix:
    return m.map(lambda v: rf_derivative(v) if isinstance(v, RationalFunction)
                 else RationalFunction.const(0))


def rf_matrix(m: Matrix) -> Matrix:
    """Promote every entry to a RationalFunction."""
    return m.map(lambda v: v if isinstance(v, RationalFunction) else RationalFunction.const(v))


def compose_matrix(m: Matrix, g: RationalFunction) -> Matrix:
    """Entrywise substitution ``x -> g(x)``."""
    return m.map(lambda v: v.compose(g) if isinstance(v, RationalFunction) else v)


def common_degree(m: Matrix) -> int:
    """Degree of the matrix after clearing a common denominator.

    For entries ``p_ij/q_ij`` this is ``max(deg lcm(q), max deg(p_ij * lcm/q_ij))``;
    the identity-testing code uses it to size its sample grids.
    """
    lcm = Polynomial.const(1)
    for r in m.rows:
        for v in r:
            if isinstance(v, RationalFunction) and v.den.degree > 0:
                g = lcm.gcd(v.den)
                lcm = (lcm * v.den).divmod(g)[0]
    deg = lcm.degree
    for r in m.rows:
        for v in r:
            if isinstance(v, RationalFunction) and not v.is_zero():
                deg = max(deg, v.num.degree + lcm.degree - v.den.degree)
    return deg


def solve_linear(a: Matrix, b: Sequence):
    """Solve ``a @ x = b`` over a field of exact entries by Gauss-Jordan elimination.

    Returns ``(x, kernel_dim)``; free unknowns are set to zero.  Raises
    :class:`~masolve.errors.NonInvertibleError` if the system is inconsistent.
    """
    from .errors import NonInvertibleError

    n_rows, n_cols = a.shape
    if len(b) != n_rows:
        raise DimensionError("right-hand side length mismatch")
    aug = [list(r) + [bv] for r, bv in zip(a.rows, b)]
    pivots = []
    row = 0
    for col in range(n_cols):
        piv = next((r for r in range(row, n_rows) if not _is_zero(aug[r][col])), None)
        if piv is None:
            continue
        aug[row], aug[piv] = aug[piv], aug[row]
        inv = 1 / aug[row][col]
        aug[row] = [v * inv for v in aug[row]]
        for r in range(n_rows):
            if r != row and not _is_zero(aug[r][col]):
                f = aug[r][col]
                aug[r] = [v - f * w for v, w in zip(aug[r], aug[row])]
        pivots.append(col)
        row += 1
        if row == n_rows:
            break
    for r in range(row, n_rows):
        if not _is_zero(aug[r][-1]):
            raise NonInvertibleError("linear system is inconsistent")
    zero = aug[0][-1] * 0 if aug else Fraction(0)
    x = [zero] * n_cols
    for r, col in enumerate(pivots):
        x[col] = aug[r][-1]
    return x, n_cols - len(pivots)
