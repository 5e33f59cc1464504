"""Truncated two-mode representation of the DiSSEP G-algebra.

Vectors of the N^2-dimensional space are stored as ``(N, N)`` arrays indexed
by ``(n, m)``: ``n`` is the occupation of the first mode (raised by G1) and
``m`` of the second (lowered by G3).  Boundary vectors are truncated series.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Sequence

import numpy as np

from ..errors import DegenerateParameterError, TruncationError, ValidationError
from ..exact import Matrix
from ..models import ModelSpec, check_capacity
from ..steady import StationaryDistribution
from .words import AlgebraWord, parse_word

DEFAULT_TOL = 1e-10
DEFAULT_N0 = 8
DEFAULT_NMAX = 64

# E = G2 + G1 + G3 for an empty site, D = G2 - G1 - G3 for an occupied one
SITE_COMBOS = (
    {"G2": 1, "G1": 1, "G3": 1},
    {"G2": 1, "G1": -1, "G3": -1},
)


def _positive_kappa(spec: ModelSpec) -> ModelSpec:
    # the generator depends on kappa only through kappa^2
    if spec.model != "dissep":
        raise ValidationError(f"truncated representation needs a dissep spec, got {spec.model}")
    return spec if spec.kappa > 0 else replace(spec, kappa=-spec.kappa)


def _poch(q2, n: int, one):
    out = one
    qk = one
    for _ in range(n):
        qk = qk * q2
        out = out * (one - qk)
    return out


def _signed_power(x, phi, k: int, one):
    """x^k phi^(k(k-1)/2) for any integer k, as a running product."""
    out = one
    if k >= 0:
        f = x
        for _ in range(k):
            out = out * f
            f = f * phi
    else:
        f = phi / x
        for _ in range(-k):
            out = out * f
            f = f * phi
    return out


def boundary_coefficients(phi, lead, off, N: int, one):
    """Coefficients of a boundary series on the block n, m < N.

    Entry ``[i, j]`` is ``off^(i-j) lead^j phi^((i-j)(i-j-1)/2) / (phi^2; phi^2)_j``.
    The right vector is the transpose with its own parameters.  A zero ``off``
    leaves only the diagonal ``lead^i``.
    """
    zero = one - one
    arr = np.empty((N, N), dtype=object if isinstance(one, Fraction) else float)
    q2 = phi * phi
    poch = [_poch(q2, j, one) for j in range(N)]
    for i in range(N):
        for j in range(N):
            if off == 0:
                arr[i, j] = lead ** i if i == j else zero
            else:
                arr[i, j] = _signed_power(off, phi, i - j, one) * lead ** j / poch[j]
    return arr


@dataclass(frozen=True)
class TruncatedRep:
    """Boundary vectors and generator action truncated to occupations below N."""

    N: int
    phi: object
    a: object
    b: object
    c: object
    d: object
    w: np.ndarray
    v: np.ndarray
    exact: bool = True
    warnings: tuple = field(default=())

    @property
    def one(self):
        return Fraction(1) if self.exact else 1.0

    @property
    def phase(self) -> np.ndarray:
        """phi^(n+m), the diagonal of G2."""
        p = [self.phi ** k if k else self.one for k in range(2 * self.N)]
        out = np.empty((self.N, self.N), dtype=self.w.dtype)
        for n in range(self.N):
            for m in range(self.N):
                out[n, m] = p[n + m]
        return out

    # single-mode operators, exposed for invariant checks
    def e_matrix(self) -> Matrix:
        return Matrix([[self.one if i == j + 1 else self.one - self.one for j in range(self.N)]
                       for i in range(self.N)])

    def d_matrix(self) -> Matrix:
        return Matrix([[self.one if j == i + 1 else self.one - self.one for j in range(self.N)]
                       for i in range(self.N)])

    def A_matrix(self, q) -> Matrix:
        z = self.one - self.one
        return Matrix([[(q ** i if i else self.one) if i == j else z for j in range(self.N)]
                       for i in range(self.N)])

    def generator_matrix(self, name: str) -> Matrix:
        I = Matrix.identity(self.N, self.one, self.one - self.one)
        if name == "G1":
            return self.e_matrix().kron(I)
        if name == "G2":
            A = self.A_matrix(self.phi)
            return A.kron(A)
        if name == "G3":
            return I.kron(self.d_matrix())
        raise ValidationError(f"unknown generator {name}")

    # action on stored vectors
    def _zero(self):
        return np.zeros_like(self.w) if not self.exact else np.full(self.w.shape, Fraction(0), dtype=object)

    def left(self, W: np.ndarray, name: str) -> np.ndarray:
        out = self._zero()
        if name == "G1":
            out[:-1, :] = W[1:, :]
        elif name == "G2":
            out = W * self._phase
        elif name == "G3":
            out[:, 1:] = W[:, :-1]
        else:
            raise ValidationError(f"unknown generator {name}")
        return out

    def right(self, V: np.ndarray, name: str) -> np.ndarray:
        out = self._zero()
        if name == "G1":
            out[1:, :] = V[:-1, :]
        elif name == "G2":
            out = V * self._phase
        elif name == "G3":
            out[:, :-1] = V[:, 1:]
        else:
            raise ValidationError(f"unknown generator {name}")
        return out

    def left_combo(self, W: np.ndarray, combo: dict) -> np.ndarray:
        out = self._zero()
        for name, coef in combo.items():
            if coef:
                out = out + coef * self.left(W, name)
        return out

    def right_combo(self, V: np.ndarray, combo: dict) -> np.ndarray:
        out = self._zero()
        for name, coef in combo.items():
            if coef:
                out = out + coef * self.right(V, name)
        return out

    def bracket(self, W: np.ndarray, V: np.ndarray):
        return (W * V).sum()

    def __post_init__(self):
        object.__setattr__(self, "_phase", self.phase)

    def evaluate(self, word) -> object:
        """<W| word |V> on the truncated block."""
        if isinstance(word, str):
            word = AlgebraWord.parse(word)
        elif not isinstance(word, AlgebraWord):
            word = AlgebraWord.monomial(word)
        total = self.one - self.one
        for mono, coef in word.items():
            W = self.w
            for g in mono:
                if g not in ("G1", "G2", "G3"):
                    raise ValidationError(f"letter {g} is not a G generator")
                W = self.left(W, g)
            total = total + coef * self.bracket(W, self.v)
        return total

    def block(self, arr: np.ndarray) -> np.ndarray:
        """Components with n, m <= N - 2, where truncation does not interfere."""
        return arr[: self.N - 1, : self.N - 1]

    def left_residual(self) -> np.ndarray:
        """<W|(G1 - c G2 - a G3) on the valid block."""
        return self.block(self.left_combo(self.w, {"G1": 1, "G2": -self.c, "G3": -self.a}))

    def right_residual(self) -> np.ndarray:
        """(G3 - b G1 - d G2)|V> on the valid block."""
        return self.block(self.right_combo(self.v, {"G3": 1, "G1": -self.b, "G2": -self.d}))


def convergence_ratios(spec: ModelSpec, L: int) -> tuple:
    """The two geometric ratios of the partition-function double series.

    ``None`` marks a direction where the series terminates (c = 0 or d = 0).
    """
    spec = _positive_kappa(spec)
    phi, a, b, c, d = spec.phi, spec.a, spec.b, spec.c, spec.d
    g = 1 - phi * phi
    r1 = abs(b * c * phi ** L / (g * d)) if d != 0 and c != 0 else None
    r2 = abs(a * d * phi ** L / (g * c)) if c != 0 and d != 0 else None
    return r1, r2


def convergence_warnings(spec: ModelSpec, L: int) -> tuple:
    out = []
    for name, r in zip(("b c phi^L / ((1 - phi^2) d)", "a d phi^L / ((1 - phi^2) c)"),
                       convergence_ratios(spec, L)):
        if r is not None and r >= 1:
            out.append(f"|{name}| = {float(r):.6g} >= 1: boundary series may diverge")
    return tuple(out)


def build_truncated_rep(spec: ModelSpec, N: int, exact: bool = True, L: int | None = None) -> TruncatedRep:
    """Truncated representation for a DiSSEP spec (negative kappa is replaced by |kappa|)."""
    if N < 2:
        raise ValidationError("truncation order N must be at least 2")
    spec = _positive_kappa(spec)
    phi = spec.phi
    if phi in (1, -1):
        raise DegenerateParameterError("phi = +-1: the representation degenerates")
    conv = (lambda q: q) if exact else float
    one = Fraction(1) if exact else 1.0
    phi_, a, b, c, d = (conv(q) for q in (phi, spec.a, spec.b, spec.c, spec.d))
    w = boundary_coefficients(phi_, a, c, N, one)
    v = boundary_coefficients(phi_, b, d, N, one).T.copy()
    warns = convergence_warnings(spec, L) if L is not None else ()
    return TruncatedRep(N, phi_, a, b, c, d, w, v, exact, warns)


def dissep_evaluate(word, rep: TruncatedRep):
    return rep.evaluate(word)


def _as_float(x) -> float:
    return float(x)


def evaluate_converged(word, spec: ModelSpec, tol: float = DEFAULT_TOL, N0: int = DEFAULT_N0,
                       n_max: int = DEFAULT_NMAX, scale: float | None = None) -> tuple:
    """Float value of a word at the first N with |v_N - v_{N+4}| <= tol * scale.

    ``scale`` defaults to ``|v_{N+4}|``.  N runs over N0, 2 N0, ... up to n_max.
    Returns ``(value, N)``.
    """
    N = N0
    last = None
    while N <= n_max:
        v1 = _as_float(build_truncated_rep(spec, N, exact=False).evaluate(word))
        v2 = _as_float(build_truncated_rep(spec, N + 4, exact=False).evaluate(word))
        ref = abs(v2) if scale is None else scale
        if abs(v1 - v2) <= tol * max(ref, np.finfo(float).tiny):
            return v2, N
        last = (v1, v2)
        N *= 2
    raise TruncationError(f"word did not converge by N = {n_max}", last)


def _config_weights(rep: TruncatedRep, L: int) -> list:
    weights = []

    def walk(W, depth):
        if depth == L:
            weights.append(rep.bracket(W, rep.v))
            return
        for t in (0, 1):
            walk(rep.left_combo(W, SITE_COMBOS[t]), depth + 1)

    walk(rep.w, 0)
    return weights


def dissep_ma_weights(spec: ModelSpec, L: int, N: int, exact: bool = False) -> list:
    """Unnormalized <W| X_1 ... X_L |V> per configuration, configuration order of the generator."""
    check_capacity(2, L)
    return _config_weights(build_truncated_rep(spec, N, exact=exact, L=L), L)


def _normalized(weights: Sequence) -> list:
    z = sum(weights)
    return [w / z for w in weights]


def dissep_ma_steady(spec: ModelSpec, L: int, N: int | None = None, tol: float = DEFAULT_TOL,
                     n_max: int = DEFAULT_NMAX) -> StationaryDistribution:
    """Stationary distribution from the G-algebra (float shadow).

    With ``N`` given, the result at N must agree with N + 4 within ``tol``.
    Otherwise N escalates from 8 by doubling up to ``n_max``.
    """
    spec = _positive_kappa(spec)
    sizes = [N] if N is not None else []
    if N is None:
        k = DEFAULT_N0
        while k <= n_max:
            sizes.append(k)
            k *= 2
    last = None
    for n in sizes:
        p1 = _normalized([float(x) for x in dissep_ma_weights(spec, L, n)])
        p2 = _normalized([float(x) for x in dissep_ma_weights(spec, L, n + 4)])
        diff = max(abs(x - y) for x, y in zip(p1, p2))
        if diff <= tol:
            return StationaryDistribution(L, 2, tuple(p2), truncation=n + 4)
        last = (diff, n)
    raise TruncationError(f"stationary weights did not converge (max change {last[0]:.3g} at N = {last[1]})",
                          last)


def dissep_Z_series(spec: ModelSpec, L: int, N: int, exact: bool = True):
    """Partial double sum n, m < N of <W|G2^L|V>.

    Terms are (phi^L c b / d)^n (phi^L d a / c)^m phi^((m-n)^2) / ((phi^2;phi^2)_n (phi^2;phi^2)_m).
    With c = 0 or d = 0 the series form does not apply and the word is
    evaluated in the representation instead.
    """
    spec = _positive_kappa(spec)
    phi, a, b, c, d = spec.phi, spec.a, spec.b, spec.c, spec.d
    if c == 0 or d == 0:
        return build_truncated_rep(spec, N, exact=exact).evaluate(("G2",) * L)
    one = Fraction(1)
    if not exact:
        phi, a, b, c, d, one = (float(q) for q in (phi, a, b, c, d, one))
    q2 = phi * phi
    poch = [_poch(q2, j, one) for j in range(N)]
    x = phi ** L * c * b / d if L else c * b / d
    y = phi ** L * d * a / c if L else d * a / c
    total = one - one
    for n in range(N):
        for m in range(N):
            k = (m - n) ** 2
            total += x ** n * y ** m * (phi ** k if k else one) / (poch[n] * poch[m])
    return total


__all__ = ["TruncatedRep", "build_truncated_rep", "boundary_coefficients", "dissep_evaluate",
           "evaluate_converged", "dissep_ma_weights", "dissep_ma_steady", "dissep_Z_series",
           "convergence_ratios", "convergence_warnings", "SITE_COMBOS", "parse_word"]
