"""R and K matrices, and finite verification of the integrability identities.

Identities involving several spectral parameters are checked by exact
evaluation on rational grids.  For each identity the per-variable degree of
the cleared polynomial ``N_lhs * D_rhs - N_rhs * D_lhs`` is bounded from the
factors' common degrees, and every grid line gets more points than that
bound; a polynomial vanishing on such a grid is identically zero.  Grid
points that hit a pole are replaced by the next unused candidate value.

Only the ratios ``x1/x2``, ``x1/x3``, ``x2/x3`` enter the Yang-Baxter
equation, so it is checked at ``x3 = 1`` over a grid in ``(x1, x2)``; the map
``(x1, x2, x3) -> (x1/x3, x2/x3)`` is onto the nonzero plane.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import count
from typing import Callable, Sequence

from .errors import (DegenerateParameterError, NonInvertibleError, PoleError,
                     ValidationError)
from .exact import (Matrix, RationalFunction, X, common_degree, compose_matrix,
                    derivative_matrix, embed, eval_matrix, format_rational, mat_mul,
                    partial_trace, rf_matrix, solve_linear)
from .models import (LocalOperators, ModelSpec, assemble_markov, build_local_operators,
                     check_capacity)

DEFAULT_POINTS = 25


@dataclass(frozen=True)
class SpectralRMatrix:
    """s^2 x s^2 matrix of rational functions in the spectral parameter."""

    matrix: Matrix
    species: int

    def at(self, x0) -> Matrix:
        return eval_matrix(self.matrix, x0)

    def derivative(self) -> "SpectralRMatrix":
        return SpectralRMatrix(derivative_matrix(self.matrix), self.species)

    def swapped(self) -> "SpectralRMatrix":
        """R_21 = P R_12 P."""
        P = rf_matrix(Matrix.permutation(self.species))
        return SpectralRMatrix(P @ self.matrix @ P, self.species)

    @property
    def degree(self) -> int:
        return common_degree(self.matrix)


@dataclass(frozen=True)
class SpectralKMatrix:
    matrix: Matrix
    side: str  # "left", "right" or "tilde"
    kernel_dim: int = 0  # free entries left when solving for K-tilde

    def at(self, x0) -> Matrix:
        return eval_matrix(self.matrix, x0)

    @property
    def species(self) -> int:
        return self.matrix.shape[0]

    @property
    def degree(self) -> int:
        return common_degree(self.matrix)


@dataclass
class Verdict:
    check: str
    model: str
    passed: bool
    points: int = 0
    witness: tuple | None = None
    skipped: int = 0
    detail: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        w = None if self.witness is None else [format_rational(v) for v in self.witness]
        out = {"check": self.check, "model": self.model, "points": self.points,
               "pass": self.passed, "witness": w}
        if self.detail:
            out["detail"] = self.detail
        return out

    def __bool__(self):
        return self.passed


def _rfm(rows) -> Matrix:
    return Matrix([[v if isinstance(v, RationalFunction) else RationalFunction.const(v)
                    for v in r] for r in rows])


# ---------------------------------------------------------------------------
# TASEP
# ---------------------------------------------------------------------------


def tasep_R() -> SpectralRMatrix:
    x = X
    return SpectralRMatrix(_rfm([[1, 0, 0, 0], [0, 0, x, 0], [0, 1, 1 - x, 0], [0, 0, 0, 1]]), 2)


def tasep_K(alpha) -> SpectralKMatrix:
    al = Fraction(alpha)
    if al <= 0:
        raise ValidationError("tasep_K needs alpha > 0")
    x = X
    den = x * al - x - al
    return SpectralKMatrix(_rfm([[(-x * al + al - 1) * x / den, 0],
                                 [al * (x * x - 1) / den, 1]]), "left")


def tasep_Kbar(beta) -> SpectralKMatrix:
    be = Fraction(beta)
    if be <= 0:
        raise ValidationError("tasep_Kbar needs beta > 0")
    x = X
    den = -x * x * be + x * be - x
    return SpectralKMatrix(_rfm([[1, -(x * x - 1) * be / den],
                                 [0, (x * be - x - be) / den]]), "right")


# ---------------------------------------------------------------------------
# DiSSEP
# ---------------------------------------------------------------------------


def dissep_R(kappa) -> SpectralRMatrix:
    k = Fraction(kappa)
    if k == 0:
        raise DegenerateParameterError("dissep_R needs kappa != 0")
    x = X
    d1 = k * (x + 1) + x - 1
    d2 = k * (x - 1) + x + 1
    if d1.is_zero() or d2.is_zero():
        raise DegenerateParameterError("R-matrix denominator vanishes identically")
    return SpectralRMatrix(_rfm([
        [k * (x + 1) / d1, 0, 0, (x - 1) / d1],
        [0, k * (x - 1) / d2, (x + 1) / d2, 0],
        [0, (x + 1) / d2, k * (x - 1) / d2, 0],
        [(x - 1) / d1, 0, 0, k * (x + 1) / d1]]), 2)


def _dissep_boundary(p, q, k, sign):
    """Shared shape of K (sign=+1, p=alpha, q=gamma) and Kbar (sign=-1, p=beta, q=delta)."""
    x = X
    x2 = x * x
    den = 2 * x * (sign * (x2 - 1) * (p + q) + 2 * k * (x2 + 1))
    if den.is_zero():
        raise DegenerateParameterError("K-matrix denominator vanishes identically")
    diff = q - p
    return [
        [(x2 + 1) * ((x2 - 1) * diff + 4 * x * k) / den,
         (x2 - 1) * ((x2 + 1) * diff + sign * 2 * x * (p + q)) / den],
        [-(x2 - 1) * ((x2 + 1) * diff - sign * 2 * x * (p + q)) / den,
         -(x2 + 1) * ((x2 - 1) * diff - 4 * x * k) / den]]


def dissep_K(alpha, gamma, kappa) -> SpectralKMatrix:
    k = Fraction(kappa)
    if k == 0:
        raise DegenerateParameterError("dissep_K needs kappa != 0")
    return SpectralKMatrix(_rfm(_dissep_boundary(Fraction(alpha), Fraction(gamma), k, 1)), "left")


def dissep_Kbar(beta, delta, kappa) -> SpectralKMatrix:
    k = Fraction(kappa)
    if k == 0:
        raise DegenerateParameterError("dissep_Kbar needs kappa != 0")
    return SpectralKMatrix(_rfm(_dissep_boundary(Fraction(beta), Fraction(delta), k, -1)), "right")


def model_matrices(spec: ModelSpec):
    """(R, K, Kbar) for a TASEP or DiSSEP spec."""
    if spec.model == "tasep":
        return tasep_R(), tasep_K(spec.alpha), tasep_Kbar(spec.beta)
    if spec.model == "dissep":
        return (dissep_R(spec.kappa), dissep_K(spec.alpha, spec.gamma, spec.kappa),
                dissep_Kbar(spec.beta, spec.delta, spec.kappa))
    raise ValidationError("R/K matrices are only available for tasep and dissep")


# ---------------------------------------------------------------------------
# Sampling machinery
# ---------------------------------------------------------------------------


def candidate_points() -> "iter":
    """Deterministic stream of distinct nonzero rationals away from +-1 and 0."""
    seen = set()
    for n in count(2):
        for num in range(1, n):
            for sgn in (1, -1):
                for val in (Fraction(n, num), Fraction(num, n)):
                    v = sgn * (val + Fraction(1, 7 * n))
                    if v not in seen and v not in (0, 1, -1):
                        seen.add(v)
                        yield v


def _take(gen, k):
    return [next(gen) for _ in range(k)]


def _grid_check(name: str, model: str, residual: Callable, n1: int, n2: int) -> Verdict:
    """Evaluate ``residual(u, v)`` (a Matrix, or raises PoleError) on a per-row grid."""
    rows = candidate_points()
    points = skipped = 0
    found = 0
    while found < n1:
        u = next(rows)
        cols = candidate_points()
        got = 0
        tries = 0
        while got < n2:
            v = next(cols)
            tries += 1
            if tries > 20 * n2 + 100:
                break
            try:
                res = residual(u, v)
            except PoleError:
                skipped += 1
                continue
            points += 1
            got += 1
            if not res.is_zero():
                return Verdict(name, model, False, points, (u, v), skipped)
        if got == n2:
            found += 1
    return Verdict(name, model, True, points, None, skipped)


def _deg(m) -> int:
    return m.degree


# ---------------------------------------------------------------------------
# Identity checks
# ---------------------------------------------------------------------------


def check_yang_baxter(R: SpectralRMatrix, model: str = "", n_points: int = DEFAULT_POINTS) -> Verdict:
    """R12(x1/x2) R13(x1/x3) R23(x2/x3) == R23 R13 R12, sampled at x3 = 1."""
    s = R.species
    d = R.degree
    # x1 appears in R12 and R13 on both sides, x2 in R12 and R23.
    bound = 2 * (d + d)
    n = max(n_points, bound + 1)

    def residual(x1, x2):
        r12 = embed(R.at(x1 / x2), (0, 1), 3, s)
        r13 = embed(R.at(x1), (0, 2), 3, s)
        r23 = embed(R.at(x2), (1, 2), 3, s)
        return (r12 @ r13 @ r23) - (r23 @ r13 @ r12)

    v = _grid_check("ybe", model, residual, n, n)
    v.detail["degree_bound"] = bound
    return v


def check_reflection(R: SpectralRMatrix, K: SpectralKMatrix, model: str = "",
                     n_points: int = DEFAULT_POINTS) -> Verdict:
    """R12(x1/x2) K1(x1) R21(x1 x2) K2(x2) == K2(x2) R12(x1 x2) K1(x1) R21(x1/x2).

    Left and right K-matrices satisfy this same equation in the conventions
    used here, so ``K.side`` only labels the report.
    """
    s = R.species
    dR, dK = R.degree, K.degree
    bound = 2 * (2 * dR + dK)
    n = max(n_points, bound + 1)
    P = Matrix.permutation(s)
    I = Matrix.identity(s)

    def residual(x1, x2):
        r12_q = R.at(x1 / x2)
        r12_p = R.at(x1 * x2)
        r21_q = P @ r12_q @ P
        r21_p = P @ r12_p @ P
        k1 = K.at(x1).kron(I)
        k2 = I.kron(K.at(x2))
        return (r12_q @ k1 @ r21_p @ k2) - (k2 @ r12_p @ k1 @ r21_q)

    v = _grid_check(f"reflection-{K.side}", model, residual, n, n)
    v.detail["degree_bound"] = bound
    return v


def check_unitarity_regularity(M, model: str = "") -> Verdict:
    """Exact rational-function identities: unitarity plus R(1) = P or K(1) = 1."""
    if isinstance(M, SpectralRMatrix):
        s = M.species
        inv = SpectralRMatrix(M.matrix.map(lambda v: v.at_reciprocal()), s).swapped()
        prod = M.matrix @ inv.matrix
        unitary = prod == rf_matrix(Matrix.identity(s * s))
        regular = M.at(1) == Matrix.permutation(s)
        name = "unitarity-regularity-R"
    else:
        s = M.species
        prod = M.matrix @ M.matrix.map(lambda v: v.at_reciprocal())
        unitary = prod == rf_matrix(Matrix.identity(s))
        try:
            regular = M.at(1) == Matrix.identity(s)
        except PoleError:
            regular = False
        name = f"unitarity-regularity-K{'' if M.side == 'left' else 'bar'}"
    return Verdict(name, model, bool(unitary and regular), 0, None, 0,
                   {"unitary": bool(unitary), "regular": bool(regular)})


# ---------------------------------------------------------------------------
# Derivatives at x = 1 and the local jump operators
# ---------------------------------------------------------------------------


def derivative_at_one(M) -> Matrix:
    return eval_matrix(derivative_matrix(M.matrix), 1)


def local_from_spectral(spec: ModelSpec) -> LocalOperators:
    """Local operators from derivatives of R, K, Kbar at x = 1.

    TASEP: m = -P R'(1), B = -K'(1)/2, Bbar = Kbar'(1)/2.
    DiSSEP: m = 2 kappa P R'(1), B = kappa K'(1), Bbar = -kappa Kbar'(1).
    """
    R, K, Kb = model_matrices(spec)
    P = Matrix.permutation(2)
    dR, dK, dKb = derivative_at_one(R), derivative_at_one(K), derivative_at_one(Kb)
    if spec.model == "tasep":
        half = Fraction(1, 2)
        return LocalOperators(2, -(P @ dR), dK * (-half), dKb * half)
    k = spec.kappa
    return LocalOperators(2, (P @ dR) * (2 * k), dK * k, dKb * (-k))


# ---------------------------------------------------------------------------
# K-tilde and the double-row transfer matrix
# ---------------------------------------------------------------------------


def _ktilde_system(R: SpectralRMatrix):
    """Linear map vec(Kt) -> tr_0(Kt_0 R_01(1/x^2) P_01) as an s^2 x s^2 RF matrix."""
    s = R.species
    Rq = compose_matrix(R.matrix, 1 / (X * X))
    RP = Rq @ rf_matrix(Matrix.permutation(s))
    # (Kt (x) 1) RP, traced over space 0; entry (i, j) of the result is
    # sum_{o, p} Kt[o, p] * RP[(p, i), (o, j)].
    zero = RationalFunction.const(0)
    rows = []
    for i in range(s):
        for j in range(s):
            row = []
            for o in range(s):
                for p in range(s):
                    row.append(RP[p * s + i, o * s + j])
            rows.append(row)
    return Matrix([[v if isinstance(v, RationalFunction) else zero + v for v in r] for r in rows])


def derive_Ktilde(Kbar: SpectralKMatrix, R: SpectralRMatrix) -> SpectralKMatrix:
    """Solve ``Kbar_1(x) = tr_0(Kt_0(1/x) R_01(1/x^2) P_01)`` for Kt over Q(x).

    When the map has a kernel (it does for the TASEP R-matrix) the free
    entries are set to zero; the result is checked against the defining
    relation before being returned.
    """
    s = R.species
    A = _ktilde_system(R)
    rhs = [Kbar.matrix[i, j] for i in range(s) for j in range(s)]
    sol, kernel = solve_linear(A, rhs)
    kt_inv = Matrix([sol[i * s:(i + 1) * s] for i in range(s)])  # Kt(1/x)
    kt = kt_inv.map(lambda v: v.at_reciprocal())
    out = SpectralKMatrix(kt, "tilde", kernel)
    if not verify_Ktilde(out, Kbar, R):
        raise NonInvertibleError("reconstructed K-tilde fails the defining relation")
    return out


def verify_Ktilde(Kt: SpectralKMatrix, Kbar: SpectralKMatrix, R: SpectralRMatrix) -> bool:
    """Exact rational-function check of the defining relation of K-tilde."""
    s = R.species
    kt_inv = Kt.matrix.map(lambda v: v.at_reciprocal())
    Rq = compose_matrix(R.matrix, 1 / (X * X))
    prod = kt_inv.kron(rf_matrix(Matrix.identity(s))) @ Rq @ rf_matrix(Matrix.permutation(s))
    return partial_trace(prod, (s, s), 0) == Kbar.matrix


@dataclass(frozen=True)
class TransferMatrix:
    """Double-row transfer matrix t(x) for a TASEP or DiSSEP spec on L sites."""

    spec: ModelSpec
    L: int
    R: SpectralRMatrix
    K: SpectralKMatrix
    Ktilde: SpectralKMatrix

    def factors(self, values: Callable[[object], Matrix]) -> list:
        """The 2L+2 factors of the trace, space 0 first, each mapped by ``values``."""
        L, s = self.L, self.R.species
        n = L + 1
        I_rest = Matrix.identity(s ** L)
        out = [values(self.Ktilde).kron(I_rest)]
        r = values(self.R)
        for j in range(L, 0, -1):
            out.append(embed(r, (0, j), n, s))
        out.append(values(self.K).kron(I_rest))
        for j in range(1, L + 1):
            out.append(embed(r, (j, 0), n, s))
        return out

    def at(self, x0) -> Matrix:
        x0 = Fraction(x0)
        fs = self.factors(lambda M: M.at(x0))
        prod = fs[0]
        for f in fs[1:]:
            prod = mat_mul(prod, f)
        s = self.R.species
        return partial_trace(prod, (s, s ** self.L), 0)

    def derivative_at_one(self) -> Matrix:
        """t'(1) by the product rule over the 2L+2 factors."""
        vals = self.factors(lambda M: M.at(1))
        ders = self.factors(lambda M: derivative_at_one(M))
        n = len(vals)
        # prefix[k] = vals[0] ... vals[k-1]; suffix[k] = vals[k] ... vals[n-1]
        dim = vals[0].shape[0]
        prefix = [Matrix.identity(dim)]
        for v in vals:
            prefix.append(mat_mul(prefix[-1], v))
        suffix = [Matrix.identity(dim)] * (n + 1)
        for k in range(n - 1, -1, -1):
            suffix[k] = mat_mul(vals[k], suffix[k + 1])
        total = Matrix.zeros(dim)
        for k in range(n):
            total = total + mat_mul(mat_mul(prefix[k], ders[k]), suffix[k + 1])
        s = self.R.species
        return partial_trace(total, (s, s ** self.L), 0)


def transfer_matrix(spec: ModelSpec, L: int, cap: int | None = None) -> TransferMatrix:
    s = spec.species
    check_capacity(s, L + 1, cap)
    R, K, Kb = model_matrices(spec)
    return TransferMatrix(spec, L, R, K, derive_Ktilde(Kb, R))


def markov_from_transfer(spec: ModelSpec, L: int) -> Matrix:
    """-t'(1)/2 as an exact dense matrix."""
    return transfer_matrix(spec, L).derivative_at_one() * Fraction(-1, 2)


def transfer_normalization(spec: ModelSpec, L: int):
    """Constant c with -t'(1)/2 == c * M, or None if no single constant fits."""
    lhs = markov_from_transfer(spec, L)
    M = assemble_markov(spec, L).to_matrix()
    ratio = None
    n = M.shape[0]
    for i in range(n):
        for j in range(n):
            a, b = lhs[i, j], M[i, j]
            if b == 0:
                if a != 0:
                    return None
                continue
            r = a / b
            if ratio is None:
                ratio = r
            elif r != ratio:
                return None
    return ratio


def check_transfer_commutativity(spec: ModelSpec, L: int, pairs: Sequence | None = None,
                                 n_pairs: int = 5) -> Verdict:
    t = transfer_matrix(spec, L)
    if pairs is None:
        pts = candidate_points()
        pairs = []
        while len(pairs) < n_pairs:
            pairs.append((next(pts), next(pts)))
    tested = skipped = 0
    for x, y in pairs:
        try:
            tx, ty = t.at(x), t.at(y)
        except PoleError:
            skipped += 1
            continue
        tested += 1
        if not (tx @ ty - ty @ tx).is_zero():
            return Verdict("transfer-commute", spec.model, False, tested, (x, y), skipped,
                           {"L": L})
    return Verdict("transfer-commute", spec.model, tested > 0, tested, None, skipped, {"L": L})


def integrability_suite(spec: ModelSpec, n_points: int = DEFAULT_POINTS,
                        lattice_sizes=(1, 2, 3)) -> list:
    """All verdicts for a TASEP or DiSSEP spec."""
    R, K, Kb = model_matrices(spec)
    name = spec.model
    out = [check_yang_baxter(R, name, n_points),
           check_reflection(R, K, name, n_points),
           check_reflection(R, Kb, name, n_points),
           check_unitarity_regularity(R, name),
           check_unitarity_regularity(K, name),
           check_unitarity_regularity(Kb, name)]
    ops = build_local_operators(spec)
    got = local_from_spectral(spec)
    same = (got.m == ops.m and got.B == ops.B and got.Bbar == ops.Bbar)
    out.append(Verdict("local-from-spectral", name, same))
    for L in lattice_sizes:
        out.append(check_transfer_commutativity(spec, L))
        ratio = transfer_normalization(spec, L)
        expected = Fraction(1) if spec.model == "tasep" else Fraction(-1, 2) / spec.kappa
        out.append(Verdict("markov-from-transfer", name, ratio == expected, 0, None, 0,
                           {"L": L, "ratio": None if ratio is None else format_rational(ratio)}))
    return out
