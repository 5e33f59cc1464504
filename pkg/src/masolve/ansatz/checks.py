"""Spectral-parameter relations, telescoping identities and mutation coverage.

The exchange relation ``R12(x/y) A1(x) A2(y) = A2(y) A1(x)`` is checked with
coefficients kept as rational functions of ``x`` while ``y`` runs over a
rational grid longer than the y-degree bound, so a pass is an identity in
both variables.  Boundary relations for TASEP are eigenvalue substitutions
and are checked as identities in ``x``; for DiSSEP they are checked on the
truncated representation at sampled ``x``.
"""

from __future__ import annotations

from fractions import Fraction

from ..errors import PoleError, ValidationError
from ..exact import RationalFunction, X, compose_matrix
from ..integrability import (DEFAULT_POINTS, SpectralKMatrix, SpectralRMatrix, Verdict,
                             candidate_points, model_matrices)
from ..models import ModelSpec, assemble_markov, build_local_operators
from .representation import (build_truncated_rep, dissep_ma_steady, _positive_kappa)
from .tasep import tasep_ma_steady
from .words import AlgebraWord, ReductionSystem, dissep_system, tasep_system

GZ_TRUNCATION = 8


def _gen(name: str, coef=Fraction(1)) -> AlgebraWord:
    return AlgebraWord.monomial((name,), coef)


def spectral_vector(model: str, x) -> list:
    """Components of A(x); ``x`` may be a Fraction or a RationalFunction."""
    one = Fraction(1)
    inv = one / x
    if model == "tasep":
        return [_gen("E") + (x - 1), _gen("D") + (inv - 1)]
    if model == "dissep":
        return [_gen("G1", x) + _gen("G2") + _gen("G3", inv),
                _gen("G1", -x) + _gen("G2") + _gen("G3", -inv)]
    raise ValidationError(f"no spectral vector for model {model}")


def _canonical(spec: ModelSpec) -> ModelSpec:
    return _positive_kappa(spec) if spec.model == "dissep" else spec


def default_system(spec: ModelSpec) -> ReductionSystem:
    if spec.model == "tasep":
        return tasep_system()
    if spec.model == "dissep":
        return dissep_system(_positive_kappa(spec).phi)
    raise ValidationError("rewriting systems exist for tasep and dissep only")


# ---------------------------------------------------------------------------
# Zamolodchikov-Faddeev
# ---------------------------------------------------------------------------


def zf_residual(R: SpectralRMatrix, model: str, system: ReductionSystem, y) -> list:
    """Reduced ``LHS - RHS`` components, symbolic in x, at a fixed y."""
    Ax = spectral_vector(model, RationalFunction.x())
    Ay = spectral_vector(model, Fraction(y))
    Rxy = compose_matrix(R.matrix, X / Fraction(y))
    s = len(Ax)
    out = []
    for i in range(s):
        for j in range(s):
            lhs = AlgebraWord()
            for k in range(s):
                for l in range(s):
                    r = Rxy[i * s + j, k * s + l]
                    if not r.is_zero():
                        lhs = lhs + r * (Ax[k] * Ay[l])
            out.append(system.reduce(lhs - Ay[j] * Ax[i]))
    return out


def check_zf(spec: ModelSpec, system: ReductionSystem | None = None,
             n_points: int = DEFAULT_POINTS) -> Verdict:
    spec = _canonical(spec)
    R = model_matrices(spec)[0]
    system = system or default_system(spec)
    bound = 2 * (R.degree + 2)
    n = max(n_points, bound + 1)
    pts = candidate_points()
    for k in range(n):
        y = next(pts)
        res = zf_residual(R, spec.model, system, y)
        if any(not r.is_zero() for r in res):
            bad = next(idx for idx, r in enumerate(res) if not r.is_zero())
            return Verdict("zf", spec.model, False, k + 1, (y,),
                           detail={"component": bad, "residual": str(res[bad])[:200]})
    return Verdict("zf", spec.model, True, n, detail={"system": system.name})


# ---------------------------------------------------------------------------
# Ghoshal-Zamolodchikov
# ---------------------------------------------------------------------------


def _tasep_boundary_apply(w: AlgebraWord, system: ReductionSystem, side: str, eig) -> AlgebraWord:
    """Strip E from the left (``<W|``) or D from the right (``|V>``) of each normal word."""
    out = {}
    for mono, c in system.reduce(w).items():
        mono = list(mono)
        k = 0
        if side == "left":
            while mono and mono[0] == "E":
                mono.pop(0)
                k += 1
        else:
            while mono and mono[-1] == "D":
                mono.pop()
                k += 1
        key = tuple(mono)
        out[key] = out.get(key, 0) + c * eig ** k
    return AlgebraWord(out)


def _tasep_gz(spec, K, Kbar, system, left_eig, right_eig) -> dict:
    x = RationalFunction.x()
    Ax, Ainv = spectral_vector("tasep", x), spectral_vector("tasep", Fraction(1) / x)
    le = Fraction(1) / spec.alpha if left_eig is None else Fraction(left_eig)
    re_ = Fraction(1) / spec.beta if right_eig is None else Fraction(right_eig)
    out = {}
    for side, mat, eig in (("left", K.matrix, le), ("right", Kbar.matrix, re_)):
        ok = True
        for i in range(2):
            w = Ax[i] - sum((mat[i, j] * Ainv[j] for j in range(2)), AlgebraWord())
            if not _tasep_boundary_apply(w, system, side, eig).is_zero():
                ok = False
        out[side] = ok
    return out


def _combo(word: AlgebraWord) -> dict:
    combo = {}
    for mono, c in word.items():
        if len(mono) != 1:
            raise ValidationError("boundary relation expects a linear combination of generators")
        combo[mono[0]] = combo.get(mono[0], 0) + c
    return combo


def _dissep_gz(spec, K, Kbar, n_points, N) -> tuple:
    rep = build_truncated_rep(spec, N)
    pts = candidate_points()
    bound = 2 * (max(K.degree, Kbar.degree) + 2)
    n = max(n_points, bound + 1)
    out = {"left": True, "right": True}
    used = 0
    witness = None
    while used < n:
        x0 = next(pts)
        try:
            Km, Kbm = K.at(x0), Kbar.at(x0)
        except PoleError:
            continue
        used += 1
        Ax, Ainv = spectral_vector("dissep", x0), spectral_vector("dissep", 1 / x0)
        for i in range(2):
            left = rep.left_combo(rep.w, _combo(Ax[i]))
            right = rep.right_combo(rep.v, _combo(Ax[i]))
            for j in range(2):
                left = left - Km[i, j] * rep.left_combo(rep.w, _combo(Ainv[j]))
                right = right - Kbm[i, j] * rep.right_combo(rep.v, _combo(Ainv[j]))
            if any(v != 0 for v in rep.block(left).ravel()):
                out["left"] = False
                witness = witness or (x0,)
            if any(v != 0 for v in rep.block(right).ravel()):
                out["right"] = False
                witness = witness or (x0,)
    return out, used, witness


def check_gz(spec: ModelSpec, system: ReductionSystem | None = None, K: SpectralKMatrix | None = None,
             Kbar: SpectralKMatrix | None = None, left_eigenvalue=None, right_eigenvalue=None,
             n_points: int = DEFAULT_POINTS, N: int = GZ_TRUNCATION) -> Verdict:
    """Both boundary relations; ``detail`` records each side separately.

    The eigenvalue overrides only apply to TASEP, where they replace 1/alpha
    and 1/beta in the boundary substitution.
    """
    spec = _canonical(spec)
    _, K0, Kb0 = model_matrices(spec)
    K, Kbar = K or K0, Kbar or Kb0
    if spec.model == "tasep":
        sides = _tasep_gz(spec, K, Kbar, system or default_system(spec), left_eigenvalue, right_eigenvalue)
        return Verdict("gz", "tasep", all(sides.values()), 0, detail=sides)
    sides, used, witness = _dissep_gz(spec, K, Kbar, n_points, N)
    return Verdict("gz", "dissep", all(sides.values()), used, witness, detail=sides)


# ---------------------------------------------------------------------------
# Telescoping
# ---------------------------------------------------------------------------


def _site_words(model: str) -> list:
    if model == "tasep":
        return [_gen("E"), _gen("D")]
    return [_gen("G2") + _gen("G1") + _gen("G3"), _gen("G2") - _gen("G1") - _gen("G3")]


def hat_vector(spec: ModelSpec) -> list:
    """The companion vector in the local divergence condition.

    TASEP: (1, -1).  DiSSEP: -2 kappa (G1 - G3) (1, -1); the factor comes
    from the rate normalization of the bulk operator relative to the
    transfer-matrix derivative.
    """
    if spec.model == "tasep":
        return [AlgebraWord.scalar(Fraction(1)), AlgebraWord.scalar(Fraction(-1))]
    lam = -2 * abs(spec.kappa)
    g = (_gen("G1") - _gen("G3")) * lam
    return [g, -g]


def bulk_divergence_residual(spec: ModelSpec, system: ReductionSystem | None = None) -> list:
    """Reduced components of m (A x A) - (Ahat x A - A x Ahat)."""
    system = system or default_system(spec)
    m = build_local_operators(spec).m
    A, Ah = _site_words(spec.model), hat_vector(spec)
    out = []
    for i in range(2):
        for j in range(2):
            w = AlgebraWord()
            for k in range(2):
                for l in range(2):
                    c = m[i * 2 + j, k * 2 + l]
                    if c:
                        w = w + c * (A[k] * A[l])
            out.append(system.reduce(w - (Ah[i] * A[j] - A[i] * Ah[j])))
    return out


def _boundary_ok_tasep(spec, system) -> dict:
    ops = build_local_operators(spec)
    A, Ah = _site_words("tasep"), hat_vector(spec)
    le, re_ = Fraction(1) / spec.alpha, Fraction(1) / spec.beta
    left = right = True
    for i in range(2):
        wl = sum((ops.B[i, j] * A[j] for j in range(2)), AlgebraWord()) + Ah[i]
        wr = sum((ops.Bbar[i, j] * A[j] for j in range(2)), AlgebraWord()) - Ah[i]
        left &= _tasep_boundary_apply(wl, system, "left", le).is_zero()
        right &= _tasep_boundary_apply(wr, system, "right", re_).is_zero()
    return {"left": left, "right": right}


def _boundary_ok_dissep(spec, N, tol) -> dict:
    ops = build_local_operators(spec)
    rep = build_truncated_rep(spec, N)
    A, Ah = _site_words("dissep"), hat_vector(spec)
    left = right = True
    for i in range(2):
        wl = sum((ops.B[i, j] * A[j] for j in range(2)), AlgebraWord()) + Ah[i]
        wr = sum((ops.Bbar[i, j] * A[j] for j in range(2)), AlgebraWord()) - Ah[i]
        left &= not any(v != 0 for v in rep.block(rep.left_combo(rep.w, _combo(wl))).ravel())
        right &= not any(v != 0 for v in rep.block(rep.right_combo(rep.v, _combo(wr))).ravel())
    return {"left": left, "right": right}


def _markov_residual(spec: ModelSpec, L: int, probs) -> float:
    M = assemble_markov(spec, L)
    worst = 0
    for row in M.rows:
        acc = sum(v * probs[j] for j, v in row.items())
        worst = max(worst, abs(acc))
    return worst


def check_telescoping(spec: ModelSpec, L: int, N: int = GZ_TRUNCATION, tol: float = 1e-10) -> Verdict:
    """Bulk and boundary divergence identities, then M p = 0 for the MA vector."""
    if spec.model not in ("tasep", "dissep"):
        raise ValidationError("telescoping is implemented for tasep and dissep")
    system = default_system(spec)
    bulk = all(r.is_zero() for r in bulk_divergence_residual(spec, system))
    if spec.model == "tasep":
        bnd = _boundary_ok_tasep(spec, system)
        p = tasep_ma_steady(spec.alpha, spec.beta, L)
        res = _markov_residual(spec, L, p.probs)
        stationary_ok = res == 0
    else:
        bnd = _boundary_ok_dissep(spec, N, tol)
        p = dissep_ma_steady(spec, L, tol=tol)
        res = _markov_residual(spec, L, [float(v) for v in p.probs])
        stationary_ok = res <= tol
    detail = {"bulk": bulk, "left": bnd["left"], "right": bnd["right"],
              "stationary": stationary_ok, "max_residual": float(res), "L": L}
    return Verdict("telescoping", spec.model, bulk and all(bnd.values()) and stationary_ok,
                   2 ** L, detail=detail)


# ---------------------------------------------------------------------------
# Mutations
# ---------------------------------------------------------------------------


def mutation_suite(tasep_spec: ModelSpec, dissep_spec: ModelSpec) -> list:
    """Six single-rule corruptions; each must flip the verdict of the check it targets."""
    one = Fraction(1)
    ts = tasep_system()
    phi = _positive_kappa(dissep_spec).phi
    ds = dissep_system(phi)
    cases = [
        ("tasep bulk DE -> D + 2E", "zf",
         lambda: check_zf(tasep_spec),
         lambda: check_zf(tasep_spec, ts.mutated(("D", "E"), ((one, ("D",)), (2 * one, ("E",)))))),
        ("tasep left eigenvalue 2/alpha", "gz",
         lambda: check_gz(tasep_spec),
         lambda: check_gz(tasep_spec, left_eigenvalue=2 / tasep_spec.alpha)),
        ("tasep right eigenvalue 2/beta", "gz",
         lambda: check_gz(tasep_spec),
         lambda: check_gz(tasep_spec, right_eigenvalue=2 / tasep_spec.beta)),
        ("dissep G2G1 -> (phi + 1) G1G2", "zf",
         lambda: check_zf(dissep_spec),
         lambda: check_zf(dissep_spec, ds.mutated(("G2", "G1"), ((phi + 1, ("G1", "G2")),)))),
        ("dissep G3G1 -> 2 G1G3", "zf",
         lambda: check_zf(dissep_spec),
         lambda: check_zf(dissep_spec, ds.mutated(("G3", "G1"), ((2 * one, ("G1", "G3")),)))),
        ("dissep G3G2 -> (phi + 1) G2G3", "zf",
         lambda: check_zf(dissep_spec),
         lambda: check_zf(dissep_spec, ds.mutated(("G3", "G2"), ((phi + 1, ("G2", "G3")),)))),
    ]
    out = []
    baselines = {}
    for idx, (name, check, base, mutated) in enumerate(cases):
        key = (check, "tasep" if idx < 3 else "dissep")
        if key not in baselines:
            baselines[key] = base().passed
        b, m = baselines[key], mutated().passed
        out.append({"mutation": name, "check": check, "baseline": b, "mutated": m,
                    "flipped": b and not m})
    return out


__all__ = ["spectral_vector", "check_zf", "check_gz", "check_telescoping", "hat_vector",
           "bulk_divergence_residual", "mutation_suite", "zf_residual", "default_system"]
