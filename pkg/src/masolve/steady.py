"""Exact stationary states, observables and their closed forms."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb, gcd
from typing import Sequence

from .errors import ConsistencyError, DegenerateParameterError, ReducibilityError, ValidationError
from .exact import format_rational
from .models import (MarkovOperator, ModelSpec, TWO_TASEP_BULK_MIRRORED, apply_generator,
                     assemble_markov, configurations)


# ---------------------------------------------------------------------------
# Null space
# ---------------------------------------------------------------------------


def _integer_rows(M: MarkovOperator) -> list:
    """Scale every row to coprime integers; row scaling leaves the kernel alone."""
    rows = []
    for r in M.rows:
        if not r:
            rows.append({})
            continue
        lcm = 1
        for v in r.values():
            lcm = lcm * v.denominator // gcd(lcm, v.denominator)
        ir = {j: int(v * lcm) for j, v in r.items()}
        g = 0
        for v in ir.values():
            g = gcd(g, v)
        rows.append({j: v // g for j, v in ir.items()})
    return rows


def nullspace_basis(M: MarkovOperator) -> list:
    """Exact kernel basis of a sparse generator.

    Forward elimination on integer rows without fractions: a row is updated
    as ``p * row - q * pivot_row`` and divided by the gcd of its entries.
    Pivots follow the Markowitz rule (smallest ``(row nnz - 1) * (col nnz - 1)``)
    over the rows not yet used.  Back substitution is done in Fractions.
    """
    n = M.dim
    rows = [r for r in _integer_rows(M) if r]
    col_rows: dict = {}
    for i, r in enumerate(rows):
        for j in r:
            col_rows.setdefault(j, set()).add(i)
    active = set(range(len(rows)))
    order = []  # (row index, pivot column)
    while active:
        best = None
        for i in active:
            r = rows[i]
            if not r:
                continue
            rn = len(r) - 1
            for j in r:
                cost = rn * (len(col_rows[j]) - 1)
                key = (cost, len(r), i, j)
                if best is None or key < best:
                    best = key
            if best is not None and best[0] == 0:
                break
        if best is None:
            break
        _, _, i, pc = best
        active.discard(i)
        r = rows[i]
        pv = r[pc]
        order.append((i, pc))
        for j in r:
            col_rows[j].discard(i)
        for k in list(col_rows.get(pc, ())):
            rk = rows[k]
            q = rk[pc]
            new = {}
            for j in set(rk) | set(r):
                v = pv * rk.get(j, 0) - q * r.get(j, 0)
                if v:
                    new[j] = v
            g = 0
            for v in new.values():
                g = gcd(g, v)
                if g == 1:
                    break
            if g > 1:
                new = {j: v // g for j, v in new.items()}
            for j in rk:
                if j not in new:
                    col_rows[j].discard(k)
            for j in new:
                if j not in rk:
                    col_rows.setdefault(j, set()).add(k)
            rows[k] = new
    pivot_cols = {c for _, c in order}
    free = [j for j in range(n) if j not in pivot_cols]
    basis = []
    for f in free:
        vec = [Fraction(0)] * n
        vec[f] = Fraction(1)
        for i, c in reversed(order):
            r = rows[i]
            acc = Fraction(0)
            for j, v in r.items():
                if j != c and vec[j]:
                    acc += v * vec[j]
            vec[c] = -acc / r[c]
        basis.append(vec)
    return basis


@dataclass(frozen=True)
class StationaryDistribution:
    L: int
    species: int
    probs: tuple
    truncation: int | None = None

    def __post_init__(self):
        if len(self.probs) != self.species ** self.L:
            raise ValidationError("probability vector has the wrong length")

    def __len__(self):
        return len(self.probs)

    def __getitem__(self, config) -> Fraction:
        if isinstance(config, int):
            return self.probs[config]
        idx = 0
        for t in config:
            idx = idx * self.species + t
        return self.probs[idx]

    def items(self):
        return zip(configurations(self.L, self.species), self.probs)

    def marginal(self, fixed: dict) -> Fraction:
        """Probability that ``config[site - 1] == value`` for every ``site: value`` in ``fixed``."""
        for site in fixed:
            if not 1 <= site <= self.L:
                raise ValidationError(f"site {site} outside 1..{self.L}")
        return sum((p for c, p in self.items()
                    if all(c[s - 1] == v for s, v in fixed.items())), Fraction(0))

    def floats(self) -> list:
        return [float(p) for p in self.probs]

    def to_dict(self) -> dict:
        out = {"L": self.L, "species": self.species,
               "probabilities": {"".join(map(str, c)): _wire(p) for c, p in self.items()}}
        if self.truncation is not None:
            out["N"] = self.truncation
        return out


def normalize(vec: Sequence, L: int, s: int) -> StationaryDistribution:
    total = sum(vec, Fraction(0))
    if total == 0:
        raise ConsistencyError("null vector sums to zero")
    return StationaryDistribution(L, s, tuple(Fraction(v) / total for v in vec))


def stationary(spec: ModelSpec, L: int, cap: int | None = None) -> StationaryDistribution:
    """Unique normalized null vector of the generator (exact)."""
    M = assemble_markov(spec, L, cap)
    basis = nullspace_basis(M)
    if len(basis) != 1:
        raise ReducibilityError(len(basis))
    dist = normalize(basis[0], L, spec.species)
    if any(p < 0 for p in dist.probs):
        raise ConsistencyError("stationary vector has negative entries")
    if any(apply_generator(M, dist.probs)):
        raise ConsistencyError("M p != 0 for the computed null vector")
    return dist


# ---------------------------------------------------------------------------
# Microscopic observables
# ---------------------------------------------------------------------------


def density(p: StationaryDistribution, site: int, species: int = 1) -> Fraction:
    if not 1 <= site <= p.L:
        raise ValidationError(f"site {site} outside 1..{p.L}")
    if not 0 <= species < p.species:
        raise ValidationError(f"species {species} outside 0..{p.species - 1}")
    return p.marginal({site: species})


def pair_probability(p: StationaryDistribution, site: int, left_value: int,
                     right_value: int) -> Fraction:
    """P(tau_site = left_value, tau_{site+1} = right_value)."""
    if not 1 <= site < p.L:
        raise ValidationError(f"bond ({site}, {site + 1}) outside the lattice")
    return p.marginal({site: left_value, site + 1: right_value})


def tasep_current(p: StationaryDistribution, alpha, beta) -> Fraction:
    """Bond current P(10), checked equal on every bond and to both boundary fluxes."""
    alpha, beta = Fraction(alpha), Fraction(beta)
    j_in = alpha * p.marginal({1: 0})
    j_out = beta * p.marginal({p.L: 1})
    bonds = [pair_probability(p, i, 1, 0) for i in range(1, p.L)]
    if j_in != j_out or any(b != j_in for b in bonds):
        raise ConsistencyError(f"TASEP currents disagree: in={j_in}, out={j_out}, bonds={bonds}")
    return j_in


def dissep_lattice_current(p: StationaryDistribution, kappa, site: int) -> Fraction:
    return Fraction(kappa) ** 2 * (pair_probability(p, site, 1, 0) - pair_probability(p, site, 0, 1))


def dissep_evaporation_current(p: StationaryDistribution, site: int) -> Fraction:
    return pair_probability(p, site, 1, 1) - pair_probability(p, site, 0, 0)


def two_tasep_currents(p: StationaryDistribution, site: int) -> tuple:
    """Species currents across bond (site, site+1) for the {10->01, 20->02, 21->12} bulk."""
    j1 = pair_probability(p, site, 1, 0) - pair_probability(p, site, 2, 1)
    j2 = pair_probability(p, site, 2, 0) + pair_probability(p, site, 2, 1)
    return j1, j2


# ---------------------------------------------------------------------------
# Closed forms
# ---------------------------------------------------------------------------


def _dissep_den(spec: ModelSpec, L: int) -> Fraction:
    den = 1 - spec.a * spec.b * spec.phi ** (2 * L - 2)
    if den == 0:
        raise DegenerateParameterError("1 - a b phi^(2L-2) vanishes")
    return den


def dissep_density_closed(spec: ModelSpec, L: int, i: int) -> Fraction:
    if spec.model != "dissep":
        raise ValidationError("closed-form density is for the DiSSEP")
    if not 1 <= i <= L:
        raise ValidationError(f"site {i} outside 1..{L}")
    a, b, c, d, f = spec.a, spec.b, spec.c, spec.d, spec.phi
    num = c * f ** (i - 1) + a * d * f ** (L + i - 2) + d * f ** (L - i) + b * c * f ** (2 * L - i - 1)
    return Fraction(1, 2) - num / (2 * _dissep_den(spec, L))


def dissep_currents_closed(spec: ModelSpec, L: int, i: int) -> tuple:
    """(lattice current i -> i+1, evaporation current at (i, i+1))."""
    if spec.model != "dissep":
        raise ValidationError("closed-form currents are for the DiSSEP")
    if not 1 <= i <= L - 1:
        raise ValidationError(f"bond index {i} outside 1..{L - 1}")
    a, b, c, d, f, k = spec.a, spec.b, spec.c, spec.d, spec.phi, spec.kappa
    den = _dissep_den(spec, L)
    lat = k * k / (k + 1) * (d * f ** (L - i - 1) + b * c * f ** (2 * L - i - 2)
                             - c * f ** (i - 1) - a * d * f ** (L + i - 2)) / den
    eva = -k / (k + 1) * (c * f ** (i - 1) + a * d * f ** (L + i - 2)
                          + d * f ** (L - i - 1) + b * c * f ** (2 * L - i - 2)) / den
    return lat, eva


def catalan(n: int) -> int:
    return comb(2 * n, n) // (n + 1)


def two_tasep_partition_factor(L: int) -> int:
    """Z_L / <<W|V>> = (2L+1) C_L C_{L+1} at alpha = 1/2, beta = 1."""
    return (2 * L + 1) * catalan(L) * catalan(L + 1)


def two_tasep_densities_closed(L: int, k: int) -> tuple:
    """(black, white) density at site k for L2-R3 with alpha = 1/2, beta = 1."""
    if not 1 <= k <= L:
        raise ValidationError(f"site {k} outside 1..{L}")
    cl1 = catalan(L + 1)
    n1 = sum(Fraction((L - i + 1) * catalan(i) * catalan(L - i), L + 2) for i in range(k, L + 1))
    n2 = sum(Fraction((i + 1) * catalan(i) * catalan(L - i), L + 2) for i in range(k, L + 1))
    return n1 / cl1, n2 / cl1


def two_tasep_currents_closed(L: int) -> tuple:
    return Fraction(1, 2 * (2 * L + 1)), Fraction(L + 1, 2 * (2 * L + 1))


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------


@dataclass
class ObservableReport:
    """Densities per (site, species) and currents per bond.

    ``lattice_currents[species]`` is the list over bonds 1..L-1;
    ``evaporation_currents`` is only filled for the DiSSEP.
    """

    model: str
    L: int
    source: str
    densities: dict = field(default_factory=dict)
    lattice_currents: dict = field(default_factory=dict)
    evaporation_currents: list = field(default_factory=list)

    def rows(self) -> list:
        out = []
        for (site, sp_), v in sorted(self.densities.items()):
            out.append({"site": site, "species": sp_, "quantity": "density", "value": v})
        for sp_, vals in sorted(self.lattice_currents.items()):
            for i, v in enumerate(vals, start=1):
                out.append({"site": i, "species": sp_, "quantity": "current", "value": v})
        for i, v in enumerate(self.evaporation_currents, start=1):
            out.append({"site": i, "species": 1, "quantity": "evaporation", "value": v})
        return out

    def to_dict(self) -> dict:
        return {"model": self.model, "L": self.L, "source": self.source,
                "rows": [{**r, "value": _wire(r["value"])} for r in self.rows()]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=["site", "species", "quantity", "value"])
        w.writeheader()
        for r in self.rows():
            w.writerow({**r, "value": _wire(r["value"])})
        return buf.getvalue()


def _wire(v):
    if isinstance(v, Fraction):
        return format_rational(v)
    if isinstance(v, float):
        return float(f"{v:.17g}")
    return v


def observables(spec: ModelSpec, p: StationaryDistribution) -> ObservableReport:
    """Microscopic observables computed from an exact stationary distribution."""
    L = p.L
    rep = ObservableReport(spec.model, L, "nullspace")
    for site in range(1, L + 1):
        for k in range(1, p.species):
            rep.densities[(site, k)] = density(p, site, k)
    bonds = range(1, L)
    if spec.model == "tasep":
        rep.lattice_currents[1] = [pair_probability(p, i, 1, 0) for i in bonds]
    elif spec.model == "dissep":
        rep.lattice_currents[1] = [dissep_lattice_current(p, spec.kappa, i) for i in bonds]
        rep.evaporation_currents = [dissep_evaporation_current(p, i) for i in bonds]
    else:
        pairs = [two_tasep_currents(p, i) for i in bonds]
        rep.lattice_currents[1] = [j[0] for j in pairs]
        rep.lattice_currents[2] = [j[1] for j in pairs]
    return rep


def closed_form_observables(spec: ModelSpec, L: int) -> ObservableReport:
    """Closed-form observables where they exist (DiSSEP; 2-TASEP at L2-R3, alpha=1/2, beta=1)."""
    if spec.model == "dissep":
        rep = ObservableReport("dissep", L, "closed-form")
        for i in range(1, L + 1):
            rep.densities[(i, 1)] = dissep_density_closed(spec, L, i)
        cur = [dissep_currents_closed(spec, L, i) for i in range(1, L)]
        rep.lattice_currents[1] = [c[0] for c in cur]
        rep.evaporation_currents = [c[1] for c in cur]
        return rep
    if spec.model == "2tasep":
        return twotasep_closed_observables(L, spec)
    raise ValidationError("no closed forms for the TASEP observables; use the null space")


def twotasep_closed_observables(L: int, spec: ModelSpec | None = None) -> ObservableReport:
    if spec is not None and not (spec.model == "2tasep" and spec.left == "L2" and spec.right == "R3"
                                 and spec.alpha == Fraction(1, 2) and spec.beta == 1):
        raise ValidationError("2-TASEP closed forms need L2-R3 with alpha = 1/2, beta = 1")
    rep = ObservableReport("2tasep", L, "closed-form")
    for k in range(1, L + 1):
        n1, n2 = two_tasep_densities_closed(L, k)
        rep.densities[(k, 1)] = n1
        rep.densities[(k, 2)] = n2
    j1, j2 = two_tasep_currents_closed(L)
    rep.lattice_currents[1] = [j1] * (L - 1)
    rep.lattice_currents[2] = [j2] * (L - 1)
    return rep


def two_tasep_check(L: int) -> dict:
    """Compare L2-R3 null-space observables with the Catalan closed forms.

    The primary bulk convention is tried first; if it disagrees, the mirrored
    exchange rule is tried once and the outcome records which one matched.
    """
    closed = twotasep_closed_observables(L)
    for bulk_name, spec in (("21->12", ModelSpec.two_tasep("L2", "R3")),
                            ("12->21", ModelSpec.two_tasep("L2", "R3",
                                                           bulk=TWO_TASEP_BULK_MIRRORED))):
        exact = observables(spec, stationary(spec, L))
        ok = (exact.densities == closed.densities
              and exact.lattice_currents == closed.lattice_currents)
        if ok:
            return {"L": L, "bulk": bulk_name, "pass": True}
    return {"L": L, "bulk": None, "pass": False}


def proportionality(closed: Sequence, micro: Sequence):
    """Single constant r with micro == r * closed, or None (0/0 pairs are skipped)."""
    r = None
    for c, m in zip(closed, micro):
        if c == 0:
            if m != 0:
                return None
            continue
        q = Fraction(m) / Fraction(c)
        if r is None:
            r = q
        elif q != r:
            return None
    return r
