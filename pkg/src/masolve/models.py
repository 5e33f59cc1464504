"""Process definitions, local jump operators and the global Markov generator.

Three families are supported: the open TASEP, the dissipative SSEP (DiSSEP)
and the two-species TASEP with one of the integrable boundary choices
``L1..L4`` / ``R1..R4``.  Every rate is an exact :class:`~fractions.Fraction`.

Configurations are indexed with site 1 as the most significant base-``s``
digit, so for ``L = 2`` the TASEP ordering is ``00, 01, 10, 11``.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from itertools import product
from typing import Iterator, Sequence

from .errors import CapacityError, DimensionError, ValidationError
from .exact import Matrix, format_rational, parse_rational

DEFAULT_CAP = 20000

MODELS = ("tasep", "dissep", "2tasep")
LEFT_BOUNDARIES = ("L1", "L2", "L3", "L4")
RIGHT_BOUNDARIES = ("R1", "R2", "R3", "R4")

HOLE, BLACK, WHITE = 0, 1, 2

# 2-species bulk: hops 10->01, 20->02 and the exchange 21->12, all at rate 1.
TWO_TASEP_BULK = (((1, 0), (0, 1)), ((2, 0), (0, 2)), ((2, 1), (1, 2)))
# Mirrored exchange convention kept as a fallback for the closed-form checks.
TWO_TASEP_BULK_MIRRORED = (((1, 0), (0, 1)), ((2, 0), (0, 2)), ((1, 2), (2, 1)))


def size_cap() -> int:
    """Maximum configuration-space dimension (env ``MASOLVE_CAP`` overrides)."""
    raw = os.environ.get("MASOLVE_CAP")
    if raw is None:
        return DEFAULT_CAP
    try:
        cap = int(raw)
    except ValueError:
        raise ValidationError(f"MASOLVE_CAP must be an integer, got {raw!r}") from None
    if cap < 1:
        raise ValidationError("MASOLVE_CAP must be positive")
    return cap


def _q(v) -> Fraction:
    return parse_rational(v) if isinstance(v, str) else Fraction(v)


@dataclass(frozen=True)
class ModelSpec:
    """Which process and its rates.

    Use the :meth:`tasep`, :meth:`dissep` and :meth:`two_tasep` constructors.
    ``bulk`` is only read for the two-species model.
    """

    model: str
    alpha: Fraction = Fraction(1)
    beta: Fraction = Fraction(1)
    gamma: Fraction = Fraction(0)
    delta: Fraction = Fraction(0)
    kappa: Fraction = Fraction(1)
    left: str | None = None
    right: str | None = None
    mu: Fraction = Fraction(1)
    nu: Fraction = Fraction(1)
    bulk: tuple = field(default=TWO_TASEP_BULK, compare=True)

    def __post_init__(self):
        if self.model not in MODELS:
            raise ValidationError(f"unknown model {self.model!r}; expected one of {MODELS}")
        for name in ("alpha", "beta", "gamma", "delta", "kappa", "mu", "nu"):
            object.__setattr__(self, name, _q(getattr(self, name)))
        self.validate()

    # -- constructors -------------------------------------------------------
    @classmethod
    def tasep(cls, alpha, beta) -> "ModelSpec":
        return cls("tasep", alpha=alpha, beta=beta)

    @classmethod
    def dissep(cls, alpha, beta, gamma, delta, kappa) -> "ModelSpec":
        return cls("dissep", alpha=alpha, beta=beta, gamma=gamma, delta=delta, kappa=kappa)

    @classmethod
    def two_tasep(cls, left="L2", right="R3", alpha=Fraction(1, 2), beta=1, mu=1, nu=1,
                  bulk=TWO_TASEP_BULK) -> "ModelSpec":
        return cls("2tasep", alpha=alpha, beta=beta, left=left, right=right, mu=mu, nu=nu,
                   bulk=tuple(bulk))

    def validate(self) -> None:
        if self.model == "2tasep":
            if self.left not in LEFT_BOUNDARIES:
                raise ValidationError(f"left boundary must be one of {LEFT_BOUNDARIES}")
            if self.right not in RIGHT_BOUNDARIES:
                raise ValidationError(f"right boundary must be one of {RIGHT_BOUNDARIES}")
            used = {"alpha": self.alpha, "beta": self.beta}
            if self.left == "L1":
                used = {"mu": self.mu, "beta": self.beta}
            if self.right == "R1":
                used.pop("beta", None)
                used["nu"] = self.nu
            if self.left == "L2":
                used["1-alpha"] = 1 - self.alpha
            if self.right == "R2":
                used["1-beta"] = 1 - self.beta
        elif self.model == "tasep":
            used = {"alpha": self.alpha, "beta": self.beta}
        else:
            if self.kappa == 0:
                raise ValidationError("DiSSEP needs kappa != 0")
            used = {"alpha": self.alpha, "beta": self.beta, "gamma": self.gamma,
                    "delta": self.delta}
        for name, v in used.items():
            if v < 0:
                raise ValidationError(f"rate {name} = {format_rational(v)} is negative")

    @property
    def species(self) -> int:
        return 3 if self.model == "2tasep" else 2

    # -- DiSSEP derived parameters -----------------------------------------
    @cached_property
    def phi(self) -> Fraction:
        return (self.kappa - 1) / (self.kappa + 1)

    @cached_property
    def a(self) -> Fraction:
        k, al, ga = self.kappa, self.alpha, self.gamma
        return (2 * k - al - ga) / (2 * k + al + ga)

    @cached_property
    def b(self) -> Fraction:
        k, be, de = self.kappa, self.beta, self.delta
        return (2 * k - de - be) / (2 * k + de + be)

    @cached_property
    def c(self) -> Fraction:
        k, al, ga = self.kappa, self.alpha, self.gamma
        return (ga - al) / (2 * k + al + ga)

    @cached_property
    def d(self) -> Fraction:
        k, be, de = self.kappa, self.beta, self.delta
        return (be - de) / (2 * k + de + be)

    # -- serialization ------------------------------------------------------
    def rates(self) -> dict:
        if self.model == "tasep":
            names = ("alpha", "beta")
        elif self.model == "dissep":
            names = ("alpha", "beta", "gamma", "delta", "kappa")
        else:
            names = ("alpha", "beta", "mu", "nu")
        return {n: format_rational(getattr(self, n)) for n in names}

    def to_dict(self) -> dict:
        out = {"model": self.model, "rates": self.rates()}
        if self.model == "2tasep":
            out["left"], out["right"] = self.left, self.right
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, doc: dict) -> "ModelSpec":
        if not isinstance(doc, dict) or "model" not in doc:
            raise ValidationError("model spec must be an object with a 'model' key")
        model = doc["model"]
        rates = doc.get("rates", {})
        if not isinstance(rates, dict):
            raise ValidationError("'rates' must be an object")
        allowed = {"alpha", "beta", "gamma", "delta", "kappa", "mu", "nu"}
        unknown = set(rates) - allowed
        if unknown:
            raise ValidationError(f"unknown rate names: {sorted(unknown)}")
        kw = {k: parse_rational(str(v)) for k, v in rates.items()}
        if model == "2tasep":
            kw.setdefault("alpha", Fraction(1, 2))
            return cls.two_tasep(left=doc.get("left", "L2"), right=doc.get("right", "R3"), **kw)
        return cls(model, **kw)

    @classmethod
    def from_json(cls, text: str) -> "ModelSpec":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"invalid model JSON: {exc}") from None
        return cls.from_dict(doc)


@dataclass(frozen=True)
class LocalOperators:
    """Bulk operator ``m`` (s^2 x s^2) and boundary operators ``B``, ``Bbar`` (s x s).

    Entry ``[new, old]`` is the rate of ``old -> new``; columns sum to zero.
    """

    species: int
    m: Matrix
    B: Matrix
    Bbar: Matrix

    def check_generator(self) -> None:
        for name, mat in (("m", self.m), ("B", self.B), ("Bbar", self.Bbar)):
            if any(v != 0 for v in mat.column_sums()):
                raise ValidationError(f"{name} has a nonzero column sum")
            n = mat.shape[0]
            if any(mat[i, j] < 0 for i in range(n) for j in range(n) if i != j):
                raise ValidationError(f"{name} has a negative off-diagonal rate")


def _generator_from_moves(s: int, moves) -> Matrix:
    """Build an s x s generator from ``(old, new, rate)`` triples."""
    g = [[Fraction(0)] * s for _ in range(s)]
    for old, new, rate in moves:
        g[new][old] += rate
        g[old][old] -= rate
    return Matrix(g)


def _pair_generator(s: int, moves) -> Matrix:
    n = s * s
    g = [[Fraction(0)] * n for _ in range(n)]
    for (a, b), (c, d), rate in moves:
        old, new = a * s + b, c * s + d
        g[new][old] += rate
        g[old][old] -= rate
    return Matrix(g)


def _two_tasep_left(spec: ModelSpec):
    al = spec.alpha
    return {
        "L1": [(0, 1, spec.mu)],
        "L2": [(0, 1, 1 - al), (0, 2, al), (1, 2, al)],
        "L3": [(0, 2, al), (1, 2, al)],
        "L4": [(0, 2, al)],
    }[spec.left]


def _two_tasep_right(spec: ModelSpec):
    be = spec.beta
    return {
        "R1": [(2, 1, spec.nu)],
        "R2": [(1, 0, be), (2, 0, be), (2, 1, 1 - be)],
        "R3": [(1, 0, be), (2, 0, be)],
        "R4": [(2, 0, be)],
    }[spec.right]


def build_local_operators(spec: ModelSpec) -> LocalOperators:
    spec.validate()
    one = Fraction(1)
    if spec.model == "tasep":
        B = _generator_from_moves(2, [(0, 1, spec.alpha)])
        Bbar = _generator_from_moves(2, [(1, 0, spec.beta)])
        m = _pair_generator(2, [((1, 0), (0, 1), one)])
        ops = LocalOperators(2, m, B, Bbar)
    elif spec.model == "dissep":
        k2 = spec.kappa ** 2
        B = _generator_from_moves(2, [(0, 1, spec.alpha), (1, 0, spec.gamma)])
        Bbar = _generator_from_moves(2, [(1, 0, spec.beta), (0, 1, spec.delta)])
        m = _pair_generator(2, [((1, 0), (0, 1), k2), ((0, 1), (1, 0), k2),
                                ((0, 0), (1, 1), one), ((1, 1), (0, 0), one)])
        ops = LocalOperators(2, m, B, Bbar)
    else:
        B = _generator_from_moves(3, _two_tasep_left(spec))
        Bbar = _generator_from_moves(3, _two_tasep_right(spec))
        m = _pair_generator(3, [(old, new, one) for old, new in spec.bulk])
        ops = LocalOperators(3, m, B, Bbar)
    ops.check_generator()
    return ops


# ---------------------------------------------------------------------------
# Configurations and the global generator
# ---------------------------------------------------------------------------


def config_index(config: Sequence[int], s: int) -> int:
    idx = 0
    for t in config:
        if not 0 <= t < s:
            raise ValidationError(f"site value {t} outside 0..{s - 1}")
        idx = idx * s + t
    return idx


def index_config(idx: int, L: int, s: int) -> tuple:
    digits = []
    for _ in range(L):
        idx, r = divmod(idx, s)
        digits.append(r)
    return tuple(reversed(digits))


def configurations(L: int, s: int) -> Iterator[tuple]:
    """All configurations in index order."""
    return product(range(s), repeat=L)


def check_capacity(s: int, L: int, cap: int | None = None) -> int:
    if L < 1:
        raise ValidationError("lattice size must be at least 1")
    cap = size_cap() if cap is None else cap
    n = s ** L
    if n > cap:
        raise CapacityError(f"configuration space {s}^{L} = {n} exceeds cap {cap}")
    return n


@dataclass(frozen=True)
class MarkovOperator:
    """Sparse generator; ``rows[i]`` maps column index to the exact entry ``M[i, j]``."""

    L: int
    species: int
    rows: tuple

    @property
    def dim(self) -> int:
        return self.species ** self.L

    def entry(self, i: int, j: int) -> Fraction:
        return self.rows[i].get(j, Fraction(0))

    def nnz(self) -> int:
        return sum(len(r) for r in self.rows)

    def to_matrix(self) -> Matrix:
        n = self.dim
        return Matrix([[r.get(j, Fraction(0)) for j in range(n)] for r in self.rows])

    def column_sums(self) -> list:
        sums = [Fraction(0)] * self.dim
        for r in self.rows:
            for j, v in r.items():
                sums[j] += v
        return sums

    def is_generator(self) -> bool:
        if any(v != 0 for v in self.column_sums()):
            return False
        return all(v >= 0 for i, r in enumerate(self.rows) for j, v in r.items() if i != j)


def _local_columns(op: Matrix) -> list:
    """For each old local state, the list of (new state, entry) including the diagonal."""
    n = op.shape[0]
    return [[(i, op[i, j]) for i in range(n) if op[i, j] != 0] for j in range(n)]


def assemble_markov(spec: ModelSpec, L: int, cap: int | None = None) -> MarkovOperator:
    """Kronecker-sum assembly ``B_1 + sum m_{l,l+1} + Bbar_L`` applied column by column."""
    s = spec.species
    n = check_capacity(s, L, cap)
    ops = build_local_operators(spec)
    left, right, bulk = _local_columns(ops.B), _local_columns(ops.Bbar), _local_columns(ops.m)
    weights = [s ** (L - 1 - i) for i in range(L)]
    rows = [dict() for _ in range(n)]

    def add(i, j, v):
        r = rows[i]
        nv = r.get(j, 0) + v
        if nv == 0:
            r.pop(j, None)
        else:
            r[j] = nv

    for j, conf in enumerate(configurations(L, s)):
        t0 = conf[0]
        for new, v in left[t0]:
            add(j + (new - t0) * weights[0], j, v)
        tl = conf[-1]
        for new, v in right[tl]:
            add(j + (new - tl) * weights[-1], j, v)
        for l in range(L - 1):
            a, b = conf[l], conf[l + 1]
            for new, v in bulk[a * s + b]:
                c, d = divmod(new, s)
                add(j + (c - a) * weights[l] + (d - b) * weights[l + 1], j, v)
    return MarkovOperator(L, s, tuple(rows))


def apply_generator(M: MarkovOperator, p: Sequence) -> list:
    """Exact ``M @ p`` without forming a dense matrix."""
    if len(p) != M.dim:
        raise DimensionError(f"vector length {len(p)} != {M.dim}")
    out = []
    for r in M.rows:
        acc = Fraction(0)
        for j, v in r.items():
            acc += v * p[j]
        out.append(acc)
    return out
