"""Continuous-time Monte Carlo (direct-method Gillespie) for any model spec.

Events live on ``L + 1`` locations: the left boundary (location 0), the bulk
bonds ``(i, i+1)`` (location ``i``) and the right boundary (location ``L``).
Each location keeps its total exit rate, and after an event only the
locations touching a changed site are refreshed.

Estimators use batch means: the measurement window ``[burn_in, horizon]`` is
cut into equal time batches, and the spread of the per-batch values gives
the standard error.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import ConsistencyError, ValidationError
from .models import ModelSpec, build_local_operators

RNG_NAME = "numpy.random.PCG64"
DEFAULT_BATCHES = 40
_CHUNK = 1 << 14


@dataclass(frozen=True)
class SimConfig:
    spec: ModelSpec
    L: int
    horizon: float
    burn_in: float = 0.0
    seed: int = 0
    estimators: tuple = ("density", "current")
    n_batches: int = DEFAULT_BATCHES

    def __post_init__(self):
        if self.L < 1:
            raise ValidationError("L must be at least 1")
        if not self.horizon > self.burn_in >= 0:
            raise ValidationError("need horizon > burn_in >= 0")
        if self.n_batches < 2:
            raise ValidationError("need at least two batches for standard errors")
        unknown = set(self.estimators) - {"density", "current"}
        if unknown:
            raise ValidationError(f"unknown estimators {sorted(unknown)}")

    def with_horizon(self, horizon: float) -> "SimConfig":
        burn = self.burn_in * horizon / self.horizon
        return SimConfig(self.spec, self.L, horizon, burn, self.seed, self.estimators, self.n_batches)


@dataclass(frozen=True)
class Estimate:
    mean: float
    stderr: float

    def within(self, exact, k: float = 3.0) -> bool:
        return abs(self.mean - float(exact)) <= k * self.stderr

    def to_list(self) -> list:
        return [self.mean, self.stderr]


@dataclass(frozen=True)
class SimResult:
    """Estimates keyed by position and species.

    ``densities[(site, species)]`` for sites ``1..L``; ``currents[(bond, species)]``
    for bonds ``0..L`` where bond 0 is the left reservoir and bond ``L`` the
    right one; ``reaction_currents[bond]`` counts pair annihilations minus
    creations on bulk bonds.
    """

    model: str
    L: int
    seed: int
    horizon: float
    burn_in: float
    events: int
    densities: dict
    currents: dict
    reaction_currents: dict
    accounting: dict
    rng: str = RNG_NAME
    replicas: int = 1
    wall_time: float = field(default=0.0, compare=False)

    def density(self, site: int, species: int = 1) -> Estimate:
        return self.densities[(site, species)]

    def current(self, bond: int, species: int = 1) -> Estimate:
        return self.currents[(bond, species)]

    def to_dict(self) -> dict:
        return {
            "model": self.model, "L": self.L, "seed": self.seed, "horizon": self.horizon,
            "burn_in": self.burn_in, "events": self.events, "rng": self.rng,
            "replicas": self.replicas, "wall_time": self.wall_time,
            "densities": [{"site": s, "species": k, "mean": e.mean, "stderr": e.stderr}
                          for (s, k), e in sorted(self.densities.items())],
            "currents": [{"bond": b, "species": k, "mean": e.mean, "stderr": e.stderr}
                         for (b, k), e in sorted(self.currents.items())],
            "reaction_currents": [{"bond": b, "mean": e.mean, "stderr": e.stderr}
                                  for b, e in sorted(self.reaction_currents.items())],
            "accounting": self.accounting,
        }

    def rows(self) -> list:
        out = [("density", s, k, e.mean, e.stderr) for (s, k), e in sorted(self.densities.items())]
        out += [("current", b, k, e.mean, e.stderr) for (b, k), e in sorted(self.currents.items())]
        out += [("reaction_current", b, 0, e.mean, e.stderr)
                for b, e in sorted(self.reaction_currents.items())]
        return out


class AbsorbingStateError(ConsistencyError):
    pass


def _transition_table(op, n_states: int) -> list:
    """Per old local state: (total rate, [(new state, rate), ...])."""
    table = []
    for old in range(n_states):
        moves = [(new, float(op[new, old])) for new in range(n_states)
                 if new != old and op[new, old] != 0]
        table.append((sum(r for _, r in moves), moves))
    return table


def _pick(moves, target: float):
    acc = 0.0
    for new, r in moves:
        acc += r
        if target < acc:
            return new
    return moves[-1][0]


def _summarize(batches: np.ndarray) -> Estimate:
    n = len(batches)
    return Estimate(float(batches.mean()), float(batches.std(ddof=1) / math.sqrt(n)))


def gillespie_run(cfg: SimConfig) -> SimResult:
    """One trajectory from the empty lattice."""
    start = time.perf_counter()
    spec, L = cfg.spec, cfg.L
    ops = build_local_operators(spec)
    s = ops.species
    left_t = _transition_table(ops.B, s)
    right_t = _transition_table(ops.Bbar, s)
    bulk_t = _transition_table(ops.m, s * s)

    rng = np.random.Generator(np.random.PCG64(cfg.seed))
    uniforms = rng.random(_CHUNK)
    ui = 0

    config = [0] * L

    def loc_rate(k: int) -> float:
        if k == 0:
            r = left_t[config[0]][0]
        elif k == L:
            r = right_t[config[L - 1]][0]
        else:
            r = bulk_t[config[k - 1] * s + config[k]][0]
        return r

    rates = [loc_rate(k) for k in range(L + 1)]

    nb = cfg.n_batches
    batch_len = (cfg.horizon - cfg.burn_in) / nb
    occ = np.zeros((nb, L, s))
    flow = np.zeros((nb, L + 1, s))
    react = np.zeros((nb, L + 1))
    last = [0.0] * L
    batch = -1
    boundary = cfg.burn_in if cfg.burn_in > 0 else None
    if boundary is None:
        batch, boundary = 0, cfg.burn_in + batch_len

    injected = [0] * s
    ejected = [0] * s
    initial = [0] * s
    initial[0] = L

    t = 0.0
    events = 0

    def flush(upto: float):
        if batch >= 0:
            row = occ[batch]
            for i in range(L):
                row[i, config[i]] += upto - last[i]
        for i in range(L):
            last[i] = upto

    while True:
        total = sum(rates)
        if total <= 0:
            raise AbsorbingStateError(f"absorbing configuration {config} at t = {t}")
        if ui + 2 > _CHUNK:
            uniforms = rng.random(_CHUNK)
            ui = 0
        u1, u2 = uniforms[ui], uniforms[ui + 1]
        ui += 2
        t_new = t - math.log(1.0 - u1) / total
        while batch < nb and t_new >= boundary:
            flush(boundary)
            batch += 1
            boundary = cfg.burn_in + (batch + 1) * batch_len
        if batch >= nb:
            break
        t = t_new

        target = u2 * total
        k = 0
        acc = rates[0]
        while target >= acc and k < L:
            k += 1
            acc += rates[k]
        target -= acc - rates[k]

        counting = batch >= 0
        if k == 0 or k == L:
            site = 0 if k == 0 else L - 1
            old = config[site]
            new = _pick((left_t if k == 0 else right_t)[old][1], target)
            if batch >= 0:
                occ[batch, site, old] += t - last[site]
            last[site] = t
            config[site] = new
            sign = 1 if k == 0 else -1
            if counting:
                if new:
                    flow[batch, k, new] += sign
                if old:
                    flow[batch, k, old] -= sign
            if k == 0:
                if new:
                    injected[new] += 1
                if old:
                    injected[old] -= 1
            else:
                if old:
                    ejected[old] += 1
                if new:
                    ejected[new] -= 1
            # a boundary site feeds its own location and the one next to it
            touched = (site, site + 1)
        else:
            i, j = k - 1, k
            a, b = config[i], config[j]
            new = _pick(bulk_t[a * s + b][1], target)
            c, d = divmod(new, s)
            for site, old_v in ((i, a), (j, b)):
                if batch >= 0:
                    occ[batch, site, old_v] += t - last[site]
                last[site] = t
            config[i], config[j] = c, d
            if counting:
                if (c, d) == (b, a) and a != b:
                    if a:
                        flow[batch, k, a] += 1
                    if b:
                        flow[batch, k, b] -= 1
                dn = (c != 0) + (d != 0) - (a != 0) - (b != 0)
                if dn:
                    react[batch, k] -= dn / 2
            touched = tuple(x for x in (k - 1, k, k + 1) if 0 <= x <= L)
        for x in touched:
            rates[x] = loc_rate(x)
        events += 1

    final = [0] * s
    for v in config:
        final[v] += 1

    dens = {}
    cur = {}
    reac = {}
    if "density" in cfg.estimators:
        for i in range(L):
            for sp in range(1, s):
                dens[(i + 1, sp)] = _summarize(occ[:, i, sp] / batch_len)
    if "current" in cfg.estimators:
        for bnd in range(L + 1):
            for sp in range(1, s):
                cur[(bnd, sp)] = _summarize(flow[:, bnd, sp] / batch_len)
        if any(len(bulk_t[st][1]) and _changes_number(st, bulk_t[st][1], s) for st in range(s * s)):
            for bnd in range(1, L):
                reac[bnd] = _summarize(react[:, bnd] / batch_len)
    accounting = {"injected": injected[1:], "ejected": ejected[1:],
                  "initial_particles": initial[1:], "final_particles": final[1:]}
    return SimResult(spec.model, L, cfg.seed, cfg.horizon, cfg.burn_in, events, dens, cur, reac,
                     accounting, wall_time=time.perf_counter() - start)


def _changes_number(old: int, moves, s: int) -> bool:
    a, b = divmod(old, s)
    return any(((c != 0) + (d != 0)) != ((a != 0) + (b != 0)) for c, d in
               (divmod(new, s) for new, _ in moves))


def _pool(results: list, cfg: SimConfig) -> SimResult:
    n = len(results)

    def pooled(values):
        arr = np.array(values)
        return Estimate(float(arr.mean()), float(arr.std(ddof=1) / math.sqrt(n)))

    first = results[0]
    dens = {k: pooled([r.densities[k].mean for r in results]) for k in first.densities}
    cur = {k: pooled([r.currents[k].mean for r in results]) for k in first.currents}
    reac = {k: pooled([r.reaction_currents[k].mean for r in results]) for k in first.reaction_currents}
    accounting = {key: [sum(r.accounting[key][i] for r in results) for i in range(len(first.accounting[key]))]
                  for key in first.accounting}
    return SimResult(first.model, first.L, cfg.seed, cfg.horizon, cfg.burn_in,
                     sum(r.events for r in results), dens, cur, reac, accounting,
                     replicas=n, wall_time=sum(r.wall_time for r in results))


def replica_ensemble(cfg: SimConfig, n_replicas: int, seeds=None, workers: int = 1) -> SimResult:
    """Independent replicas pooled; the stderr is the spread of replica means.

    Replica ``i`` uses seed ``cfg.seed + i`` unless ``seeds`` is given.
    A single replica returns the plain run.
    """
    if n_replicas < 1:
        raise ValidationError("need at least one replica")
    seeds = list(seeds) if seeds is not None else [cfg.seed + i for i in range(n_replicas)]
    if len(seeds) != n_replicas:
        raise ValidationError("one seed per replica is required")
    if len(set(seeds)) != len(seeds):
        raise ValidationError("replica seeds must be distinct: identical seeds give identical trajectories")
    cfgs = [SimConfig(cfg.spec, cfg.L, cfg.horizon, cfg.burn_in, sd, cfg.estimators, cfg.n_batches)
            for sd in seeds]
    if n_replicas == 1:
        return gillespie_run(cfgs[0])
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            results = list(ex.map(gillespie_run, cfgs))
    else:
        results = [gillespie_run(c) for c in cfgs]
    return _pool(results, cfg)


def compare_to_exact(result: SimResult, densities: dict, currents: dict, reaction_currents: dict | None = None,
                     k: float = 3.0) -> list:
    """Rows ``(kind, key, estimate, exact, ok)`` for every exact value supplied."""
    rows = []
    for key, exact in densities.items():
        e = result.densities[key]
        rows.append(("density", key, e, exact, e.within(exact, k)))
    for key, exact in currents.items():
        e = result.currents[key]
        rows.append(("current", key, e, exact, e.within(exact, k)))
    for key, exact in (reaction_currents or {}).items():
        e = result.reaction_currents[key]
        rows.append(("reaction_current", key, e, exact, e.within(exact, k)))
    return rows
