"""Acceptance criteria 1-8, one PASS/FAIL line per criterion on stdout."""

import random
import time
from fractions import Fraction

import pytest

from masolve.ansatz import (build_truncated_rep, convergence_ratios, check_gz, check_zf, dissep_ma_steady,
                            dissep_Z_series, mutation_suite, partition_polynomial,
                            tasep_ma_steady, weight_polynomial)
from masolve.integrability import (check_transfer_commutativity, derivative_at_one,
                                   integrability_suite, markov_from_transfer, model_matrices)
from masolve.exact import Matrix
from masolve.models import ModelSpec, assemble_markov, build_local_operators
from masolve.simulate import SimConfig, compare_to_exact, gillespie_run
from masolve.steady import (density, observables, dissep_currents_closed, dissep_density_closed,
                            dissep_evaporation_current, dissep_lattice_current, proportionality,
                            stationary, tasep_current, two_tasep_check, two_tasep_currents_closed,
                            twotasep_closed_observables)

# Z_5 alpha^5 beta^5 as displayed for the worked example, {(i, j): coeff of alpha^i beta^j}
Z5_DISPLAYED = {
    (0, 5): 1,
    (1, 4): 1, (1, 5): 4,
    (2, 3): 1, (2, 4): 4, (2, 5): 9,
    (3, 2): 1, (3, 3): 4, (3, 4): 9, (3, 5): 14,
    (4, 1): 1, (4, 2): 4, (4, 3): 9, (4, 4): 14, (4, 5): 14,
    (5, 0): 1, (5, 1): 4, (5, 2): 9, (5, 3): 14, (5, 4): 14,
}

# global constants relating closed-form and microscopic DiSSEP currents
DISSEP_CURRENT_CONSTANTS = {"lattice": Fraction(1), "evaporation": Fraction(1)}

TASEP_SPEC = ModelSpec.tasep(Fraction(1, 2), Fraction(1, 3))
DISSEP_SPEC = ModelSpec.dissep(Fraction(1, 3), Fraction(1, 2), Fraction(2, 5), Fraction(1, 7), Fraction(3, 2))


@pytest.fixture
def report(capsys):
    def emit(n: int, ok: bool, text: str):
        with capsys.disabled():
            print(f"\ncriterion {n}: {'PASS' if ok else 'FAIL'}  {text}")
    return emit


def _friendly_dissep(rng: random.Random) -> ModelSpec:
    """Random spec whose boundary series ratios stay below one."""
    while True:
        q = lambda: Fraction(rng.randint(1, 9), rng.randint(1, 9))  # noqa: E731
        spec = ModelSpec.dissep(q(), q(), q(), q(), Fraction(rng.randint(2, 9), rng.randint(1, 4)))
        if all(r is None or r < 1 for r in convergence_ratios(spec, 2)):
            return spec


def test_criterion_1_worked_example(report):
    t0 = time.perf_counter()
    word = weight_polynomial("E D E D D")
    # (alpha + beta) / (alpha^2 beta^3) = 1/(alpha beta^3) + 1/(alpha^2 beta^2)
    word_ok = word == {(1, 3): 1, (2, 2): 1}
    z_ok = partition_polynomial(5) == Z5_DISPLAYED
    dt = time.perf_counter() - t0
    ok = word_ok and z_ok and dt < 1
    report(1, ok, f"EDEDD={word_ok} Z5={z_ok} time={dt:.2f}s")
    assert ok


def test_criterion_2_ansatz_equals_nullspace(report):
    rng = random.Random(2)
    t0 = time.perf_counter()
    bad = []
    for _ in range(20):
        al = Fraction(rng.randint(1, 12), rng.randint(1, 12))
        be = Fraction(rng.randint(1, 12), rng.randint(1, 12))
        for L in range(1, 8):
            if tasep_ma_steady(al, be, L).probs != stationary(ModelSpec.tasep(al, be), L).probs:
                bad.append((al, be, L))
    dt = time.perf_counter() - t0
    ok = not bad and dt < 30
    report(2, ok, f"140 (alpha, beta, L) cases, mismatches={len(bad)} time={dt:.1f}s")
    assert ok, bad


def test_criterion_3_integrability(report):
    t0 = time.perf_counter()
    failed = []
    for spec in (TASEP_SPEC, DISSEP_SPEC):
        for v in integrability_suite(spec, n_points=25):
            if not v.passed:
                failed.append((spec.model, v.check, v.detail))
        for L in (1, 2, 3):
            v = check_transfer_commutativity(spec, L, n_pairs=5)
            if not v.passed or v.points < 5:
                failed.append((spec.model, "commute", L))
        # derivative links, all exact
        R, K, Kb = model_matrices(spec)
        ops = build_local_operators(spec)
        PRp = Matrix.permutation(2) @ derivative_at_one(R)
        if spec.model == "tasep":
            links = [derivative_at_one(K) == ops.B * -2, derivative_at_one(Kb) == ops.Bbar * 2,
                     PRp * -1 == ops.m]
            for L in (1, 2, 3):
                links.append(markov_from_transfer(spec, L) == assemble_markov(spec, L).to_matrix())
        else:
            k = spec.kappa
            links = [derivative_at_one(K) * k == ops.B, derivative_at_one(Kb) * -k == ops.Bbar,
                     PRp * (2 * k) == ops.m]
        if not all(links):
            failed.append((spec.model, "derivative links", links))
    dt = time.perf_counter() - t0
    ok = not failed and dt < 120
    report(3, ok, f"failures={failed} time={dt:.1f}s")
    assert ok


def test_criterion_4_dissep_closed_forms(report):
    rng = random.Random(4)
    specs = [_friendly_dissep(rng) for _ in range(10)]
    dens_bad, lat_consts, eva_consts = 0, set(), set()
    for spec in specs:
        for L in range(2, 7):
            p = stationary(spec, L)
            dens_bad += sum(dissep_density_closed(spec, L, i) != density(p, i) for i in range(1, L + 1))
            closed = [dissep_currents_closed(spec, L, i) for i in range(1, L)]
            lat_consts.add(proportionality([c[0] for c in closed],
                                           [dissep_lattice_current(p, spec.kappa, i) for i in range(1, L)]))
            eva_consts.add(proportionality([c[1] for c in closed],
                                           [dissep_evaporation_current(p, i) for i in range(1, L)]))
    currents_ok = (lat_consts == {DISSEP_CURRENT_CONSTANTS["lattice"]}
                   and eva_consts == {DISSEP_CURRENT_CONSTANTS["evaporation"]})
    ok = dens_bad == 0 and currents_ok
    report(4, ok, f"10 specs x L=2..6, density mismatches={dens_bad} "
                  f"lattice constants={sorted(map(str, lat_consts))} "
                  f"evaporation constants={sorted(map(str, eva_consts))}")
    assert ok


def test_criterion_5_dissep_representation(report):
    residual_ok = True
    for N in (8, 16):
        rep = build_truncated_rep(DISSEP_SPEC, N)
        residual_ok &= not rep.left_residual().any() and not rep.right_residual().any()
    worst, max_n = 0.0, 0
    for L in (2, 3, 4):
        exact = stationary(DISSEP_SPEC, L)
        ma = dissep_ma_steady(DISSEP_SPEC, L, n_max=64)
        max_n = max(max_n, ma.truncation)
        worst = max(worst, max(abs(float(x) - y) for x, y in zip(exact.probs, ma.probs)))
    z_ok = all(dissep_Z_series(DISSEP_SPEC, L, N) == build_truncated_rep(DISSEP_SPEC, N).evaluate(("G2",) * L)
               for N in (4, 8, 12) for L in (1, 2, 3, 4))
    ok = residual_ok and worst <= 1e-10 and z_ok and max_n <= 68
    report(5, ok, f"residuals={residual_ok} max|dp|={worst:.2e} N<={max_n - 4} Z-series={z_ok}")
    assert ok


def test_criterion_6_two_tasep(report):
    t0 = time.perf_counter()
    rows = [two_tasep_check(L) for L in range(2, 6)]
    currents_ok = True
    for L in range(2, 6):
        j1, j2 = two_tasep_currents_closed(L)
        currents_ok &= (j1, j2) == (Fraction(1, 2 * (2 * L + 1)), Fraction(L + 1, 2 * (2 * L + 1)))
        spec = ModelSpec.two_tasep("L2", "R3")
        exact = observables(spec, stationary(spec, L))
        closed = twotasep_closed_observables(L)
        currents_ok &= exact.lattice_currents == closed.lattice_currents
    dt = time.perf_counter() - t0
    ok = all(r["pass"] for r in rows) and currents_ok and dt < 120
    report(6, ok, f"bulk conventions={[r['bulk'] for r in rows]} currents={currents_ok} time={dt:.1f}s")
    assert ok


def test_criterion_7_zf_gz_and_mutations(report):
    verdicts = {"tasep zf": check_zf(TASEP_SPEC).passed, "tasep gz": check_gz(TASEP_SPEC).passed,
                "dissep zf": check_zf(DISSEP_SPEC).passed}
    rows = mutation_suite(TASEP_SPEC, DISSEP_SPEC)
    flipped = sum(r["flipped"] for r in rows)
    ok = all(verdicts.values()) and flipped == 6
    report(7, ok, f"{verdicts} mutation coverage {flipped}/6")
    assert ok


def _exact_targets(spec: ModelSpec, L: int):
    if spec.model == "tasep":
        p = stationary(spec, L)
        j = tasep_current(p, spec.alpha, spec.beta)
        return ({(i, 1): density(p, i) for i in range(1, L + 1)},
                {(b, 1): j for b in range(L + 1)}, {})
    dens = {(i, 1): dissep_density_closed(spec, L, i) for i in range(1, L + 1)}
    closed = {i: dissep_currents_closed(spec, L, i) for i in range(1, L)}
    return dens, {(i, 1): closed[i][0] for i in closed}, {i: closed[i][1] for i in closed}


def test_criterion_8_simulation(report):
    t0 = time.perf_counter()
    L = 8
    summary = []
    all_ok = True
    for spec, seed in ((TASEP_SPEC, 81), (DISSEP_SPEC, 82)):
        dens, cur, reac = _exact_targets(spec, L)
        cfg = SimConfig(spec, L, horizon=2e4, burn_in=200.0, seed=seed)
        tries = 0
        for attempt in (cfg, cfg.with_horizon(2 * cfg.horizon)):
            tries += 1
            rows = compare_to_exact(gillespie_run(attempt), dens, cur, reac, k=3)
            if all(r[-1] for r in rows):
                break
        ok = all(r[-1] for r in rows)
        all_ok &= ok
        summary.append(f"{spec.model}: {sum(r[-1] for r in rows)}/{len(rows)} within 3 sigma, runs={tries}")
    dt = time.perf_counter() - t0
    ok = all_ok and dt <= 300
    report(8, ok, "; ".join(summary) + f" time={dt:.1f}s")
    assert ok
