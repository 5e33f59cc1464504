"""``masolve`` command line.

Exit codes: 0 when every check passes, 1 when a check fails, 2 on usage
errors (unknown model, bad rational literal, capacity exceeded, bad flags).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from fractions import Fraction
from typing import Sequence

from . import __version__
from .ansatz import (check_gz, check_zf, dissep_ma_steady, evaluate_converged, tasep_evaluate,
                     tasep_ma_steady)
from .ansatz.representation import build_truncated_rep
from .ansatz.tasep import as_word
from .errors import CapacityError, MasolveError, TruncationError, ValidationError
from .exact import format_rational, parse_rational
from .integrability import integrability_suite
from .models import ModelSpec
from .simulate import SimConfig, replica_ensemble
from .steady import (closed_form_observables, observables, stationary,
                     two_tasep_check)

RATE_FLAGS = ("alpha", "beta", "gamma", "delta", "kappa", "mu", "nu")
ROUTES = ("nullspace", "ansatz", "closed", "simulate")


class UsageError(MasolveError):
    pass


# ---------------------------------------------------------------------------
# Argument handling
# ---------------------------------------------------------------------------


def _add_common(p: argparse.ArgumentParser, needs_L: bool = False):
    p.add_argument("--model", help="tasep, dissep or 2tasep")
    p.add_argument("--spec", metavar="FILE", help="model spec JSON; flags override its values")
    for name in RATE_FLAGS:
        p.add_argument(f"--{name}", metavar="P/Q")
    p.add_argument("--left", help="2-TASEP left boundary L1..L4")
    p.add_argument("--right", help="2-TASEP right boundary R1..R4")
    p.add_argument("--L", type=int, required=needs_L, help="lattice size")
    p.add_argument("--format", choices=("json", "csv", "pretty"), default="json")
    p.add_argument("--out", metavar="FILE", help="write the report here instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="masolve", description="Exact and stochastic solvers for "
                                     "open-boundary exclusion processes.")
    parser.add_argument("--version", action="version", version=f"masolve {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="integrability and exchange-relation verdicts")
    _add_common(p)
    p.add_argument("--points", type=int, default=25, help="grid points per variable")
    p.add_argument("--sizes", default="1,2,3", help="lattice sizes for transfer-matrix checks")

    p = sub.add_parser("steady", help="exact stationary distribution and observables")
    _add_common(p, needs_L=True)

    p = sub.add_parser("ansatz", help="evaluate a word or build the matrix-ansatz steady state")
    _add_common(p)
    p.add_argument("--word", help='e.g. "E D E D^2" or "G1 G2^3"')
    p.add_argument("--N", type=int, help="fixed truncation order (DiSSEP); exact value at that order")
    p.add_argument("--tol", type=float, default=1e-10)

    p = sub.add_parser("observables", help="closed-form versus exact observables")
    _add_common(p, needs_L=True)

    p = sub.add_parser("simulate", help="Gillespie simulation")
    _add_common(p, needs_L=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--horizon", type=float, default=1e4)
    p.add_argument("--burn-in", type=float, default=100.0)
    p.add_argument("--replicas", type=int, default=1)
    p.add_argument("--batches", type=int, default=40)

    p = sub.add_parser("compare", help="maximum discrepancy between two solution routes")
    _add_common(p, needs_L=True)
    p.add_argument("--routes", default="nullspace,ansatz", help=f"two of {','.join(ROUTES)}")
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--sigma", type=float, default=3.0, help="allowed deviation for the simulate route")
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--horizon", type=float, default=2e4)
    p.add_argument("--burn-in", type=float, default=100.0)
    return parser


def spec_from_args(args) -> ModelSpec:
    doc: dict = {}
    if args.spec:
        try:
            with open(args.spec, encoding="utf-8") as fh:
                doc = json.load(fh)
        except OSError as exc:
            raise UsageError(f"cannot read spec file: {exc}") from None
        except json.JSONDecodeError as exc:
            raise UsageError(f"spec file is not valid JSON: {exc}") from None
        if not isinstance(doc, dict):
            raise UsageError("spec file must hold a JSON object")
    doc = {**doc, "rates": dict(doc.get("rates", {}))}
    if args.model:
        doc["model"] = args.model
    if "model" not in doc:
        raise UsageError("no model given: use --model or --spec")
    for name in RATE_FLAGS:
        val = getattr(args, name)
        if val is not None:
            doc["rates"][name] = format_rational(parse_rational(val))
    for side in ("left", "right"):
        if getattr(args, side):
            doc[side] = getattr(args, side)
    return ModelSpec.from_dict(doc)


# ---------------------------------------------------------------------------
# Commands; each returns (passed, result dict, csv rows)
# ---------------------------------------------------------------------------


def _sizes(text: str) -> tuple:
    try:
        sizes = tuple(int(t) for t in text.split(",") if t.strip())
    except ValueError:
        raise UsageError(f"bad size list {text!r}") from None
    if not sizes or min(sizes) < 1:
        raise UsageError("sizes must be positive integers")
    return sizes


def cmd_check(spec: ModelSpec, args):
    if spec.model == "2tasep":
        sizes = (args.L,) if args.L else (2, 3, 4, 5)
        verdicts = []
        for L in sizes:
            r = two_tasep_check(L)
            verdicts.append({"check": "closed-form", "model": "2tasep", "points": 0, "pass": r["pass"],
                             "witness": None, "detail": {"L": L, "bulk": r["bulk"]}})
    else:
        verdicts = [v.to_dict() for v in integrability_suite(spec, args.points, _sizes(args.sizes))]
        verdicts.append(check_zf(spec, n_points=args.points).to_dict())
        verdicts.append(check_gz(spec, n_points=args.points).to_dict())
    passed = all(v["pass"] for v in verdicts)
    rows = [{"check": v["check"], "pass": v["pass"], "points": v["points"]} for v in verdicts]
    return passed, {"verdicts": verdicts}, rows


def _dist_payload(p) -> dict:
    return p.to_dict()


def _obs_rows(report) -> list:
    return report.to_dict()["rows"]


def cmd_steady(spec: ModelSpec, args):
    p = stationary(spec, args.L)
    obs = observables(spec, p)
    result = {"distribution": _dist_payload(p), "observables": _obs_rows(obs)}
    rows = [{"config": k, "probability": v} for k, v in result["distribution"]["probabilities"].items()]
    return True, result, rows


def _wire_value(v):
    return format_rational(v) if isinstance(v, Fraction) else v


def cmd_ansatz(spec: ModelSpec, args):
    if spec.model == "2tasep":
        raise UsageError("no matrix ansatz is implemented for the 2-TASEP")
    if args.word is not None:
        word = as_word(args.word)
        if spec.model == "tasep":
            value = format_rational(tasep_evaluate(word, spec.alpha, spec.beta))
        elif args.N is not None:
            value = format_rational(build_truncated_rep(spec, args.N).evaluate(word))
        else:
            v, N = evaluate_converged(word, spec, tol=args.tol)
            value = {"float": v, "N": N}
        result = {"word": args.word, "value": value}
        return True, result, [result if isinstance(value, str) else {"word": args.word, **value}]
    if args.L is None:
        raise UsageError("ansatz needs --word or --L")
    if spec.model == "tasep":
        p = tasep_ma_steady(spec.alpha, spec.beta, args.L)
    else:
        p = dissep_ma_steady(spec, args.L, N=args.N, tol=args.tol)
    result = {"distribution": _dist_payload(p)}
    rows = [{"config": k, "probability": v} for k, v in result["distribution"]["probabilities"].items()]
    return True, result, rows


def _exact_reference(spec: ModelSpec, L: int):
    """Closed forms where they exist, else the matrix ansatz (TASEP)."""
    if spec.model == "tasep":
        rep = observables(spec, tasep_ma_steady(spec.alpha, spec.beta, L))
        return rep.__class__(rep.model, rep.L, "matrix-ansatz", rep.densities, rep.lattice_currents,
                             rep.evaporation_currents)
    return closed_form_observables(spec, L)


def cmd_observables(spec: ModelSpec, args):
    ref = _exact_reference(spec, args.L)
    exact = observables(spec, stationary(spec, args.L))
    rows = []
    for r1, r2 in zip(ref.rows(), exact.rows()):
        rows.append({"site": r1["site"], "species": r1["species"], "quantity": r1["quantity"],
                     ref.source: _wire_value(r1["value"]), "nullspace": _wire_value(r2["value"]),
                     "equal": r1["value"] == r2["value"]})
    passed = all(r["equal"] for r in rows)
    return passed, {"L": args.L, "reference": ref.source, "rows": rows}, rows


def cmd_simulate(spec: ModelSpec, args):
    cfg = SimConfig(spec, args.L, args.horizon, args.burn_in, args.seed, n_batches=args.batches)
    res = replica_ensemble(cfg, args.replicas)
    rows = [{"quantity": q, "position": pos, "species": sp, "mean": m, "stderr": e}
            for q, pos, sp, m, e in res.rows()]
    return True, res.to_dict(), rows


def _route_values(route: str, spec: ModelSpec, args) -> tuple:
    """(probabilities or None, {observable key: value}, {key: stderr} or None)."""
    L = args.L
    if route in ("nullspace", "ansatz"):
        if route == "nullspace":
            p = stationary(spec, L)
        elif spec.model == "tasep":
            p = tasep_ma_steady(spec.alpha, spec.beta, L)
        elif spec.model == "dissep":
            p = dissep_ma_steady(spec, L, tol=args.tol)
        else:
            raise UsageError("no matrix ansatz is implemented for the 2-TASEP")
        obs = {(r["quantity"], r["site"], r["species"]): float(r["value"])
               for r in observables(spec, p).rows()}
        return [float(x) for x in p.probs], obs, None
    if route == "closed":
        if spec.model == "tasep":
            raise UsageError("the TASEP has no closed-form route; use nullspace or ansatz")
        rep = closed_form_observables(spec, L)
        return None, {(r["quantity"], r["site"], r["species"]): float(r["value"]) for r in rep.rows()}, None
    cfg = SimConfig(spec, L, args.horizon, args.burn_in, args.seed)
    res = replica_ensemble(cfg, 1)
    obs, err = {}, {}
    for (site, sp), e in res.densities.items():
        obs[("density", site, sp)], err[("density", site, sp)] = e.mean, e.stderr
    for (bond, sp), e in res.currents.items():
        if 1 <= bond <= L - 1:
            obs[("current", bond, sp)], err[("current", bond, sp)] = e.mean, e.stderr
    for bond, e in res.reaction_currents.items():
        obs[("evaporation", bond, 1)], err[("evaporation", bond, 1)] = e.mean, e.stderr
    return None, obs, err


def cmd_compare(spec: ModelSpec, args):
    routes = [r.strip() for r in args.routes.split(",")]
    if len(routes) != 2 or any(r not in ROUTES for r in routes):
        raise UsageError(f"--routes needs two of {', '.join(ROUTES)}")
    (p1, o1, e1), (p2, o2, e2) = (_route_values(r, spec, args) for r in routes)
    keys = sorted(set(o1) & set(o2))
    rows = []
    worst = 0.0
    worst_sigma = 0.0
    for k in keys:
        diff = abs(o1[k] - o2[k])
        worst = max(worst, diff)
        row = {"quantity": k[0], "site": k[1], "species": k[2], routes[0]: o1[k], routes[1]: o2[k],
               "abs_diff": diff}
        err = (e1 or e2 or {}).get(k)
        if err is not None:
            row["stderr"] = err
            if err > 0:
                worst_sigma = max(worst_sigma, diff / err)
            elif diff > 0:
                worst_sigma = float("inf")
        rows.append(row)
    if p1 is not None and p2 is not None:
        worst = max(worst, max(abs(a - b) for a, b in zip(p1, p2)))
    stochastic = "simulate" in routes
    passed = worst_sigma <= args.sigma if stochastic else worst <= args.tol
    result = {"routes": routes, "max_abs_diff": worst, "tol": args.tol, "compared": len(keys)}
    if stochastic:
        result["max_sigma"] = worst_sigma
        result["sigma"] = args.sigma
    result["rows"] = rows
    return passed, result, rows


COMMANDS = {"check": cmd_check, "steady": cmd_steady, "ansatz": cmd_ansatz,
            "observables": cmd_observables, "simulate": cmd_simulate, "compare": cmd_compare}


# ---------------------------------------------------------------------------
# Output
# ---------------------------------------------------------------------------


def _to_csv(rows: Sequence[dict]) -> str:
    buf = io.StringIO()
    fields: list = []
    for r in rows:
        for k in r:
            if k not in fields:
                fields.append(k)
    w = csv.DictWriter(buf, fieldnames=fields)
    w.writeheader()
    for r in rows:
        w.writerow({k: (f"{v:.17g}" if isinstance(v, float) else v) for k, v in r.items()})
    return buf.getvalue()


def _to_pretty(envelope: dict, rows: Sequence[dict]) -> str:
    lines = [f"masolve {envelope['command']}  model={envelope['model']['model']}  "
             f"{'PASS' if envelope['pass'] else 'FAIL'}"]
    for r in rows:
        lines.append("  " + "  ".join(f"{k}={v:.10g}" if isinstance(v, float) else f"{k}={v}"
                                      for k, v in r.items()))
    return "\n".join(lines) + "\n"


def render(envelope: dict, rows: Sequence[dict], fmt: str) -> str:
    if fmt == "json":
        return json.dumps(envelope, indent=2, default=_wire_value) + "\n"
    if fmt == "csv":
        return _to_csv(rows)
    return _to_pretty(envelope, rows)


def run(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        spec = spec_from_args(args)
        passed, result, rows = COMMANDS[args.command](spec, args)
    except CapacityError as exc:
        print(f"masolve: capacity exceeded: {exc}", file=sys.stderr)
        return 2
    except TruncationError as exc:
        print(f"masolve: truncation did not converge: {exc}", file=sys.stderr)
        return 1
    except (UsageError, ValidationError) as exc:
        print(f"masolve: {exc}", file=sys.stderr)
        return 2
    except MasolveError as exc:
        print(f"masolve: {exc}", file=sys.stderr)
        return 1
    envelope = {"command": args.command, "model": spec.to_dict(), "pass": passed, "result": result}
    text = render(envelope, rows, args.format)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0 if passed else 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
