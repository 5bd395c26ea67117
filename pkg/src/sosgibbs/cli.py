"""Command-line entry point: solve, verify, marginal, sample, sweep, tauc.

Exit codes: 0 success, 2 bad input, 3 internal invariant violation,
4 table larger than the entry budget.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import __version__
from .boundary import (InvalidParameters, OracleFailure, Params, Tolerances, enumerate_laws,
                       extend_periodic, mp, verify_law)
from .ggm import (DEFAULT_BUDGET, TableTooLarge, class_table, edge_marginal_exact,
                  marginal_table, sample)
from .phase import records_to_csv, sweep, tauc_curve, tauc_to_csv
from .serialize import MalformedLawFile, dumps, dumps_laws, loads_laws, make_manifest
from .tree import build_ball

EXIT_OK, EXIT_INPUT, EXIT_INTERNAL, EXIT_BUDGET = 0, 2, 3, 4


class UsageError(ValueError):
    pass


def _range(text: str, cast=float) -> tuple:
    parts = text.split("..")
    try:
        if len(parts) == 1:
            v = cast(parts[0])
            return v, v
        if len(parts) == 2:
            return cast(parts[0]), cast(parts[1])
    except ValueError:
        pass
    raise argparse.ArgumentTypeError(f"expected VALUE or LO..HI, got {text!r}")


def _params(args) -> Params:
    if args.theta is not None:
        return Params.from_theta(args.k, args.theta)
    return Params.from_tau(args.k, args.tau)


def _param_dict(p: Params) -> dict:
    return {"k": p.k, "theta": p.theta, "tau": p.tau}


def _tolerances(args) -> Tolerances:
    return Tolerances(args.tol_recursion, args.tol_fixed_point, args.tol_identity)


def _write(text: str, out, manifest: dict | None = None) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    Path(out).write_text(text)
    if manifest is not None:
        Path(str(out) + ".manifest.json").write_text(dumps(manifest, indent=2) + "\n")


def cmd_solve(args) -> int:
    params = _params(args)
    tol = _tolerances(args)
    records = enumerate_laws(params, tol)
    manifest = make_manifest("solve", _param_dict(params), tol.__dict__)
    _write(dumps_laws(records, manifest) + "\n", args.out)
    if args.out is not None:
        print(f"{len(records)} laws written to {args.out}")
    return EXIT_OK


def cmd_verify(args) -> int:
    try:
        text = Path(args.law_file).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read {args.law_file}: {exc}") from exc
    entries = loads_laws(text)
    tol = _tolerances(args)
    n_fail = 0
    for i, (params, law, _) in enumerate(entries):
        res = verify_law(law, params)
        bad = tol.failures(res)
        n_fail += bool(bad)
        ident = (f"{res.norm_identity:.3e}" if res.norm_identity is not None
                 else res.identity_status)
        print(f"law {i}: k={params.k} tau={mp.nstr(params.tau, 10)} {law.family} "
              f"a={mp.nstr(law.a, 12)} b={mp.nstr(law.b, 12)} "
              f"recursion={res.recursion:.3e} fixed_point={res.fixed_point:.3e} "
              f"norm_identity={ident} {'FAIL ' + ','.join(bad) if bad else 'PASS'}")
    print(f"{len(entries)} laws, {n_fail} failed")
    return EXIT_OK if n_fail == 0 else 1


def _law(args):
    return extend_periodic(args.a, args.b)


def cmd_marginal(args) -> int:
    params = _params(args)
    law = _law(args)
    ball = build_ball(params.k, args.radius)
    pars = {**_param_dict(params), "a": law.a, "b": law.b, "radius": args.radius,
            "truncation": args.truncation, "edge": args.edge, "classes": args.classes}
    if args.edge is not None:
        em = edge_marginal_exact(law, params, ball, args.edge)
        body = {"edge": list(em.edge), "theta": em.theta,
                "class_mass": em.class_mass.tolist(),
                "pmf": [{"j": j, "p": p} for j, p in em.probs(args.truncation).items()]}
    elif args.classes:
        body = class_table(ball, law, params, args.budget).to_dict()
    else:
        body = marginal_table(ball, law, params, args.truncation, args.budget).to_dict()
    body["manifest"] = make_manifest("marginal", pars)
    _write(dumps(body) + "\n", args.out)
    return EXIT_OK


def cmd_sample(args) -> int:
    params = _params(args)
    law = _law(args)
    ball = build_ball(params.k, args.radius)
    res = sample(ball, law, params, args.n, args.seed)
    manifest = make_manifest("sample", {**_param_dict(params), "a": law.a, "b": law.b,
                                        "radius": args.radius, "n": args.n}, seed=args.seed)
    if args.out is None:
        res.to_csv(sys.stdout)
    else:
        res.to_csv(args.out)
        Path(str(args.out) + ".manifest.json").write_text(dumps(manifest, indent=2) + "\n")
    return EXIT_OK


def cmd_sweep(args) -> int:
    k_lo, k_hi = args.k
    records = sweep((k_lo, k_hi), args.tau, args.steps, workers=args.workers)
    manifest = make_manifest("sweep", {"k": [k_lo, k_hi], "tau": list(args.tau),
                                       "steps": args.steps})
    _write(records_to_csv(records), args.out, manifest)
    return EXIT_OK


def cmd_tauc(args) -> int:
    k_lo, k_hi = args.k
    manifest = make_manifest("tauc", {"k": [k_lo, k_hi]})
    _write(tauc_to_csv(tauc_curve(k_lo, k_hi)), args.out, manifest)
    return EXIT_OK


def _add_point(p, k_required=True):
    p.add_argument("--k", type=int, required=k_required, help="branching order (>= 2)")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--theta", help="transfer parameter in (0, 1)")
    g.add_argument("--tau", help="theta + 1/theta (> 2)")


def _add_tolerances(p):
    d = Tolerances()
    p.add_argument("--tol-recursion", type=float, default=d.recursion)
    p.add_argument("--tol-fixed-point", type=float, default=d.fixed_point)
    p.add_argument("--tol-identity", type=float, default=d.norm_identity)


def _add_law(p):
    p.add_argument("--a", default="1", help="u at residues 3 mod 4 (default 1)")
    p.add_argument("--b", default="1", help="u at residues 1 mod 4 (default 1)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="sosgibbs", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="enumerate period-4 boundary laws as JSON")
    _add_point(p)
    _add_tolerances(p)
    p.add_argument("--out", help="output path (default stdout)")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("verify", help="re-run the three oracles on a law file")
    p.add_argument("law_file")
    _add_tolerances(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("marginal", help="marginal table or exact single-edge law")
    _add_point(p)
    _add_law(p)
    p.add_argument("--radius", type=int, default=1)
    p.add_argument("--truncation", "-M", type=int, default=10)
    p.add_argument("--edge", type=int, help="child vertex id of one edge: exact single-edge law")
    p.add_argument("--classes", action="store_true", help="table over residues mod 4")
    p.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    p.add_argument("--out")
    p.set_defaults(func=cmd_marginal)

    p = sub.add_parser("sample", help="exact samples of all increments as CSV")
    _add_point(p)
    _add_law(p)
    p.add_argument("--radius", type=int, default=1)
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("sweep", help="phase-diagram CSV over a (k, tau) grid")
    p.add_argument("--k", type=lambda s: _range(s, int), required=True, help="K or KLO..KHI")
    p.add_argument("--tau", type=_range, required=True, help="LO..HI")
    p.add_argument("--steps", type=int, required=True)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("tauc", help="critical tau per k as CSV")
    p.add_argument("--k", type=lambda s: _range(s, int), required=True, help="K or KLO..KHI")
    p.add_argument("--out")
    p.set_defaults(func=cmd_tauc)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except TableTooLarge as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except OracleFailure as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except (InvalidParameters, MalformedLawFile, UsageError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
