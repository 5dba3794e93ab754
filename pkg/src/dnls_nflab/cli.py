"""Command-line entry point: every verification and experiment as a
subcommand with machine-readable CSV/JSON reports.

Exit codes: 0 all assertions passed, 1 an assertion failed, 2 usage error,
3 numerical non-convergence or blow-up.  Reports embed a manifest (the
subcommand, parameters, git describe, UTC timestamp, outcome); identical
argv and seed reproduce byte-identical files up to the timestamp field.
All randomness flows through numpy's counter-based Philox generator keyed
by the given seed.
"""

from __future__ import annotations

import argparse
import json
import os
import subprocess
import sys
from datetime import datetime, timezone
from fractions import Fraction
from pathlib import Path



class CheckFailure(Exception):
    """An assertion-style verification failed."""


def _git_describe() -> str:
    try:
        out = subprocess.run(
            ["git", "describe", "--always", "--dirty"],
            capture_output=True,
            text=True,
            timeout=10,
            cwd=Path(__file__).resolve().parent,
        )
        if out.returncode == 0:
            return out.stdout.strip()
    except OSError:
        pass
    return "unknown"


def make_manifest(subcommand: str, parameters: dict, outcome: str) -> dict:
    return {
        "subcommand": subcommand,
        "parameters": {k: parameters[k] for k in sorted(parameters)},
        "git_describe": _git_describe(),
        "timestamp": datetime.now(timezone.utc).isoformat(),
        "outcome": outcome,
    }


def write_csv(path: str, manifest: dict, header: list[str], rows: list[list]) -> None:
    try:
        with open(path, "w") as fh:
            fh.write("# manifest: " + json.dumps(manifest, sort_keys=True) + "\n")
            fh.write(",".join(header) + "\n")
            for row in rows:
                fh.write(",".join(str(v) for v in row) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write report to {path}: {exc}") from exc


def write_json(path: str, manifest: dict, data) -> None:
    try:
        with open(path, "w") as fh:
            json.dump({"manifest": manifest, "data": data}, fh, indent=1)
            fh.write("\n")
    except OSError as exc:
        raise OSError(f"cannot write report to {path}: {exc}") from exc


def emit_plotdata(rows: list[tuple[str, float, float]], path: str, manifest: dict) -> None:
    """Long-format plotting CSV: series, x, y."""
    write_csv(path, manifest, ["series", "x", "y"], [list(r) for r in rows])


def _status(ok: bool, name: str, detail: str = "") -> bool:
    line = f"{'PASS' if ok else 'FAIL'} {name}"
    if detail:
        line += f" ({detail})"
    print(line)
    return ok


# -- subcommands ----------------------------------------------------------------------


def cmd_nf4(args) -> int:
    from .order4 import (
        build_F4,
        coefficient_growth_audit,
        exhaustive_divisor_audit,
        f4_coefficient_bound_audit,
        iter_delta,
        divisor_bound_check,
    )
    from .poly import bracket, build_lambda, build_Q

    M = args.modes
    ok = True
    F4 = build_F4(M)
    residual = bracket(build_lambda(M), F4) + build_Q(M)
    ok &= _status(residual.is_zero, "order-4 homological equation", f"M={M}")
    if args.audit:
        rep = exhaustive_divisor_audit(args.divisor_bound)
        ok &= _status(
            not rep["violations"],
            "quadruple divisor bound",
            f"{rep['checked']} tuples, |j|<={args.divisor_bound}",
        )
        frep = f4_coefficient_bound_audit(F4)
        ok &= _status(
            not frep["violations"], "generator coefficient bound", f"{frep['checked']} terms"
        )
        audit = coefficient_growth_audit(F4, Fraction(1, 2), Fraction(3, 2))
        print(f"  generator growth constant: {audit.constant_raw:.6g}")
    params = vars(args).copy()
    params.pop("func", None)
    outcome = "pass" if ok else "fail"
    if args.dump_f4:
        from .poly import poly_to_records

        write_json(args.dump_f4, make_manifest("nf4", params, outcome), poly_to_records(F4))
    if args.divisor_csv:
        rows = []
        for t in iter_delta(min(M, args.divisor_bound)):
            rep = divisor_bound_check(t)
            rows.append([*t, rep.divisor, f"{rep.lower_bound:.12g}"])
        write_csv(
            args.divisor_csv,
            make_manifest("nf4", params, outcome),
            ["j", "k", "l", "m", "divisor", "bound"],
            rows,
        )
    return 0 if ok else 1


def cmd_nf6(args) -> int:
    from .order4 import compute_R6
    from .order6 import (
        build_F6,
        build_K,
        enumerate_resonant,
        split_r6,
        verify_Ktilde_zero,
        coefficient_growth_audit_f6,
    )
    from .poly import bracket, build_lambda, poly_to_records

    M = args.modes
    ok = True
    r6 = compute_R6(M)
    K = build_K(M)
    normal, qtilde = split_r6(r6)
    ok &= _status(normal == K, "sextic action part matches closed form", f"M={M}")
    if args.verify_ktilde:
        rep = verify_Ktilde_zero(M, r6)
        ok &= _status(rep.passed, "resonant cancellation", f"{rep.checked} monomials")
    F6 = build_F6(M, r6)
    residual = bracket(build_lambda(M), F6) + qtilde
    ok &= _status(residual.is_zero, "order-6 homological equation", f"M={M}")
    if args.audit_f6:
        audit = coefficient_growth_audit_f6(F6)
        print(f"  sextic generator growth constant: {audit.constant_raw:.6g}")
    params = vars(args).copy()
    params.pop("func", None)
    outcome = "pass" if ok else "fail"
    if args.dump_k:
        write_json(args.dump_k, make_manifest("nf6", params, outcome), poly_to_records(K))
    if args.resonant_csv:
        rows = [list(t) for t in enumerate_resonant(M)]
        write_csv(
            args.resonant_csv,
            make_manifest("nf6", params, outcome),
            ["j1", "j2", "j3", "j4", "j5", "j6"],
            rows,
        )
    return 0 if ok else 1


def cmd_identities(args) -> int:
    from .identities import (
        enumerate_triple_pairs,
        nine_term_sums,
        random_rational_pairs,
        verify_vanishing_sums,
    )

    pairs = enumerate_triple_pairs(args.bound)
    rows = []
    ok = True
    for p in pairs:
        I, II = nine_term_sums(p)
        if I != 0 or II != 0:
            ok = False
        rows.append([*(str(v) for v in p.x), *(str(v) for v in p.y), str(I), str(II)])
    _status(ok, "enumerated pairs", f"bound={args.bound}, {len(pairs)} pairs")
    n_random = args.random
    if n_random:
        for p in random_rational_pairs(n_random, seed=args.seed):
            verify_vanishing_sums(p)
        _status(True, "random rational pairs", f"{n_random} pairs")
    params = vars(args).copy()
    params.pop("func", None)
    if args.report:
        write_csv(
            args.report,
            make_manifest("identities", params, "pass" if ok else "fail"),
            ["x1", "x2", "x3", "y1", "y2", "y3", "I", "II"],
            rows,
        )
    return 0 if ok else 1


def _parse_init(spec: str, M: int):
    from .states import FourierState, state_from_json
    import math as _math

    if spec.startswith("planewave:"):
        body = spec.split(":", 1)[1]
        k_str, a_str = body.split(",")
        k = int(k_str)
        A = complex(a_str)
        return FourierState({k: A * _math.sqrt(2 * _math.pi)}, M)
    with open(spec) as fh:
        return state_from_json(fh.read(), M)


def cmd_simulate(args) -> int:
    from .flows import FlowConfig, dnls_evolve
    from .states import state_to_json

    M = args.modes
    track = tuple(float(s) for s in args.track_s.split(",")) if args.track_s else ()
    q0 = _parse_init(args.init, M)
    cfg = FlowConfig(
        dt=args.dt,
        t_end=args.t_end,
        scheme=args.scheme,
        record_interval=args.record_interval,
    )
    rec = dnls_evolve(q0, cfg, track_s=track, keep_states=bool(args.dump_final))
    params = vars(args).copy()
    params.pop("func", None)
    manifest = make_manifest("simulate", params, "report-only")
    header = ["time", "mass", "momentum", "energy"] + [f"norm_s={s:g}" for s in track]
    rows = []
    for i, t in enumerate(rec.times):
        row = [f"{t:.12g}", *(f"{rec.channels[c][i]:.16e}" for c in ("mass", "momentum", "energy"))]
        row += [f"{rec.channels[f'norm_s{s:g}'][i]:.16e}" for s in track]
        rows.append(row)
    write_csv(args.out, manifest, header, rows)
    if args.dump_final:
        with open(args.dump_final, "w") as fh:
            fh.write(state_to_json(rec.states[-1]))
    print(f"trajectory written to {args.out} ({len(rows)} records)")
    return 0


def cmd_stability(args) -> int:
    from .stability import StabilityRun, stability_sweep

    run = StabilityRun(
        s=args.s,
        epsilon=args.eps,
        M=args.modes,
        horizon_exponent=args.r,
        seed=args.seed,
        threshold=args.threshold,
        dt=args.dt,
    )
    rep = stability_sweep(run)
    params = vars(args).copy()
    params.pop("func", None)
    outcome = "pass" if rep.passed else "fail"
    if rep.budget_exhausted:
        print(f"step budget exhausted: {rep.message}")
        return 3
    if args.out:
        rows = [
            [f"{t:.12g}", f"{r:.12g}", f"{m:.6e}", f"{e:.6e}"]
            for t, r, m, e in zip(
                rep.times, rep.norm_ratio, rep.mass_drift, rep.energy_drift
            )
        ]
        write_csv(
            args.out,
            make_manifest("stability", params, outcome),
            ["t", "norm_ratio", "mass_drift", "energy_drift"],
            rows,
        )
    _status(
        rep.passed,
        "norm ratio within threshold",
        f"max ratio {rep.max_ratio:.4f}, threshold {run.threshold}",
    )
    return 0 if rep.passed else 1


def cmd_verify_all(args) -> int:
    from .identities import enumerate_triple_pairs, nine_term_sums, random_rational_pairs
    from .order4 import compute_R6, exhaustive_divisor_audit, random_divisor_audit
    from .order6 import (
        build_F6,
        build_K,
        exhaustive_sextuple_audit,
        qtilde0_crosscheck,
        split_r6,
        verify_Ktilde_zero,
    )
    from .order4 import build_F4
    from .poly import bracket, build_lambda, build_Q

    M = args.modes
    ok = True

    lam = build_lambda(M)
    res4 = bracket(lam, build_F4(M)) + build_Q(M)
    ok &= _status(res4.is_zero, "order-4 homological equation", f"M={M}")

    r6 = compute_R6(M)
    normal, qtilde = split_r6(r6)
    ok &= _status(normal == build_K(M), "sextic action part matches closed form")

    krep = verify_Ktilde_zero(M, r6)
    ok &= _status(krep.passed, "resonant cancellation", f"{krep.checked} monomials")

    F6 = build_F6(M, r6)
    res6 = bracket(lam, F6) + qtilde
    ok &= _status(res6.is_zero, "order-6 homological equation", f"M={M}")

    crep = qtilde0_crosscheck(M, M, r6)
    ok &= _status(
        crep.passed,
        "reducible closed-form cross-check",
        f"{crep.n_compared} terms, designated mode {M}",
    )

    pairs = enumerate_triple_pairs(max(10, args.identities_bound))
    bad = [p for p in pairs if nine_term_sums(p) != (0, 0)]
    ok &= _status(not bad, "kernel identities (integer pairs)", f"{len(pairs)} pairs")
    n_rand = 200
    rand_ok = all(
        nine_term_sums(p) == (0, 0)
        for p in random_rational_pairs(n_rand, seed=args.seed)
    )
    ok &= _status(rand_ok, "kernel identities (random rational)", f"{n_rand} pairs")

    qrep = exhaustive_divisor_audit(20)
    ok &= _status(not qrep["violations"], "quadruple divisor bound", f"{qrep['checked']} tuples")
    rrep = random_divisor_audit(20_000, 10_000, seed=args.seed)
    ok &= _status(not rrep["violations"], "quadruple divisor bound (random)", "20000 samples")
    srep = exhaustive_sextuple_audit(min(8, M))
    ok &= _status(not srep["violations"], "sextuple divisor bound", f"{srep['checked']} tuples")

    print("verify-all:", "PASS" if ok else "FAIL")
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nflab",
        description="Exact normal-form verification lab and simulator for the "
        "derivative NLS on the torus",
    )
    parser.add_argument(
        "--jobs",
        type=int,
        default=int(os.environ.get("NF_LAB_JOBS", "1")),
        help="worker cap for parallelizable suites (default NF_LAB_JOBS or 1)",
    )
    parser.add_argument("--config", type=str, default=None, help="JSON config file; flags win")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p4 = sub.add_parser("nf4", help="order-4 construction checks and dumps")
    p4.add_argument("--modes", type=int, default=8)
    p4.add_argument("--dump-f4", type=str, default=None)
    p4.add_argument("--audit", action="store_true")
    p4.add_argument("--divisor-bound", type=int, default=20)
    p4.add_argument("--divisor-csv", type=str, default=None)
    p4.set_defaults(func=cmd_nf4)

    p6 = sub.add_parser("nf6", help="order-6 construction checks and dumps")
    p6.add_argument("--modes", type=int, default=8)
    p6.add_argument("--verify-ktilde", action="store_true")
    p6.add_argument("--dump-k", type=str, default=None)
    p6.add_argument("--audit-f6", action="store_true")
    p6.add_argument("--resonant-csv", type=str, default=None)
    p6.set_defaults(func=cmd_nf6)

    pi = sub.add_parser("identities", help="kernel identity battery")
    pi.add_argument("--bound", type=int, default=10)
    pi.add_argument("--random", type=int, default=0)
    pi.add_argument("--seed", type=int, default=0)
    pi.add_argument("--report", type=str, default=None)
    pi.set_defaults(func=cmd_identities)

    ps = sub.add_parser("simulate", help="evolve the truncated equation")
    ps.add_argument("--modes", type=int, required=True)
    ps.add_argument("--dt", type=float, default=1e-3)
    ps.add_argument("--t-end", type=float, default=10.0)
    ps.add_argument("--init", type=str, required=True, help="state JSON file or planewave:k,A")
    ps.add_argument("--track-s", type=str, default="")
    ps.add_argument("--scheme", type=str, default="rk4-integrating-factor")
    ps.add_argument("--record-interval", type=float, default=None)
    ps.add_argument("--out", type=str, default="trajectory.csv")
    ps.add_argument("--dump-final", type=str, default=None)
    ps.set_defaults(func=cmd_simulate)

    pst = sub.add_parser("stability", help="long-time norm-ratio experiment")
    pst.add_argument("--s", type=float, required=True)
    pst.add_argument("--eps", type=float, required=True)
    pst.add_argument("--modes", type=int, default=32)
    pst.add_argument("--r", type=float, default=4.0)
    pst.add_argument("--seed", type=int, default=0)
    pst.add_argument("--threshold", type=float, default=3.0)
    pst.add_argument("--dt", type=float, default=1e-3)
    pst.add_argument("--out", type=str, default=None)
    pst.set_defaults(func=cmd_stability)

    pv = sub.add_parser("verify-all", help="full exact verification battery")
    pv.add_argument("--modes", type=int, default=8)
    pv.add_argument("--identities-bound", type=int, default=10)
    pv.add_argument("--seed", type=int, default=0)
    pv.set_defaults(func=cmd_verify_all)

    return parser


def _collect_defaults(parser) -> dict:
    defaults = {}
    stack = [parser]
    while stack:
        p = stack.pop()
        for action in p._actions:
            if isinstance(action, argparse._SubParsersAction):
                stack.extend(action.choices.values())
            else:
                defaults[action.dest] = action.default
    return defaults


def _apply_config(args, parser):
    if not args.config:
        return args
    with open(args.config) as fh:
        conf = json.load(fh)
    # flags win: only fill values the user left at their defaults
    defaults = _collect_defaults(parser)
    for key, value in conf.items():
        if hasattr(args, key) and getattr(args, key) == defaults.get(key):
            setattr(args, key, value)
    return args


def main(argv=None) -> int:
    from .flows import BlowupError, FlowConvergenceError, StepBudgetError

    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args = _apply_config(args, parser)
        return args.func(args)
    except (FlowConvergenceError, BlowupError, StepBudgetError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    except CheckFailure as exc:
        print(f"check failed: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
