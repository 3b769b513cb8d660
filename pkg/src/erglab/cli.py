"""Batch command-line front end.

One process per invocation: read an instance or parameters, run one
command, write one deterministic report. Exit status separates user
errors from mathematics: 0 success, 1 malformed input or cap, 2 a
violated exact identity (a bug signal, never a user error).
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

from . import __version__
from .coinduce import (
    check_prop34_pairing,
    check_rho_cocycle,
    check_thm33_identity,
    coinduced_action,
)
from .ergcore import Perm, phi
from .errors import CapExceeded, CheckFailed, ValidationError
from .instances import (
    GENERATE_KINDS,
    Instance,
    generate,
    load_instance,
    rational_str,
)
from .kazhdan import FiniteRep, KazhdanPair, amplify, averaging_norm, bounds
from .percolation import (
    FreeModel,
    ZdModel,
    cayley_ball,
    cluster_stats,
    percolate,
    sweep,
)
from .subrel import min_index_set
from .verify import SUITE_NAMES, run_suite


class _Parser(argparse.ArgumentParser):
    """Argument errors are validation failures, not check failures."""

    def error(self, message):
        raise ValidationError(message)


def _common_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--instance", help="instance JSON file")
    sub.add_argument("--seed", type=int, default=0)
    sub.add_argument("--out", help="output file (default stdout)")
    sub.add_argument("--format", choices=("json", "csv"), default=None)


def _build_parser() -> _Parser:
    parser = _Parser(prog="erglab")
    parser.add_argument("--version", action="version", version=__version__)
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("phi", description="capture values over an action closure")
    _common_flags(p)
    p.add_argument("--relation", default="E")
    p.add_argument("--action", default="main")

    p = subs.add_parser("subrel", description="minimal index set of a relation pair")
    _common_flags(p)
    p.add_argument("--e", default="E", help="inner relation name")
    p.add_argument("--f", default="F", help="ambient relation name")
    p.add_argument("--action", default="main")
    p.add_argument("--s", help="permutation name (default identity)")
    p.add_argument("--sp", help="permutation name (default identity)")

    p = subs.add_parser("coinduce", description="run the checks of a co-induction instance")
    _common_flags(p)

    p = subs.add_parser("percolate", description="bond percolation statistics on one ball")
    _common_flags(p)
    p.add_argument("--model", required=True, help="z2 | f2 | zd:<d> | free:<k>")
    p.add_argument("--radius", type=int, required=True)
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--targets", default="", help="elements, ';'-separated integer vectors")

    p = subs.add_parser("sweep", description="percolation sweep over a probability grid")
    _common_flags(p)
    p.add_argument("--model", required=True, help="z2 | f2 | zd:<d> | free:<k>")
    p.add_argument("--radius", type=int, required=True)
    p.add_argument("--grid", required=True, help="comma-separated probabilities")
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--targets", default="", help="elements, ';'-separated integer vectors")

    p = subs.add_parser("kazhdan", description="spectral-gap arithmetic")
    ksubs = p.add_subparsers(dest="kcommand", required=True)
    kp = ksubs.add_parser("amplify")
    _common_flags(kp)
    kp.add_argument("--k", type=int, required=True)
    kp.add_argument("--eps", required=True)
    kp.add_argument("--n", type=int, required=True)
    kp = ksubs.add_parser("bounds")
    _common_flags(kp)
    kp.add_argument("--selector", required=True)
    kp.add_argument("--n", type=int, required=True)
    kp.add_argument("--eps", required=True)
    kp = ksubs.add_parser("avgnorm")
    _common_flags(kp)
    kp.add_argument("--rep", choices=("natural", "regular"), default="regular")
    kp.add_argument("--action", default="main")
    kp.add_argument("--q", required=True, help="comma-separated element names")

    p = subs.add_parser("verify", description="seeded identity suites")
    _common_flags(p)
    p.add_argument("--suite", choices=SUITE_NAMES, help="default: all suites")
    p.add_argument("--count", type=int)
    p.add_argument("--size", type=int)

    p = subs.add_parser("generate", description="emit a generated instance file")
    _common_flags(p)
    p.add_argument("--kind", required=True, choices=GENERATE_KINDS)
    p.add_argument("--size", required=True, help="integer, or 'a,b' for two-part kinds")
    return parser


# -- shared helpers -------------------------------------------------------------


def _parse_scalar(text: str):
    """Rational-or-float: '2', '1/3', '0.25'."""
    text = text.strip()
    if "/" in text or text.lstrip("+-").isdigit():
        f = Fraction(text)
        return int(f) if f.denominator == 1 else f
    return float(text)


def _parse_model(text: str):
    text = text.strip().lower()
    if text == "z2":
        text = "zd:2"
    elif text == "f2":
        text = "free:2"
    kind, _, arg = text.partition(":")
    if kind == "zd":
        model = ZdModel(int(arg))
        return model, model.basis_generators()
    if kind == "free":
        model = FreeModel(int(arg))
        return model, model.letter_generators()
    raise ValidationError(f"unknown model {text!r}")


def _parse_targets(text: str, model) -> list:
    targets = []
    for part in text.split(";"):
        part = part.strip()
        if not part:
            continue
        vec = tuple(int(v) for v in part.split(","))
        if isinstance(model, ZdModel):
            if len(vec) != model.d:
                raise ValidationError(f"target {part!r} has the wrong rank")
        else:
            if any(v == 0 or abs(v) > model.k for v in vec):
                raise ValidationError(f"target {part!r} uses letters outside the group")
            vec = model.mul((), vec)  # reduce the word
        targets.append(vec)
    return targets


def _load(args) -> Instance:
    if not args.instance:
        raise ValidationError("this command needs --instance")
    return load_instance(args.instance)


def _emit(args, payload: dict, instance_hash: str | None) -> None:
    report = {
        "tool_version": __version__,
        "seed": args.seed,
        "instance_hash": instance_hash,
        "command": args.command,
    }
    report.update(payload)
    _write_text(args.out, json.dumps(report, indent=2, sort_keys=True) + "\n")


def _write_text(out: str | None, text: str) -> None:
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# -- commands -------------------------------------------------------------------


def _cmd_phi(args) -> int:
    inst = _load(args)
    rel = inst.relation(args.relation)
    action = inst.action(args.action)
    values = {e.name: rational_str(phi(rel, e.perm)) for e in action.closure()}
    _emit(args, {"phi": values}, inst.hash)
    return 0


def _cmd_subrel(args) -> int:
    inst = _load(args)
    e_rel = inst.relation(args.e)
    f_rel = inst.relation(args.f)
    action = inst.action(args.action)
    ident = Perm.identity(f_rel.size)
    s = inst.perm(args.s) if args.s else ident
    sp = inst.perm(args.sp) if args.sp else ident
    report = min_index_set(e_rel, f_rel, s, sp, action)
    _emit(
        args,
        {
            "c": rational_str(report.c),
            "m_star": report.m_star,
            "a": sorted(report.a_set),
            "a1_measure": rational_str(report.a1_measure),
            "verdict": report.verdict,
            "witness": report.argmin_gamma,
        },
        inst.hash,
    )
    return 0


def _cmd_coinduce(args) -> int:
    inst = _load(args)
    if inst.coinduce is None:
        raise ValidationError("the instance has no co-induction block")
    spec = inst.coinduce
    sys_ = coinduced_action(spec.a0, spec.b0, spec.a)
    gammas = [e.name for e in spec.b0.closure()]
    results: dict = {}
    status = 0
    for check in spec.checks:
        if check == "rho_cocycle":
            results[check] = {"verified_triples": check_rho_cocycle(sys_)}
            continue
        cases = 0
        bad = 0
        if check == "thm33_identity":
            for gamma in gammas:
                for b_set in _invariant_sets(spec):
                    rep = check_thm33_identity(sys_, sorted(b_set), gamma)
                    cases += 1
                    bad += rep.verdict != "pass"
        else:
            for gamma in gammas:
                for f in _invariant_observables_cli(spec):
                    for k in range(sys_.N):
                        for n in range(sys_.N):
                            rep = check_prop34_pairing(sys_, f, k, n, gamma)
                            cases += 1
                            bad += rep.verdict != "pass"
        if bad:
            status = 2
        results[check] = {"cases": cases, "verdict": "fail" if bad else "pass"}
    _emit(
        args,
        {
            "checks": results,
            "slots": sys_.N,
            "product_size": sys_.product_size,
            "materialized": sys_.materialized,
        },
        inst.hash,
    )
    return status


def _invariant_sets(spec) -> list[frozenset[int]]:
    from .verify import _target_orbit_sets

    return _target_orbit_sets(spec.a0, spec.a)


def _invariant_observables_cli(spec) -> list[list[Fraction]]:
    from .verify import _invariant_observables

    obs = _invariant_observables(spec.a0, spec.a)
    if not obs:
        # a transitive target admits only the zero observable
        obs = [[Fraction(0)] * spec.a.space.size]
    return obs


def _cmd_percolate(args) -> int:
    model, gens = _parse_model(args.model)
    targets = _parse_targets(args.targets, model)
    ball = cayley_ball(model, gens, args.radius)
    if args.trials < 1:
        raise ValidationError("at least one trial is required")
    configs = (percolate(ball, args.p, args.seed, t) for t in range(args.trials))
    stats = cluster_stats(configs, targets)
    _emit(
        args,
        {
            "ball": ball.description(),
            "p": args.p,
            "trials": stats.n,
            "theta_hat": stats.theta_hat,
            "theta_se": stats.theta_se,
            "boundary_clusters_mean": stats.boundary_clusters_mean,
            "tau_hat": {
                lab: stats.tau_hat(t) for t, lab in enumerate(stats.target_labels)
            },
        },
        None,
    )
    return 0


def _cmd_sweep(args) -> int:
    model, gens = _parse_model(args.model)
    targets = _parse_targets(args.targets, model)
    ball = cayley_ball(model, gens, args.radius)
    grid = [float(v) for v in args.grid.split(",") if v.strip()]
    result = sweep(ball, grid, args.trials, args.seed, targets, workers=args.workers)
    fmt = args.format or "csv"
    if fmt == "csv":
        _write_text(args.out, result.to_csv())
        return 0
    rows = [
        {
            "p": row.p,
            "trials": row.trials,
            "theta_hat": row.theta_hat,
            "theta_se": row.theta_se,
            "boundary_clusters_mean": row.boundary_clusters_mean,
            "tau_hat": {
                lab: row.tau_counts[t] / row.trials
                for t, lab in enumerate(result.target_labels)
            },
        }
        for row in result.rows
    ]
    _emit(
        args,
        {
            "ball": result.ball_description,
            "rows": rows,
            "monotone_exact": result.monotone_exact,
            "monotone_within_2se": result.monotone_within_2se,
        },
        None,
    )
    return 0


def _cmd_kazhdan(args) -> int:
    if args.kcommand == "amplify":
        pair = KazhdanPair(args.k, _parse_scalar(args.eps))
        value = amplify(pair, args.n)
        _emit(
            args,
            {"k": args.k, "eps": args.eps, "n": args.n, "value": value},
            None,
        )
        return 0
    if args.kcommand == "bounds":
        value = bounds(args.selector, args.n, _parse_scalar(args.eps))
        out = rational_str(value) if isinstance(value, (Fraction, int)) else value
        _emit(
            args,
            {"selector": args.selector, "n": args.n, "eps": args.eps, "value": out},
            None,
        )
        return 0
    inst = _load(args)
    action = inst.action(args.action)
    rep = FiniteRep.natural(action) if args.rep == "natural" else FiniteRep.regular(action)
    q = [v.strip() for v in args.q.split(",") if v.strip()]
    report = averaging_norm(rep, q)
    _emit(
        args,
        {
            "rep": args.rep,
            "q": q,
            "norm": report.norm,
            "eps_cap": report.eps_cap,
            "k": report.k,
            "invariant_dimension": report.invariant_dimension,
            "iterations": report.iterations,
        },
        inst.hash,
    )
    return 0


def _cmd_verify(args) -> int:
    names = [args.suite] if args.suite else list(SUITE_NAMES)
    results = [run_suite(n, count=args.count, size=args.size, seed=args.seed) for n in names]
    for r in results:
        print(r.summary())
    payload = {
        "suites": [
            {
                "suite": r.suite,
                "checked": r.checked,
                "failures": list(r.failures),
                "ok": r.ok,
            }
            for r in results
        ]
    }
    if args.out:
        _emit(args, payload, None)
    return 0 if all(r.ok for r in results) else 2


def _cmd_generate(args) -> int:
    size: object = args.size
    if isinstance(size, str) and ("," in size or size.startswith("(")):
        parts = size.strip("() ").split(",")
        size = tuple(int(v) for v in parts)
    else:
        size = int(size)
    doc = generate(args.kind, size, args.seed)
    _write_text(args.out, json.dumps(doc, indent=2, sort_keys=True) + "\n")
    return 0


_COMMANDS = {
    "phi": _cmd_phi,
    "subrel": _cmd_subrel,
    "coinduce": _cmd_coinduce,
    "percolate": _cmd_percolate,
    "sweep": _cmd_sweep,
    "kazhdan": _cmd_kazhdan,
    "verify": _cmd_verify,
    "generate": _cmd_generate,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if args.format == "csv" and args.command != "sweep":
            raise ValidationError("csv output is only defined for sweep")
        return _COMMANDS[args.command](args)
    except CheckFailed as exc:
        print(f"check failed: {exc}", file=sys.stderr)
        return 2
    except (ValidationError, CapExceeded) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
