"""``widthlab`` command line: compute, add, verify, suite.

Exit codes: 0 ok, 2 invalid input, 3 numeric failure, 4 an asserted check failed.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import tempfile
from pathlib import Path

import numpy as np

from . import __version__
from .addition import addition_from_dict
from .errors import InputError, NumericError
from .functionals import FUNCTIONALS, compute
from .geometry import body_from_dict, body_to_dict
from .orlicz import OrliczFunction, phi_from_dict
from .sphere_quad import build_rule
from .verify import (
    DEFAULT_TOL,
    EnsembleConfig,
    Tolerances,
    campaign_report,
    canonical_json,
    check_pair,
    report_digest,
    run_campaign,
)

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC, EXIT_VERIFY = 0, 2, 3, 4


def load_json(arg: str, flag: str):
    """Inline JSON (starts with ``{`` or ``[``) or a path to a JSON file."""
    text = arg.strip()
    source = flag
    if not text.startswith(("{", "[")):
        path = Path(arg)
        try:
            text = path.read_text()
        except OSError as exc:
            raise InputError(f"{flag}: cannot read {arg!r}: {exc.strerror}") from exc
        source = f"{flag} ({arg})"
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{source}: invalid JSON at line {exc.lineno} column {exc.colno}: "
                         f"{exc.msg}") from exc


def _body(arg, flag):
    return body_from_dict(load_json(arg, flag), flag)


def _phi(arg, flag="--phi"):
    phi = phi_from_dict(load_json(arg, flag), flag)
    if not isinstance(phi, OrliczFunction):
        raise InputError(f"{flag}: expected a univariate weight (power or mixture)")
    return phi


def _rule(args, dim):
    if args.dim is not None and args.dim != dim:
        raise InputError(f"--dim {args.dim} does not match the {dim}-D input")
    return build_rule(dim, args.resolution, args.seed)


def _default_threads() -> int:
    try:
        return max(1, len(os.sched_getaffinity(0)))
    except AttributeError:
        return os.cpu_count() or 1


def write_output(text: str, out: str | None) -> None:
    """Print, or replace ``out`` atomically (temp file in the same directory, then rename)."""
    if out is None:
        sys.stdout.write(text)
        return
    target = Path(out)
    fd, tmp = tempfile.mkstemp(dir=target.parent or Path("."), prefix=f".{target.name}.")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, target)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _csv(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


# ---------------------------------------------------------------------------
# Commands


def cmd_compute(args) -> int:
    if args.K is None:
        raise InputError("compute needs --K (or --body)")
    K = _body(args.K, "--K")
    L = _body(args.L, "--L") if args.L is not None else None
    if L is not None and L.dim != K.dim:
        raise InputError(f"--L is {L.dim}-D but --K is {K.dim}-D")
    rule = _rule(args, K.dim)
    for flag, values in (("--phi", args.phi), ("--p", args.p), ("--i", args.i)):
        if values and len(values) > 1:
            raise InputError(f"compute takes a single {flag}")
    phi = _phi(args.phi[0]) if args.phi else None
    p = args.p[0] if args.p else None
    i = args.i[0] if args.i else 0
    params = {"K": body_to_dict(K)}
    if L is not None:
        params["L"] = body_to_dict(L)
    if p is not None:
        params["p"] = p
    if phi is not None:
        params["phi"] = phi.to_dict()
    result = compute(args.functional, rule, i, K, L, p=p, phi=phi, params=params)
    d = result.to_dict()
    if args.format == "csv":
        text = _csv(["functional", "i", "value", "evaluations"],
                    [[d["functional"], d["i"], repr(d["value"]), d["evaluations"]]])
    else:
        text = canonical_json(d)
    write_output(text, args.out)
    return EXIT_OK


def _round(values: np.ndarray, digits: int) -> list:
    return [float(f"{v:.{digits - 1}e}") for v in values]


def cmd_add(args) -> int:
    if args.spec is None:
        raise InputError("add needs --spec")
    spec = addition_from_dict(load_json(args.spec, "--spec"), "--spec")
    rule = _rule(args, spec.profile.dim)
    values = spec.profile.on(rule)
    residual = float(np.max(spec.residual(rule)))
    digits = args.digits
    if not 1 <= digits <= 17:
        raise InputError("--digits must lie in 1..17")
    nodes = [_round(u, digits) for u in rule.nodes]
    vals = _round(values, digits)
    if args.format == "csv":
        header = [f"u{k}" for k in range(rule.dim)] + ["value"]
        text = _csv(header, [[*u, v] for u, v in zip(nodes, vals)])
    else:
        text = canonical_json({"rule": rule.descriptor(), "digits": digits,
                               "nodes": nodes, "values": vals})
    write_output(text, args.out)
    # kept out of the sampled output so equal profiles give equal files
    sys.stderr.write(json.dumps({"op": spec.op, "residual_max": residual}) + "\n")
    return EXIT_OK


def _tolerances(args) -> Tolerances:
    return Tolerances(
        ineq_tol=DEFAULT_TOL.ineq_tol if args.tol_ineq is None else args.tol_ineq,
        id_tol=DEFAULT_TOL.id_tol if args.tol_id is None else args.tol_id,
    )


def _config(args, dim: int, trials: int) -> EnsembleConfig:
    kwargs = {"seed": args.seed if args.seed is not None else 0, "dim": dim, "trials": trials,
              "resolution": args.resolution, "tolerances": _tolerances(args)}
    if args.p:
        kwargs["p_values"] = tuple(args.p)
    if args.phi:
        kwargs["phis"] = tuple(_phi(a, "--phi") for a in args.phi)
    if args.i:
        kwargs["i_values"] = tuple(args.i)
    return EnsembleConfig(**kwargs)


def _campaign_rows(report: dict) -> list:
    rows = []
    for r in report["reports"]:
        inputs = dict(r["inputs"])
        rows.append([report["config"]["dim"], inputs.pop("trial", ""), r["check"], r["kind"],
                     inputs.get("i", ""), r["status"], repr(r["lhs"]), repr(r["rhs"]),
                     repr(r["slack"]), r["equality_case"],
                     json.dumps(inputs, sort_keys=True)])
    return rows


_CAMPAIGN_HEADER = ["dim", "trial", "check", "kind", "i", "status", "lhs", "rhs", "slack",
                    "equality_case", "inputs"]


def _finish_campaign(args, document: dict, campaigns: list) -> int:
    if args.format == "csv":
        rows = [row for c in campaigns for row in _campaign_rows(c)]
        text = _csv(_CAMPAIGN_HEADER, rows)
    else:
        text = canonical_json(document)
    write_output(text, args.out)
    failures = sum(c["failures"] for c in campaigns)
    errors = sum(len(c["errors"]) for c in campaigns)
    status = {"ok": document["ok"], "failures": failures, "errors": errors,
              "digest": report_digest(document)}
    if args.out is not None:
        status["out"] = args.out
    sys.stderr.write(json.dumps(status, sort_keys=True) + "\n")
    if failures:
        return EXIT_VERIFY
    return EXIT_NUMERIC if errors else EXIT_OK


def cmd_verify(args) -> int:
    if args.K is None or args.L is None:
        raise InputError("verify needs --K and --L")
    K, L = _body(args.K, "--K"), _body(args.L, "--L")
    if K.dim != L.dim:
        raise InputError(f"--L is {L.dim}-D but --K is {K.dim}-D")
    _rule(args, K.dim)
    config = _config(args, K.dim, 1)
    report = campaign_report(config, [check_pair(K, L, config, 0)])
    return _finish_campaign(args, report, [report])


def cmd_suite(args) -> int:
    dims = [args.dim] if args.dim is not None else [2, 3]
    threads = args.threads if args.threads is not None else _default_threads()
    if threads < 1:
        raise InputError("--threads must be >= 1")
    campaigns = [run_campaign(_config(args, d, args.trials), threads) for d in dims]
    document = {
        "artifact": {"name": "widthlab", "version": __version__},
        "seed": args.seed if args.seed is not None else 0,
        "ok": all(c["ok"] for c in campaigns),
        "campaigns": campaigns,
    }
    return _finish_campaign(args, document, campaigns)


# ---------------------------------------------------------------------------
# Parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="widthlab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"widthlab {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--dim", type=int, help="ambient dimension n (default: from inputs)")
    common.add_argument("--resolution", type=int,
                        help="quadrature resolution (default per dim, "
                             "or $WIDTHLAB_DEFAULT_RESOLUTION)")
    common.add_argument("--seed", type=int, help="seed for Monte Carlo rules and ensembles")
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--out", help="output path (written atomically); default stdout")

    bodies = argparse.ArgumentParser(add_help=False)
    bodies.add_argument("--K", "--body", dest="K", help="body JSON or path")
    bodies.add_argument("--L", help="second body JSON or path")

    weights = argparse.ArgumentParser(add_help=False)
    weights.add_argument("--i", type=int, action="append", help="index 0 <= i < n; repeatable")
    weights.add_argument("--p", type=float, action="append", help="L_p exponent; repeatable")
    weights.add_argument("--phi", action="append", help="weight JSON or path; repeatable")

    tols = argparse.ArgumentParser(add_help=False)
    tols.add_argument("--tol-ineq", type=float, help="inequality slack tolerance")
    tols.add_argument("--tol-id", type=float, help="identity tolerance")
    tols.add_argument("--threads", type=int, help="worker threads (default: available cores)")

    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("compute", parents=[common, bodies, weights],
                       help="evaluate a width functional")
    p.add_argument("--functional", choices=FUNCTIONALS, default="A_i")
    p.set_defaults(func=cmd_compute)

    p = sub.add_parser("add", parents=[common], help="sample an Orlicz or L_p width sum")
    p.add_argument("--spec", help="addition descriptor JSON or path")
    p.add_argument("--digits", type=int, default=12, help="significant digits written")
    p.set_defaults(func=cmd_add)

    p = sub.add_parser("verify", parents=[common, bodies, weights, tols],
                       help="run every check on one body pair")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("suite", parents=[common, weights, tols],
                       help="run the seeded verification campaign")
    p.add_argument("--trials", type=int, default=200)
    p.set_defaults(func=cmd_suite)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        sys.stderr.write(f"widthlab: error: {exc}\n")
        return EXIT_INPUT
    except NumericError as exc:
        sys.stderr.write(f"widthlab: numeric error: {exc}\n")
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
