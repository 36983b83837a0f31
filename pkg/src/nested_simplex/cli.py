"""Command line entry point: ``nested-simplex <command> ...``.

Exit codes: 0 positive verdict, 1 negative verdict, 2 error.
"""

from __future__ import annotations

import argparse
import itertools
import logging
import math
import os
import sys

import numpy as np

from .errors import NestedSimplexError
from .formats import (
    dump_json,
    load_query,
    load_state,
    rho_to_json,
    steer_csv,
    table_csv,
    write_text,
)
from .geo_oracle import DEFAULT_RESTARTS, search_nested
from .nesting import (
    DEFAULT_TOL,
    NestingQuery,
    aligned_ellipsoid_condition,
    circle_condition,
    nesting_predicate,
    quartic_coefficients,
    sphere_condition,
)
from .steering import ellipsoid_from_params, sample_steered
from .two_qubit import pauli_decompose, separability

EXIT_YES, EXIT_NO, EXIT_ERROR = 0, 1, 2
SEED_ENV = "NESTED_SIMPLEX_SEED"

log = logging.getLogger("nested_simplex")


class CliError(Exception):
    pass


def _seed(value: int | None) -> int:
    if value is not None:
        return value
    env = os.environ.get(SEED_ENV)
    if env is None or env == "":
        return 0
    try:
        return int(env)
    except ValueError:
        raise CliError(f"{SEED_ENV} must be an integer, got {env!r}") from None


def _emit(text: str, path: str | None) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        write_text(path, text)


def _human(pairs) -> str:
    lines = []
    for k, v in pairs:
        if isinstance(v, float):
            v = format(v, ".12g")
        elif isinstance(v, np.ndarray):
            v = np.array2string(v, precision=10, separator=", ")
        lines.append(f"{k}: {v}")
    return "\n".join(lines) + "\n"


def _report_pairs(rep) -> list:
    return [
        ("nested", rep.nested_exists),
        ("quartic", rep.quartic),
        ("u", rep.u),
        ("q", rep.q_coef),
        ("skew", rep.skew),
        ("d", rep.d),
        ("max_radius", rep.max_radius),
        ("rank", rep.rank),
        ("branch", rep.branch),
        ("lower_root", rep.lower_root),
        ("anomaly", rep.anomaly),
    ]


# -- commands -------------------------------------------------------------------


def cmd_check_nesting(args) -> int:
    qf = load_query(args.query)
    tol = args.tol if args.tol is not None else qf.tol
    rep = nesting_predicate(qf.query, tol)
    if args.json:
        doc = qf.to_dict()
        doc["tol"] = tol
        sys.stdout.write(dump_json({"query": doc, "report": rep.to_dict()}))
    else:
        sys.stdout.write(_human(_report_pairs(rep)))
    return EXIT_YES if rep.nested_exists else EXIT_NO


def cmd_check_state(args) -> int:
    sf = load_state(args.state)
    tol = args.tol if args.tol is not None else DEFAULT_TOL
    if not sf.state.valid:
        raise CliError("not a quantum state: rho has a negative eigenvalue")
    verdict = separability(sf.state, tol)
    dec = pauli_decompose(sf.state)
    doc = {
        "state": {"rho": rho_to_json(sf.state.rho)},
        "det_pt": verdict.det_pt,
        "separable": verdict.separable,
        "canonical": dec.canonical,
        "ellipsoid": None,
        "nesting": None,
    }
    pairs = [("det_pt", verdict.det_pt), ("separable", verdict.separable), ("canonical", dec.canonical)]
    if dec.canonical:
        e = ellipsoid_from_params(dec.params)
        rep = nesting_predicate(NestingQuery(e, 1.0), tol)
        doc["ellipsoid"] = {"c": e.c, "semiaxes": e.semiaxes, "axes": e.axes.T}
        doc["nesting"] = rep.to_dict()
        pairs += [("centre", e.c), ("semiaxes", e.semiaxes), ("axes (rows)", e.axes.T)]
        pairs += [(f"nesting.{k}", v) for k, v in _report_pairs(rep)]
    else:
        log.warning("Bob's Bloch vector is nonzero: ellipsoid and nesting report skipped")
    if args.json:
        sys.stdout.write(dump_json(doc))
    else:
        sys.stdout.write(_human(pairs))
    return EXIT_YES if verdict.separable else EXIT_NO


def cmd_steer_sample(args) -> int:
    if args.n < 0:
        raise CliError("--n must be non-negative")
    sf = load_state(args.state)
    if not sf.state.valid:
        raise CliError("not a quantum state: rho has a negative eigenvalue")
    params = sf.params
    if params is None:
        dec = pauli_decompose(sf.state)
        if not dec.canonical:
            raise CliError("state is not canonical (Bob's Bloch vector is nonzero)")
        params = dec.params
    out = sample_steered(params, args.n, seed=_seed(args.seed))
    _emit(steer_csv(out), args.out)
    return EXIT_YES


def cmd_oracle(args) -> int:
    qf = load_query(args.query)
    tol = args.tol if args.tol is not None else qf.tol
    # containment is checked up front so a bad query fails before any search
    nesting_predicate(qf.query, tol)
    res = search_nested(qf.query, seed=_seed(args.seed), restarts=args.restarts, tol=tol)
    doc = {
        "query": qf.to_dict(),
        "found": res.found,
        "best_min_slack": res.best_min_slack,
        "restarts_used": res.restarts_used,
        "certify_tol": res.certify_tol,
        "witness": None if res.witness is None else res.witness.to_dict(),
    }
    if args.witness:
        write_text(args.witness, dump_json(doc))
    if args.json:
        sys.stdout.write(dump_json(doc))
    else:
        sys.stdout.write(_human([
            ("found", res.found),
            ("best_min_slack", res.best_min_slack),
            ("restarts_used", res.restarts_used),
            ("kind", "none" if res.witness is None else res.witness.kind),
        ]))
    return EXIT_YES if res.found else EXIT_NO


def parse_range(text: str, name: str) -> list[float]:
    """``START:STOP:STEP`` (inclusive of STOP), a comma list, or a single value."""
    text = text.strip()
    try:
        if ":" in text:
            parts = [float(p) for p in text.split(":")]
            if len(parts) != 3:
                raise ValueError
            start, stop, step = parts
            if step <= 0:
                raise CliError(f"--{name}: step must be positive")
            count = math.floor((stop - start) / step + 1e-9) + 1
            values = [round(start + k * step, 12) for k in range(max(count, 0))]
        else:
            values = [float(p) for p in text.split(",") if p.strip()]
    except ValueError:
        raise CliError(f"--{name}: cannot parse range {text!r}") from None
    if not values:
        raise CliError(f"--{name}: empty range")
    return values


def _lower_root(Q, R) -> float:
    # the direction of the offset matters only through the skew term
    u, q, _ = quartic_coefficients(Q, np.array([1.0, 0.0, 0.0]), R)
    disc = u * u - q
    return u - math.sqrt(disc) if disc >= 0 else math.nan


SWEEP_COLUMNS = {
    "sphere": ["R", "r"],
    "circle": ["R", "r"],
    "aligned": ["R", "s1", "s2", "s3"],
}


def cmd_sweep(args) -> int:
    names = SWEEP_COLUMNS[args.mode]
    grids = [parse_range(getattr(args, n), n) for n in names]
    rows = []
    for vals in itertools.product(*grids):
        p = dict(zip(names, vals))
        R = p["R"]
        if args.mode == "sphere":
            closed = sphere_condition(R, p["r"])
            Q = p["r"] ** 2 * np.eye(3)
        elif args.mode == "circle":
            closed = circle_condition(R, p["r"])
            Q = np.diag([p["r"] ** 2, p["r"] ** 2, 0.0])
        else:
            closed = aligned_ellipsoid_condition(R, p["s1"], p["s2"], p["s3"])
            Q = np.diag([p["s1"] ** 2, p["s2"] ** 2, p["s3"] ** 2])
        rows.append([*vals, closed, _lower_root(Q, R)])
    comments = [
        f"mode={args.mode}",
        "d2_max: closed-form bound on the squared centre offset (negative: no offset works)",
        "d2_quartic: smaller root u - sqrt(u^2 - q) of the quartic in d^2, offset along the first axis (nan: no real root)",
    ]
    if args.mode == "aligned":
        comments.append("s1 lies along the offset direction; s2, s3 are the transverse semiaxes")
    _emit(table_csv(comments, names + ["d2_max", "d2_quartic"], rows), args.out)
    return EXIT_YES


# -- parser ---------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="nested-simplex", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true", help="log diagnostics to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("check-nesting", help="decide nesting with the quartic predicate")
    s.add_argument("query", help="query JSON file")
    s.add_argument("--tol", type=float, default=None)
    s.add_argument("--json", action="store_true")
    s.set_defaults(func=cmd_check_nesting)

    s = sub.add_parser("check-state", help="separability and steering ellipsoid of a two-qubit state")
    s.add_argument("state", help="state JSON file")
    s.add_argument("--tol", type=float, default=None)
    s.add_argument("--json", action="store_true")
    s.set_defaults(func=cmd_check_state)

    s = sub.add_parser("steer-sample", help="CSV point cloud of steered Bloch vectors")
    s.add_argument("state", help="state JSON file")
    s.add_argument("--n", type=int, default=1000)
    s.add_argument("--seed", type=int, default=None, help=f"defaults to ${SEED_ENV}, then 0")
    s.add_argument("--out", default=None, help="CSV path (stdout if omitted)")
    s.set_defaults(func=cmd_steer_sample)

    s = sub.add_parser("oracle", help="search for a nested triangle or tetrahedron")
    s.add_argument("query", help="query JSON file")
    s.add_argument("--restarts", type=int, default=DEFAULT_RESTARTS)
    s.add_argument("--seed", type=int, default=None, help=f"defaults to ${SEED_ENV}, then 0")
    s.add_argument("--witness", default=None, help="write the search result and witness as JSON")
    s.add_argument("--tol", type=float, default=None)
    s.add_argument("--json", action="store_true")
    s.set_defaults(func=cmd_oracle)

    s = sub.add_parser("sweep", help="tabulate closed-form and quartic boundaries on a grid")
    s.add_argument("--mode", choices=sorted(SWEEP_COLUMNS), required=True)
    s.add_argument("--R", default="1", help="START:STOP:STEP, a comma list, or a value")
    s.add_argument("--r", default="0:0.3:0.1")
    s.add_argument("--s1", default="0.3")
    s.add_argument("--s2", default="0.2")
    s.add_argument("--s3", default="0.1")
    s.add_argument("--out", default=None, help="CSV path (stdout if omitted)")
    s.set_defaults(func=cmd_sweep)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors, which already matches the contract
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except (CliError, NestedSimplexError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
