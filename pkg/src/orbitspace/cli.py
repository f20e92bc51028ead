"""Command-line front end.

Data goes to stdout (or ``--output``), errors go to stderr as one JSON line
``{"code", "message", "context"}``.  Exit status: 0 success, 1 validation
error or failed verification, 2 numerical error.
"""

import argparse
import json
import os
import sys
import time

import numpy as np

from . import euler, io, linalg, measure, reduction
from .exceptions import NotCoregular, NumericalError, OrbitSpaceError, ValidationError
from .integrands import get_integrand
from .integrator import AMBIENT, DOMAIN_W, METHODS, ORBIT_U, MCConfig, integrate
from .verify import COLUMNS, consistency_table, verify_suite

SEED_ENV = "ORBITSPACE_SEED"
CLI_METHODS = {"ambient": AMBIENT, "domain-w": DOMAIN_W, "orbit-u": ORBIT_U}


class UsageError(ValidationError):
    code = "usage"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message, prog=self.prog)


def _default_seed():
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"{SEED_ENV} must be an integer, got {raw!r}") from None


def _check_km(k, m):
    if k < 1 or m < 1:
        raise UsageError("k and m must be positive", k=k, m=m)
    if k > m:
        raise NotCoregular(f"k={k} > m={m}: orbit-space commands require 1 <= k <= m",
                           k=k, m=m)


def _read_json(args):
    if args.input in (None, "-"):
        text = sys.stdin.read()
    else:
        try:
            with open(args.input) as fh:
                text = fh.read()
        except OSError as exc:
            raise UsageError(f"cannot read {args.input}: {exc.strerror}") from None
    return io.loads(text)


def cmd_density(args):
    G = io.gram_from_json(_read_json(args))
    k = G.shape[0] if args.k is None else args.k
    if k != G.shape[0]:
        raise io.DimensionMismatch(f"--k {k} but the Gram matrix is {G.shape[0]}x{G.shape[0]}")
    _check_km(k, args.m)
    d = measure.hilbert_density(G, k, args.m, args.tol)
    return io.dumps(dict(io.density_to_json(d), k=k, m=args.m), indent=2)


def cmd_volumes(args):
    m = args.m
    if m < 1:
        raise UsageError("m must be positive", m=m)
    if args.k is not None:
        _check_km(args.k, m)
    rows = [{"quantity": "sphere", "index": j, "value": measure.sphere_volume(j)}
            for j in range(m)]
    rows.append({"quantity": "orthogonal_group", "index": m,
                 "value": measure.orthogonal_group_volume(m)})
    if args.k is not None:
        rows.append({"quantity": "stiefel", "index": args.k,
                     "value": measure.stiefel_volume(m, args.k)})
    if args.format == "csv":
        return io.rows_to_csv(rows, ("quantity", "index", "value")).rstrip("\n")
    out = {"m": m, "spheres": {f"S{r['index']}": r["value"] for r in rows[:m]},
           "orthogonal_group": rows[m]["value"]}
    if args.k is not None:
        out["k"] = args.k
        out["stiefel"] = rows[-1]["value"]
    return io.dumps(out, indent=2)


def cmd_reduce(args):
    V = io.vectors_from_json(_read_json(args))
    _check_km(*V.shape)
    W, schedule, R = reduction.reduce(V)
    return io.dumps({"W": W, "schedule": io.schedule_to_json(schedule), "R": R}, indent=2)


def cmd_lift(args):
    G = io.gram_from_json(_read_json(args))
    _check_km(G.shape[0], args.m)
    return io.dumps(io.vectors_to_json(linalg.lift(G, args.m, args.tol)), indent=2)


def _vector_from_json(obj):
    if isinstance(obj, dict):
        obj = obj.get("vector")
    try:
        v = np.array(obj, dtype=float)
    except (TypeError, ValueError):
        v = None
    if v is None or v.ndim != 1 or v.size < 2:
        raise io.MalformedInput('expected {"vector": [...]} with at least two entries')
    return v


def cmd_euler(args):
    obj = _read_json(args)
    if args.mode == "to-vector":
        return io.dumps({"vector": euler.vector_from_angles(io.angles_from_json(obj))}, indent=2)
    if args.mode == "to-matrix":
        return io.dumps({"matrix": euler.rotation_from_angles(io.angles_from_json(obj))},
                        indent=2)
    if args.mode == "from-vector":
        v = _vector_from_json(obj)
        return io.dumps(io.angles_to_json(euler.angles_from_unit_vector(v / np.linalg.norm(v))),
                        indent=2)
    A = io.matrix_from_json(obj)
    if args.mode == "from-matrix":
        return io.dumps(io.angles_to_json(euler.angles_from_rotation(A, args.tol)), indent=2)
    parts = euler.euler_decomposition(A, args.tol)
    return io.dumps({"m": A.shape[0], "factors": [io.angles_to_json(p) for p in parts]},
                    indent=2)


def cmd_integrate(args):
    _check_km(args.k, args.m)
    g = get_integrand(args.integrand)
    config = MCConfig(args.samples, args.seed, args.chunk, args.workers)
    methods = METHODS if args.method == "all" else (CLI_METHODS[args.method],)
    results = []
    for method in methods:
        start = time.perf_counter()
        est = integrate(g, args.k, args.m, method, args.scheme, args.nodes, config)
        out = est.as_dict()
        out["exact"] = g.exact_value(args.k, args.m)
        out["elapsed_ms"] = 1000.0 * (time.perf_counter() - start)
        results.append(out)
    return io.dumps(results[0] if len(results) == 1 else results, indent=2)


def cmd_verify(args):
    checks = verify_suite(args.samples, args.seed, args.workers, args.inject_fault)
    rows = [row for check in checks for row in check.rows]
    if not args.skip_registry:
        rows += consistency_table(samples=args.samples, seed=args.seed, workers=args.workers)
    for check in checks:
        print(check.summary(), file=sys.stderr)
    passed = all(row["pass"] for row in rows)
    if args.format == "json":
        text = io.dumps({"passed": passed, "rows": rows}, indent=2)
    else:
        text = io.rows_to_csv(rows, COLUMNS).rstrip("\n")
    return text, (0 if passed else 1)


def build_parser():
    parser = _Parser(prog="orbitspace",
                     description="Integrate O_m-invariant functions through the orbit space.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, help_text, inputs=True):
        p = sub.add_parser(name, help=help_text)
        if inputs:
            p.add_argument("--input", "-i", help="input JSON file (default: stdin)")
        p.add_argument("--output", "-o", help="output file (default: stdout)")
        p.add_argument("--tol", type=float, default=linalg.DEFAULT_TOL,
                       help="relative tolerance (default 1e-12)")
        return p

    p = add("density", "density at a Gram matrix ({k, lower} JSON)")
    p.add_argument("--k", type=int)
    p.add_argument("--m", type=int, required=True)
    p.set_defaults(func=cmd_density)

    p = add("volumes", "sphere, orthogonal group and Stiefel volumes", inputs=False)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--k", type=int)
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.set_defaults(func=cmd_volumes)

    p = add("reduce", "rotate a configuration ({k, m, rows} JSON) into the fundamental domain")
    p.set_defaults(func=cmd_reduce)

    p = add("lift", "configuration in R^m with a given Gram matrix")
    p.add_argument("--m", type=int, required=True)
    p.set_defaults(func=cmd_lift)

    p = add("euler", "Euler angle conversions")
    p.add_argument("--mode", required=True,
                   choices=("to-vector", "from-vector", "to-matrix", "from-matrix", "decompose"))
    p.set_defaults(func=cmd_euler)

    p = add("integrate", "integrate a registered invariant function", inputs=False)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--integrand", default="gaussian", help="registry name or poly:<expr>")
    p.add_argument("--method", choices=tuple(CLI_METHODS) + ("all",), default="all")
    p.add_argument("--scheme", choices=("auto", "quadrature", "mc", "direct"), default="auto")
    p.add_argument("--nodes", type=int, help="quadrature nodes per axis")
    p.add_argument("--samples", type=int, default=10 ** 6)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--chunk", type=int, default=2 ** 16)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_integrate)

    p = add("verify", "run the verification battery", inputs=False)
    p.add_argument("--samples", type=int, default=10 ** 6)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--inject-fault", action="store_true",
                   help="negative control: flip the power of two in the density constant")
    p.add_argument("--skip-registry", action="store_true",
                   help="omit the consistency table over the integrand registry")
    p.set_defaults(func=cmd_verify)
    return parser


def _report(exc):
    context = {key: (value.tolist() if isinstance(value, np.ndarray) else value)
               for key, value in getattr(exc, "context", {}).items()}
    payload = {"code": getattr(exc, "code", "error"), "message": str(exc), "context": context}
    print(json.dumps(payload, default=str), file=sys.stderr)


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
        if getattr(args, "seed", 0) is None:
            args.seed = _default_seed()
        result = args.func(args)
        text, status = result if isinstance(result, tuple) else (result, 0)
        if args.output:
            with open(args.output, "w") as fh:
                fh.write(text + "\n")
        else:
            sys.stdout.write(text + "\n")
        return status
    except ValidationError as exc:
        _report(exc)
        return 1
    except NumericalError as exc:
        _report(exc)
        return 2
    except OrbitSpaceError as exc:
        _report(exc)
        return 2


if __name__ == "__main__":
    sys.exit(main())
