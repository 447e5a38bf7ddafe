"""Command-line front end.

Exit status: 0 on pass, 1 when a verification fails, 2 on configuration or
construction errors.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys

import numpy as np

from . import algebra
from .config import ConfigError, load_document, parse_flow, parse_matrix, parse_rule, parse_grid
from .expr import ExpressionError
from .flows import ConstraintError, DomainError, TimeGrid, exp_mu, is_uniformly_distributed
from .rules import AxiomError
from .verify import DEFAULT_H, check_kce, check_pde, ode_oracle

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


def parse_grid_spec(spec: str):
    """``standard`` or ``s,tau,t;s,tau,t;...``."""
    if spec in (None, "", "standard"):
        return None
    points = []
    for chunk in spec.split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        parts = [float(x) for x in chunk.split(",")]
        if len(parts) != 3:
            raise ConfigError(f"grid point needs three values s,tau,t: {chunk!r}")
        points.append(tuple(parts))
    return points


def _write_json(path, payload):
    if path:
        with open(path, "w") as fh:
            json.dump(payload, fh, indent=2)


def cmd_algebra_check(args) -> int:
    doc = load_document(args.config)
    rule = parse_rule(doc.get("rule", doc), doc.get("_base"))
    report = algebra.analyze(rule, tol=args.tol, samples=args.samples, max_dim=args.max_dim)
    payload = {"kind": rule.kind, "dim": rule.dim, **report.to_dict()}
    if rule.binary_op is not None:
        payload["uniformly_distributed"] = is_uniformly_distributed(rule.binary_op)

    mark = {True: "yes", False: "no"}
    print(f"rule: {rule!r}")
    print(f"  associative:       {mark[report.associative]}")
    print(f"  commutative:       {mark[report.commutative]}")
    print(f"  unital:            {mark[report.unital]}")
    if report.unit is not None:
        print(f"  unit:              {[(ijk, round(v, 12)) for ijk, v in report.unit.nonzero()]}")
    print(f"  power-associative: {report.power_assoc}")
    print(f"  cubic-stochastic:  {mark[report.cubic_stochastic]}")
    print(f"  norm constant C:   {report.norm_constant:g}")
    print(f"  idempotents found: {len(report.idempotents)}")
    if "uniformly_distributed" in payload:
        print(f"  uniformly distributed: {mark[payload['uniformly_distributed']]}")
    _write_json(args.out, payload)
    return EXIT_OK


def cmd_flow_verify(args) -> int:
    flow = parse_flow(args.config)
    report = check_kce(flow, parse_grid_spec(args.grid), tol=args.tol)
    for (s, tau, t), r in zip(report.grid, report.residuals):
        print(f"  s={s:<8g} tau={tau:<8g} t={t:<8g} residual={r:.3e}")
    verdict = "PASS" if report.passed else "FAIL"
    print(f"{flow.label}: max residual {report.max_residual:.3e} (tol {args.tol:g}) {verdict}")
    _write_json(args.out, report.to_dict())
    return EXIT_OK if report.passed else EXIT_FAIL


def evolve_rows(flow, s: float, times):
    """``(t, i, j, k, value)`` rows in t-ascending, flat-index order."""
    rows = []
    for t in times:
        mat = flow.eval(s, t)
        m = mat.dim
        for idx, v in enumerate(mat.flat):
            i, rest = divmod(idx, m * m)
            j, k = divmod(rest, m)
            rows.append((t, i + 1, j + 1, k + 1, float(v)))
    return rows


def cmd_flow_evolve(args) -> int:
    doc = load_document(args.config)
    flow = parse_flow(doc)
    grid = parse_grid(doc)
    start = args.t_start if args.t_start is not None else grid.start
    end = args.t_end if args.t_end is not None else grid.end
    step = args.step if args.step is not None else grid.step
    times = TimeGrid(start, end, step).times()
    if flow.discrete:
        times = np.unique(np.round(times).astype(int))
    if args.t_start is None:
        times = times[times > args.s]
    if len(times) == 0 or np.any(times <= args.s):
        raise ConfigError(f"every emitted t must exceed s = {args.s}")
    rows = evolve_rows(flow, args.s, [t.item() for t in times])
    out = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(["t", "i", "j", "k", "value"])
        for t, i, j, k, v in rows:
            writer.writerow([f"{t:.17g}", i, j, k, f"{v:.17g}"])
    finally:
        if args.out:
            out.close()
    return EXIT_OK


def cmd_exp(args) -> int:
    doc = load_document(args.config)
    rule = parse_rule(doc.get("rule", doc), doc.get("_base"))
    q = parse_matrix(doc.get("Q", "zero"), rule)
    result = exp_mu(rule, q, args.t, args.tol)
    payload = {"t": args.t, "tol": args.tol, "dim": rule.dim, "exp": result.flat.tolist()}
    print(f"exp_mu(tQ) at t={args.t:g}: {[(ijk, v) for ijk, v in result.nonzero()]}")
    status = EXIT_OK
    if args.oracle:
        ref = ode_oracle(rule, q, args.t, args.steps)
        diff = (result - ref).max_abs()
        ok = diff <= args.oracle_tol
        payload["oracle"] = {"steps": args.steps, "max_abs_diff": diff, "tolerance": args.oracle_tol, "pass": ok}
        print(f"RK4 oracle ({args.steps} steps): max |diff| = {diff:.3e} {'PASS' if ok else 'FAIL'}")
        status = EXIT_OK if ok else EXIT_FAIL
    _write_json(args.out, payload)
    return status


def cmd_pde_check(args) -> int:
    flow = parse_flow(args.config)
    report = check_pde(flow, parse_grid_spec(args.grid), h=args.h, tol=args.tol)
    print(f"{flow.label}: h={args.h:g} max forward {report.max_forward:.3e}, "
          f"max backward {report.max_backward:.3e} {'PASS' if report.passed else 'FAIL'}")
    _write_json(args.out, report.to_dict())
    return EXIT_OK if report.passed else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cubicflow", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, tol):
        p.add_argument("--config", required=True, help="rule or flow document (YAML/JSON)")
        p.add_argument("--tol", type=float, default=tol)
        p.add_argument("--out", help="write machine-readable output here")

    alg = sub.add_parser("algebra").add_subparsers(dest="action", required=True)
    p = alg.add_parser("check", help="analyze the algebra of a rule")
    common(p, 1e-9)
    p.add_argument("--samples", type=int, default=100)
    p.add_argument("--max-dim", type=int, default=algebra.MAX_ASSOC_DIM)
    p.set_defaults(func=cmd_algebra_check)

    flow = sub.add_parser("flow").add_subparsers(dest="action", required=True)
    p = flow.add_parser("verify", help="Kolmogorov-Chapman residuals on a grid")
    common(p, 1e-8)
    p.add_argument("--grid", default="standard", help="'standard' or 's,tau,t;s,tau,t;...'")
    p.set_defaults(func=cmd_flow_verify)
    p = flow.add_parser("evolve", help="emit M[s,t] over a range of t as CSV")
    common(p, 1e-8)
    p.add_argument("--s", type=float, default=0.0)
    p.add_argument("--t-start", type=float)
    p.add_argument("--t-end", type=float)
    p.add_argument("--step", type=float)
    p.set_defaults(func=cmd_flow_evolve)

    p = sub.add_parser("exp", help="exp_mu(tQ) for a rule document with a Q field")
    common(p, 1e-12)
    p.add_argument("--t", type=float, default=1.0)
    p.add_argument("--oracle", action="store_true", help="cross-check against RK4")
    p.add_argument("--steps", type=int, default=1000)
    p.add_argument("--oracle-tol", type=float, default=1e-8)
    p.set_defaults(func=cmd_exp)

    pde = sub.add_parser("pde").add_subparsers(dest="action", required=True)
    p = pde.add_parser("check", help="forward/backward equation residuals")
    common(p, 1e-6)
    p.add_argument("--h", type=float, default=DEFAULT_H)
    p.add_argument("--grid", default="standard")
    p.set_defaults(func=cmd_pde_check)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except AxiomError as exc:
        print(f"error: {exc} (witness {exc.witness})", file=sys.stderr)
    except ConstraintError as exc:
        print(f"error: constraint violated: {exc}", file=sys.stderr)
    except (ConfigError, ExpressionError, DomainError, algebra.DimensionGuardError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
    return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
