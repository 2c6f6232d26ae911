"""Command line entry point.

    bistackel verify|show|integrate|hj|export|catalog <spec> [options]

``<spec>`` is a spec file path or the name of a built-in system.  Exit codes:
0 success, 1 a check failed, 2 bad input, 3 numerical domain error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__, checks
from .control import structure_mask, superdiagonal_mask
from .corpus import builtin_systems
from .errors import InputError, IntegrationAborted, NumericalError
from .flows import conservation_report, integrate
from .hj import QuadraticClassData, default_start, linearization_check
from .poisson import SCHOUTEN_NORMALIZATION, canonical_bivector
from .sampling import sample_points
from .specfile import dump_spec, load_spec
from .stackel import SeparationSystem, collision_guard, hamiltonian_field

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_NUMERIC = 0, 1, 2, 3


def resolve_system(spec: str) -> SeparationSystem:
    path = Path(spec)
    if path.exists():
        return load_spec(path)
    systems = builtin_systems()
    if spec in systems:
        return systems[spec]
    raise InputError(f"{spec!r} is neither a spec file nor a built-in system ({', '.join(systems)})")


def _floats(text: str, what: str) -> np.ndarray:
    try:
        return np.array([float(v) for v in text.split(",")])
    except ValueError:
        raise InputError(f"{what} must be comma-separated numbers") from None


def _emit(payload: dict, path: str | None) -> None:
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if path:
        Path(path).write_text(text)
    else:
        sys.stdout.write(text)


def _environment(seed: int) -> dict:
    return {"package_version": __version__, "numpy_version": np.__version__, "seed": seed}


def verify_report(system: SeparationSystem, samples: int = checks.DEFAULT_SAMPLES,
                  seed: int = checks.DEFAULT_SEED, tol: float = checks.DEFAULT_TOL, ids=None) -> dict:
    selected = checks.select(ids)
    points = sample_points(system, samples, seed=seed, extended=True)
    records = checks.run_checks(system, points, selected, seed=seed, tol=tol)
    return {
        "schema_version": 1,
        "system": {"name": system.name, "n": system.n, "m": system.m, "partition": list(system.partition)},
        "samples": samples,
        "seed": seed,
        "base_tolerance": tol,
        "residual_normalization": "max |residual| / (1 + max |term|)",
        "schouten_normalization": SCHOUTEN_NORMALIZATION,
        "checks": records,
        "passed": all(r["pass"] for r in records),
        "environment": _environment(seed),
    }


def cmd_verify(args) -> int:
    system = resolve_system(args.spec)
    ids = [c.strip() for c in args.checks.split(",") if c.strip()] if args.checks else None
    report = verify_report(system, args.samples, args.seed, args.tol, ids)
    _emit(report, args.report)
    for r in report["checks"]:
        status = "PASS" if r["pass"] else "FAIL"
        print(f"{status} {r['id']:<30} max {r['max_residual']:.3e}  tol {r['tolerance']:.0e}", file=sys.stderr)
    return EXIT_OK if report["passed"] else EXIT_FAIL


def sparsity_map(partition) -> list[str]:
    ones = superdiagonal_mask(partition)
    free = structure_mask(partition) & ~ones
    rows = []
    for i in range(len(ones)):
        rows.append(" ".join("1" if ones[i, j] else "*" if free[i, j] else "." for j in range(len(ones))))
    return rows


def chain_layout(system: SeparationSystem) -> list[str]:
    out = []
    for k, nk in enumerate(system.partition, start=1):
        links = [f"h0^({k}) = c{k}"] + [f"h{i}^({k})" for i in range(1, nk + 1)]
        out.append(" -> ".join(links))
    return out


def cmd_show(args) -> int:
    s = resolve_system(args.spec)
    print(f"system    {s.name}")
    if s.description:
        print(f"about     {s.description}")
    print(f"n         {s.n}")
    print(f"m         {s.m}")
    print(f"partition {', '.join(map(str, s.partition))}")
    print(f"charts    {', '.join(c.name for c in s.charts) or '-'}")
    print("control matrix pattern (1 = unit, * = free first column, . = zero):")
    for row in sparsity_map(s.partition):
        print("  " + row)
    print("chains on the extended space (pi_0 Casimir first, pi_1 Casimir last):")
    for line in chain_layout(s):
        print("  " + line)
    return EXIT_OK


def _start(system, x0_text, seed):
    if x0_text:
        x0 = _floats(x0_text, "--x0")
        if len(x0) != 2 * system.n:
            raise InputError(f"--x0 needs {2 * system.n} values, got {len(x0)}")
        return x0
    return sample_points(system, 1, seed=seed)[0]


def _flow_index(system, k):
    if not 1 <= k <= system.n:
        raise InputError(f"--flow must lie in 1..{system.n}")
    return k - 1


def cmd_integrate(args) -> int:
    s = resolve_system(args.spec)
    k = _flow_index(s, args.flow)
    x0 = _start(s, args.x0, args.seed)
    fields = [hamiltonian_field(s, j) for j in range(s.n)]
    try:
        traj = integrate(canonical_bivector(s.n), fields[k], x0, args.t_max, args.dt,
                         guard=collision_guard(s.n, x0))
    except IntegrationAborted as exc:
        if args.output and exc.trajectory is not None:
            exc.trajectory.to_csv(args.output)
        raise
    if args.output:
        traj.to_csv(args.output)
    drift = conservation_report(traj, [f.value for f in fields])
    tol = args.tol if args.tol is not None else 1e-6
    report = {
        "system": s.name,
        "flow": args.flow,
        "x0": [float(v) for v in x0],
        "t_max": args.t_max,
        "dt": args.dt,
        "steps": len(traj.times) - 1,
        "drift": {f"H{j + 1}": float(d) for j, d in enumerate(drift)},
        "tolerance": tol,
        "passed": bool(max(drift) <= tol),
        "environment": _environment(args.seed),
    }
    _emit(report, args.report)
    return EXIT_OK if report["passed"] else EXIT_FAIL


def cmd_hj(args) -> int:
    s = resolve_system(args.spec)
    data = QuadraticClassData.from_system(s)
    _flow_index(s, args.flow)
    x0 = _floats(args.x0, "--x0") if args.x0 else default_start(data, args.seed)
    if len(x0) != 2 * s.n:
        raise InputError(f"--x0 needs {2 * s.n} values, got {len(x0)}")
    res = linearization_check(data, args.flow, x0, t_max=args.t_max, dt=args.dt)
    tol = args.tol if args.tol is not None else 1e-3
    report = {
        "system": s.name,
        "flow": args.flow,
        "x0": [float(v) for v in x0],
        "t_max": res.t_max,
        "horizon_shrunk": res.shrunk,
        "dt": args.dt,
        "slopes": res.table(),
        "max_slope_error": res.slope_error,
        "energy_drift": res.energy_drift,
        "branch_error": res.branch_error,
        "tolerance": tol,
        "passed": bool(res.slope_error <= tol),
        "environment": _environment(args.seed),
    }
    _emit(report, args.report)
    return EXIT_OK if report["passed"] else EXIT_FAIL


def cmd_export(args) -> int:
    text = dump_spec(resolve_system(args.spec))
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_catalog(args) -> int:
    text = checks.catalog_markdown()
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="bistackel", description=__doc__.split("\n\n")[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    def spec_cmd(name, help_text):
        sp = sub.add_parser(name, help=help_text)
        sp.add_argument("spec", help="spec file or built-in system name")
        sp.add_argument("--seed", type=int, default=checks.DEFAULT_SEED)
        return sp

    v = spec_cmd("verify", "run the verification battery")
    v.add_argument("--samples", type=int, default=checks.DEFAULT_SAMPLES)
    v.add_argument("--tol", type=float, default=checks.DEFAULT_TOL)
    v.add_argument("--checks", default=None, help="comma-separated check ids")
    v.add_argument("--report", default=None, help="JSON report path (default stdout)")
    v.set_defaults(func=cmd_verify)

    spec_cmd("show", "print structure of a system").set_defaults(func=cmd_show)

    i = spec_cmd("integrate", "integrate a Hamiltonian flow")
    i.add_argument("--flow", type=int, default=1)
    i.add_argument("--x0", default=None, help="l1..ln,m1..mn")
    i.add_argument("--t-max", type=float, default=1.0)
    i.add_argument("--dt", type=float, default=1e-3)
    i.add_argument("--tol", type=float, default=None, help="allowed normalized drift (default 1e-6)")
    i.add_argument("--output", default=None, help="trajectory CSV path")
    i.add_argument("--report", default=None)
    i.set_defaults(func=cmd_integrate)

    h = spec_cmd("hj", "Hamilton-Jacobi linearization check")
    h.add_argument("--flow", type=int, default=1)
    h.add_argument("--x0", default=None)
    h.add_argument("--t-max", type=float, default=0.1)
    h.add_argument("--dt", type=float, default=1e-4)
    h.add_argument("--tol", type=float, default=None, help="allowed slope error (default 1e-3)")
    h.add_argument("--report", default=None)
    h.set_defaults(func=cmd_hj)

    e = spec_cmd("export", "write a system as a spec file")
    e.add_argument("--output", default=None)
    e.set_defaults(func=cmd_export)

    c = sub.add_parser("catalog", help="print the check catalog (markdown)")
    c.add_argument("--output", default=None)
    c.set_defaults(func=cmd_catalog)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
