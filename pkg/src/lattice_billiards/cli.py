"""Command-line front end.

Exit codes: 0 success, 1 a requested check failed, 2 usage or input error,
3 the ray-tracing oracle disagreed with the lattice construction.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import time
from pathlib import Path
from typing import Sequence

from . import checks, helmholtz, orbits, raytrace, render, spectra
from .domains import CATALOG_SCHEMA, DomainId, InvalidInput, catalog_json, genus, get_domain

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2
EXIT_ORACLE = 3

OUTDIR_ENV = "LATTICE_BILLIARDS_OUTDIR"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise _UsageError(f"{self.prog}: error: {message}")


class _UsageError(Exception):
    pass


def output_dir() -> Path:
    return Path(os.environ.get(OUTDIR_ENV) or ".")


def _resolve(path: str) -> Path:
    p = Path(path)
    return p if p.is_absolute() else output_dir() / p


def parse_label(text: str) -> tuple[int, ...]:
    body = text.strip().strip("()[]")
    try:
        return tuple(int(c) for c in body.replace(" ", "").split(",") if c != "")
    except ValueError:
        raise InvalidInput(f"cannot parse label {text!r}; use e.g. 3,2") from None


def parse_labels(values: Sequence[str]) -> list[tuple[int, ...]]:
    out = []
    for v in values:
        out.extend(parse_label(part) for part in v.split(";") if part.strip())
    return out


def parse_point(text: str | None):
    if text is None:
        return None
    try:
        return [float(c) for c in text.split(",")]
    except ValueError:
        raise InvalidInput(f"cannot parse point {text!r}") from None


def _fmt_label(label) -> str:
    return "(" + ",".join(str(c) for c in label) + ")"


def _emit(args, text: str) -> None:
    if getattr(args, "output", None):
        path = _resolve(args.output)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
        print(path)
    else:
        sys.stdout.write(text)


def _json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=False) + "\n"


def _rows_csv(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


# --------------------------------------------------------------------------
# subcommands


def cmd_orbit(args) -> int:
    spec = get_domain(args.domain)
    label = parse_label(args.label)
    traj = orbits.fold_trajectory(spec, label, parse_point(args.start))
    info = {
        "domain": spec.id.value,
        "label": list(label),
        "vector": [str(c) for c in orbits.orbit_vector(spec, label)],
        "amplitude_squared": orbits.amplitude_squared(spec, label),
        "amplitude": traj.amplitude,
        "bounces": traj.bounces,
        "total_length": traj.total_length,
        "closed": traj.closed,
    }
    if spec.dimension == 2:
        info["collision_formula"] = orbits.collision_count(spec, label)
    status = EXIT_OK
    if args.verify:
        try:
            report = raytrace.verify_label(spec, label, traj.start)
            info["oracle"] = report.classification.value
        except raytrace.OracleDisagreement as exc:
            info["oracle"] = f"disagreement: {exc}"
            status = EXIT_ORACLE
    if args.format == "json":
        info["points"] = [[float(c) for c in p] for p in traj.points]
        _emit(args, _json(info))
    elif args.format == "csv":
        _emit(args, _rows_csv(["index"] + [f"x{i}" for i in range(spec.dimension)],
                              [[i] + [f"{c:.12g}" for c in p] for i, p in enumerate(traj.points)]))
    else:
        lines = [f"{k:18s} {v}" for k, v in info.items()]
        _emit(args, "\n".join(lines) + "\n")
    return status


def cmd_spectrum(args) -> int:
    if args.table5:
        return _spectrum_table5(args)
    if not args.domain:
        raise InvalidInput("--domain is required unless --table5 is given")
    spec = get_domain(args.domain)
    factor = spec.table_factor if args.times4 else 1
    entries = spectra.spectrum(spec, args.bc, args.count, include_zero_mode=args.include_zero_mode)
    if args.format == "json":
        _emit(args, _json({"domain": spec.id.value, "bc": args.bc, "factor": factor,
                           "levels": [dict(e.to_json(), energy=e.energy * factor) for e in entries]}))
    elif args.format == "csv":
        _emit(args, spectra.spectrum_csv(entries, factor))
    else:
        lines = [f"{i:4d} {e.energy * factor:8d} x{e.multiplicity}  " + " ".join(_fmt_label(l) for l in e.labels)
                 for i, e in enumerate(entries, start=1)]
        _emit(args, "\n".join(lines) + "\n")
    return EXIT_OK


def _spectrum_table5(args) -> int:
    columns = spectra.table5(args.count)
    if args.domain:
        dom = DomainId.parse(args.domain)
        if dom not in spectra.TABLE5_DOMAINS:
            raise InvalidInput("--table5 covers k-tetra, k2-tetra and k4-tetra")
        bcs = [spectra.BoundaryCondition.parse(args.bc)] if args.bc else list(spectra.BoundaryCondition)
        columns = {k: v for k, v in columns.items() if k[0] is dom and k[1] in bcs}
    keys = list(columns)
    if args.format == "json":
        _emit(args, _json({f"{d.value}:{bc.value}": v for (d, bc), v in columns.items()}))
        return EXIT_OK
    header = ["index"] + [f"{d.value}:{bc.value}" for d, bc in keys]
    rows = [[i + 1] + [columns[k][i] for k in keys] for i in range(args.count)]
    if args.format == "csv":
        _emit(args, _rows_csv(header, rows))
    elif len(keys) == 1:
        _emit(args, "\n".join(str(r[1]) for r in rows) + "\n")
    else:
        widths = [max(len(h), 6) for h in header]
        lines = ["  ".join(h.rjust(w) for h, w in zip(header, widths))]
        lines += ["  ".join(str(c).rjust(w) for c, w in zip(r, widths)) for r in rows]
        _emit(args, "\n".join(lines) + "\n")
    return EXIT_OK


def cmd_degeneracies(args) -> int:
    groups = orbits.enumerate_orbits(args.domain, args.max)
    if args.accidental_only:
        groups = [g for g in groups if g.accidental]
    if args.format == "json":
        _emit(args, _json([g.to_json() for g in groups]))
    elif args.format == "csv":
        _emit(args, orbits.degeneracy_csv(groups))
    else:
        lines = [
            f"{g.amplitude_squared:6d}: {{{', '.join(_fmt_label(l) for l in g.labels)}}}" + ("  accidental" if g.accidental else "")
            for g in groups
        ]
        _emit(args, "\n".join(lines) + "\n")
    return EXIT_OK


def cmd_verify(args) -> int:
    suites = checks.SUITES if args.suite == "all" else (args.suite,)
    dims = (2, 3) if args.dims == "all" else (int(args.dims[0]),)
    reports = []
    oracle_failed = False
    for suite in suites:
        t0 = time.perf_counter()
        for report in checks.run_suite(suite, seed=args.seed, max_value=args.max_value, dims=dims):
            report.detail = (report.detail + "; " if report.detail else "") + f"{time.perf_counter() - t0:.2f}s"
            reports.append(report)
            if suite == "oracle" and not report.passed:
                oracle_failed = True
            if args.format == "text":
                print(report.line())
                for c in report.counterexamples[: args.show]:
                    print(f"    {c}")
    passed = all(r.passed for r in reports)
    summary = {"passed": passed, "checks": [r.to_json() for r in reports]}
    if args.format == "json":
        _emit(args, _json(summary))
    else:
        print(f"{sum(r.passed for r in reports)}/{len(reports)} checks passed")
        if args.output:
            _resolve(args.output).write_text(_json(summary))
    if passed:
        return EXIT_OK
    return EXIT_ORACLE if oracle_failed else EXIT_CHECK_FAILED


def cmd_genus(args) -> int:
    angles = [a for a in args.angles.split(",") if a.strip()]
    g = genus(angles)
    if args.format == "json":
        _emit(args, _json({"angles": angles, "genus": g, "integrable": g == 1}))
    else:
        _emit(args, f"{g}\n")
    return EXIT_OK


def cmd_solve(args) -> int:
    if args.table5:
        return _solve_table5(args)
    spec = get_domain(args.domain)
    bc = spectra.BoundaryCondition.parse(args.bc)
    n = args.resolution or helmholtz.resolution_for_dofs(spec, bc, args.dofs)
    op = helmholtz.discretize(spec, bc, n, mass=args.mass)
    if args.mesh_dump:
        path = _resolve(args.mesh_dump)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(op.mesh.dump())
        print(path, file=sys.stderr)
    numeric = helmholtz.eigenvalues(op, args.k)
    rows = helmholtz.compare_values(numeric, helmholtz.analytic_values(spec, bc, args.k))
    ratio = helmholtz.ratio_errors(numeric, [r.analytic for r in rows])
    if args.format == "json":
        _emit(args, _json({"domain": spec.id.value, "bc": bc.value, "resolution": n, "dofs": op.dof_count,
                           "rows": [r.to_json() for r in rows], "ratio_errors": ratio.tolist()}))
    elif args.format == "csv":
        _emit(args, _rows_csv(["index", "analytic", "numeric", "relative_error", "ratio_error"],
                              [[r.index, r.analytic, f"{r.numeric:.6f}", f"{r.relative_error:.3e}", f"{e:.3e}"]
                               for r, e in zip(rows, ratio)]))
    else:
        lines = [f"# {spec.id.value} {bc.value}: n={n}, {op.dof_count} DOFs"]
        lines += [f"{r.index:4d} {r.analytic:6d} {r.numeric:12.4f} {r.relative_error:10.2e} {e:10.2e}" for r, e in zip(rows, ratio)]
        _emit(args, "\n".join(lines) + "\n")
    return EXIT_OK


def _solve_table5(args) -> int:
    columns = {}
    factors = {}
    for dom in spectra.TABLE5_DOMAINS:
        spec = get_domain(dom)
        factors[dom.value] = spec.table_factor
        for bc in spectra.BoundaryCondition:
            n = helmholtz.resolution_for_dofs(spec, bc, args.dofs)
            columns[(dom.value, bc.value)] = helmholtz.compare(spec, bc, args.k, n)
            print(f"solved {dom.value} {bc.value} (n={n})", file=sys.stderr)
    _emit(args, helmholtz.comparison_csv(columns, factors))
    return EXIT_OK


def cmd_render(args) -> int:
    spec = get_domain(args.domain)
    labels = parse_labels(args.label)
    if not labels:
        raise InvalidInput("give at least one --label")
    scene = render.build_scene(
        spec,
        labels,
        start=parse_point(args.start),
        unfolded=args.unfolded,
        layout="panels" if args.panels else "overlay",
        container=args.container,
        title=args.title or "",
    )
    suffix, doc = render.render(scene)
    name = args.output or f"{spec.id.value}_{'_'.join(''.join(map(str, l)) for l in labels)}{suffix}"
    path = _resolve(name)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(doc)
    print(path)
    return EXIT_OK


def cmd_catalog(args) -> int:
    _emit(args, _json(CATALOG_SCHEMA if args.schema else catalog_json()))
    return EXIT_OK


# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="lattice-billiards", description="Periodic orbits and spectra of integrable billiards.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, formats=("text", "json", "csv")):
        p.add_argument("--format", choices=formats, default="text")
        p.add_argument("--output", "-o", help=f"write to this file (relative paths go under ${OUTDIR_ENV})")

    p = sub.add_parser("orbit", help="fold a lattice label into a periodic orbit")
    p.add_argument("--domain", required=True)
    p.add_argument("--label", required=True, help="e.g. 3,2")
    p.add_argument("--start", help="launch point, e.g. 0.6667,0.3333")
    p.add_argument("--verify", action="store_true", help="also run the ray-tracing oracle")
    common(p)
    p.set_defaults(func=cmd_orbit)

    p = sub.add_parser("spectrum", help="closed-form Dirichlet/Neumann levels")
    p.add_argument("--domain")
    p.add_argument("--bc", choices=("dirichlet", "neumann"))
    p.add_argument("--count", type=int, default=40)
    p.add_argument("--table5", action="store_true", help="flat K, K/2, K/4 columns in the x4 K/4 convention")
    p.add_argument("--times4", action="store_true", help="multiply K/4 energies by 4")
    p.add_argument("--include-zero-mode", action="store_true", help="list the constant Neumann mode")
    common(p)
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("degeneracies", help="group orbit labels by amplitude squared")
    p.add_argument("--domain", required=True)
    p.add_argument("--max", type=int, required=True)
    p.add_argument("--accidental-only", action="store_true")
    common(p)
    p.set_defaults(func=cmd_degeneracies)

    p = sub.add_parser("verify", help="run the consistency suites")
    p.add_argument("--suite", choices=("all",) + checks.SUITES, default="all")
    p.add_argument("--dims", choices=("all", "2d", "3d"), default="all", help="dimensions for the oracle suite")
    p.add_argument("--seed", type=int, default=checks.DEFAULT_SEED)
    p.add_argument("--max-value", type=int, default=500)
    p.add_argument("--show", type=int, default=5, help="counterexamples printed per failing check")
    common(p, ("text", "json"))
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("genus", help="genus of a rational polygon")
    p.add_argument("--angles", required=True, help="interior angles in units of pi, e.g. 1/3,2/3,1/3,2/3")
    common(p, ("text", "json"))
    p.set_defaults(func=cmd_genus)

    p = sub.add_parser("solve", help="finite-element eigenvalues against the closed forms")
    p.add_argument("--domain")
    p.add_argument("--bc", choices=("dirichlet", "neumann"), default="dirichlet")
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--dofs", type=int, default=None, help="target degrees of freedom")
    p.add_argument("--resolution", type=int, help="subdivisions per reference edge (overrides --dofs)")
    p.add_argument("--mass", choices=helmholtz.MASS_KINDS, default=helmholtz.DEFAULT_MASS)
    p.add_argument("--mesh-dump", help="write the mesh in plain-text form")
    p.add_argument("--table5", action="store_true", help="AV/NV CSV for the three tetrahedra")
    common(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("render", help="write SVG (2D) or OBJ (3D) figures")
    p.add_argument("--domain", required=True)
    p.add_argument("--label", action="append", default=[], help="label; repeat or separate with ';'")
    p.add_argument("--start")
    p.add_argument("--unfolded", action="store_true", help="draw the mirror tiling and the straight segment")
    p.add_argument("--panels", action="store_true", help="one panel per label")
    p.add_argument("--container", action="store_true", help="3D: add the side-2 cube around the domain")
    p.add_argument("--title")
    p.add_argument("--output", "-o")
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("catalog", help="dump the domain catalog as JSON")
    p.add_argument("--schema", action="store_true", help="print the JSON schema instead")
    p.add_argument("--output", "-o")
    p.set_defaults(func=cmd_catalog)
    return parser


def run(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "solve":
            if not args.table5 and not args.domain:
                raise InvalidInput("--domain is required unless --table5 is given")
            if args.dofs is None:
                dim = 3 if args.table5 else get_domain(args.domain).dimension
                args.dofs = 50_000 if dim == 3 else 10_000
        return args.func(args)
    except _UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except InvalidInput as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except orbits.TerminalOrbit as exc:
        print(f"terminal orbit: {exc}; retry with a different --start", file=sys.stderr)
        return EXIT_CHECK_FAILED
    except raytrace.OracleDisagreement as exc:
        print(f"oracle disagreement: {exc}", file=sys.stderr)
        return EXIT_ORACLE
    except helmholtz.ConvergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CHECK_FAILED


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
