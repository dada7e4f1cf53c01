"""Command line entry point: ``quatsub check|classify|tensors|theorem|report|fixtures``."""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__, fixtures
from .errors import QuatsubError
from .expr import in_box
from .manifest import digest, load_manifest
from .quaternionic import TAGS
from .report import THEOREM_IDS, build_report, dumps, report_failures
from .submersion import DEFAULT_TOL, at

EXIT_OK, EXIT_FAILED, EXIT_INVALID = 0, 1, 2


class UsageError(Exception):
    pass


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    src = common.add_mutually_exclusive_group()
    src.add_argument("--manifest", type=Path, help="TOML fixture manifest")
    src.add_argument("--fixture", help="builtin fixture name (see `quatsub fixtures`)")
    common.add_argument("--tol", type=float, default=DEFAULT_TOL, help="verdict tolerance (default 1e-7)")
    common.add_argument("--samples", type=int, help="number of sample points (overrides the manifest)")
    common.add_argument("--seed", type=int, help="sampling seed (overrides the manifest)")
    common.add_argument("--json", dest="json_path", help="write the JSON report here ('-' for stdout)")
    common.add_argument("--timing", action="store_true", help="include wall time in the JSON report")

    parser = argparse.ArgumentParser(prog="quatsub", description=__doc__)
    parser.add_argument("--version", action="version", version=f"quatsub {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("fixtures", help="list builtin fixtures")
    sub.add_parser("check", parents=[common], help="validate the submersion and the structure")
    sub.add_parser("classify", parents=[common], help="h-anti-invariant / h-Lagrangian classification")
    tens = sub.add_parser("tensors", parents=[common], help="O'Neill tensors at one point")
    tens.add_argument("--point", required=True, help="comma-separated coordinates")
    thm = sub.add_parser("theorem", parents=[common], help="run one theorem check")
    thm.add_argument("theorem_id", help=f"one of: {', '.join(THEOREM_IDS)}")
    rep = sub.add_parser("report", parents=[common], help="full report")
    rep.add_argument("--all", action="store_true", help="run every theorem check (the default)")
    return parser


def _load(args):
    if args.manifest is not None:
        fixture, data = load_manifest(args.manifest)
        return fixture, digest(data)
    if args.fixture is None:
        raise UsageError("give --fixture NAME or --manifest PATH")
    try:
        data = fixtures.manifest_data(args.fixture)
    except KeyError as exc:
        raise UsageError(str(exc.args[0])) from exc
    return fixtures.load(args.fixture), digest(data)


def _write_json(report: dict, path: str | None):
    if path is None:
        return
    text = dumps(report)
    if path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _fmt(v) -> str:
    return np.array2string(np.asarray(v, dtype=float), precision=6, suppress_small=True, separator=", ")


def _summary_lines(report: dict) -> list[str]:
    lines = [f"fixture {report['fixture']}  ({report['samples']['count']} samples, seed {report['samples']['seed']})"]
    sub = report["submersion"]
    lines.append(
        f"submersion: {'Riemannian' if sub['is_riemannian'] else sub['message']} "
        f"(worst isometry defect {sub['worst_residual']:.3e})"
    )
    st = report.get("structure")
    if st is not None:
        status = "valid" if st["passed"] else "INVALID: " + ", ".join(st["failures"])
        lines.append(f"structure: {status}")
    cls = report.get("classification")
    if cls is not None:
        per = ", ".join(f"{t}: {cls['per_R'][t]}" for t in TAGS)
        lines.append(f"classification: {cls['overall']} ({per}; m={cls['m']}, n={cls['n']})")
        for note in cls["obstruction"]["notes"]:
            lines.append(f"  obstruction: {note}")
        if cls["offending_point"] is not None and cls["overall"] == "none":
            lines.append(f"  offending point #{cls['offending_index']}: {cls['offending_point']}")
    for tid, sec in (report.get("theorems") or {}).items():
        if isinstance(sec, dict) and "verdict" in sec:
            prop = sec.get("property_holds")
            lines.append(f"theorem {tid}: {sec['verdict']} (property holds: {prop})")
        elif isinstance(sec, dict) and "passed" in sec:
            worst = max(sec["worst"].values(), default=0.0)
            extra = f" [{sec['skipped']}]" if sec.get("skipped") else ""
            lines.append(f"theorem {tid}: {'pass' if sec['passed'] else 'fail'} (worst {worst:.3e}){extra}")
        elif isinstance(sec, dict) and "product" in sec:
            lines.append(f"theorem {tid}: {sec['label']}")
        elif isinstance(sec, list):
            bad = any(r["forbidden"] for r in sec)
            lines.append(f"theorem {tid}: {'VIOLATED' if bad else 'consistent'}")
    if "product_type" in report:
        lines.append(f"product: {report['product_label']}")
    return lines


def _tensors(fixture, point_csv: str) -> tuple[dict, list[str]]:
    try:
        p = np.array([float(v) for v in point_csv.split(",")])
    except ValueError as exc:
        raise UsageError(f"--point must be comma-separated numbers: {point_csv!r}") from exc
    if p.size != fixture.dim:
        raise UsageError(f"--point has {p.size} coordinates, fixture dimension is {fixture.dim}")
    if not in_box(p, fixture.box):
        raise UsageError(f"point {p.tolist()} lies outside the domain box")
    local = at(fixture, p)
    E, X = local.vertical_basis, local.horizontal_basis
    data = {
        "p": p,
        "vertical_basis": E.T,
        "horizontal_basis": X.T,
        "T[a][b]": [[local.T(E[:, a], E[:, b]) for b in range(E.shape[1])] for a in range(E.shape[1])],
        "A[a][b]": [[local.A(X[:, a], X[:, b]) for b in range(X.shape[1])] for a in range(X.shape[1])],
        "A_X V[a][c]": [[local.A(X[:, a], E[:, c]) for c in range(E.shape[1])] for a in range(X.shape[1])],
        "H": local.mean_curvature(),
        "H_perp": local.mean_curvature_perp(),
        "sff_trace": local.sff_trace(),
    }
    lines = [f"point {_fmt(p)}", f"vertical basis (columns) {_fmt(E.T)}", f"horizontal basis {_fmt(X.T)}"]
    for a in range(E.shape[1]):
        for b in range(E.shape[1]):
            lines.append(f"T(e{a + 1}, e{b + 1}) = {_fmt(data['T[a][b]'][a][b])}")
    for a in range(X.shape[1]):
        for b in range(X.shape[1]):
            lines.append(f"A(x{a + 1}, x{b + 1}) = {_fmt(data['A[a][b]'][a][b])}")
    lines += [f"H = {_fmt(data['H'])}", f"H_perp = {_fmt(data['H_perp'])}",
              f"trace of second fundamental form = {_fmt(data['sff_trace'])}"]
    return data, lines


def run(argv=None) -> int:
    parser = _parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_INVALID

    if args.command == "fixtures":
        for name, desc in fixtures.list_fixtures():
            print(f"{name:20s} {desc}")
        for alias, target in sorted(fixtures.ALIASES.items()):
            print(f"{alias:20s} alias of {target}")
        return EXIT_OK

    start = time.perf_counter()
    try:
        fixture, manifest_digest = _load(args)
        plan = fixture.samples.with_overrides(args.samples, args.seed)
        if args.command == "tensors":
            data, lines = _tensors(fixture, args.point)
            print("\n".join(lines))
            _write_json({"fixture": fixture.name, "manifest_digest": manifest_digest, "tensors": data},
                        args.json_path)
            return EXIT_OK
        theorem_ids = None
        if args.command == "theorem":
            if args.theorem_id not in THEOREM_IDS:
                raise UsageError(f"unknown theorem id {args.theorem_id!r}; known: {', '.join(THEOREM_IDS)}")
            theorem_ids = [args.theorem_id]
        report = build_report(fixture, manifest_digest, args.command, plan, args.tol, theorem_ids)
    except (UsageError, QuatsubError, ValueError) as exc:
        print(f"quatsub: error: {exc}", file=sys.stderr)
        return EXIT_INVALID

    elapsed = time.perf_counter() - start
    if args.timing:
        report["wall_time_seconds"] = elapsed
    failures = report_failures(report)
    out = sys.stderr if args.json_path == "-" else sys.stdout
    print("\n".join(_summary_lines(report)), file=out)
    print(f"wall time {elapsed:.2f} s", file=sys.stderr)
    if failures:
        print(f"FAILED: {', '.join(failures)}", file=out)
    _write_json(report, args.json_path)
    return EXIT_FAILED if failures else EXIT_OK


def main(argv=None) -> int:
    return run(argv)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
