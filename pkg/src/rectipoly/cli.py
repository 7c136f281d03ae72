"""Command-line front end: ``rectipoly build | analyze | unfold | lemma-sweep``.

Exit codes: 0 success, 2 bad flags or unreadable input, 3 construction
failure or unrealizable star pattern, 4 invalid mesh. ``lemma-sweep``
exits 1 when any local-constraint violation is found.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import __version__
from .constructions import (
    ConstructionSelfCheck,
    OctopusParams,
    StarGadgetSpec,
    UnrealizablePattern,
    make_cube,
    make_frame_torus,
    make_octopus,
    make_octopus_cubes,
    make_star_gadget,
)
from .mesh import MeshError
from .objio import ParseError, export_obj, import_obj
from .ortho import RECTILINEAR_TOL
from .report import analyze, summary_lines
from .sphere import lemma_sweep
from .unfold import MM_PER_UNIT, Strategy, export_svg, overlap_status, unfold, unfold_summary

EXIT_OK = 0
EXIT_VIOLATION = 1
EXIT_USAGE = 2
EXIT_CONSTRUCTION = 3
EXIT_BAD_MESH = 4

MODELS = ("cube", "frame-torus", "octopus", "octopus-cubes", "star:<pattern>")


class CliError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def default_tol() -> float:
    raw = os.environ.get("RECTIPOLY_TOL")
    if raw is None:
        return RECTILINEAR_TOL
    try:
        tol = float(raw)
    except ValueError:
        raise CliError(EXIT_USAGE, f"RECTIPOLY_TOL is not a number: {raw!r}") from None
    if not tol > 0:
        raise CliError(EXIT_USAGE, "RECTIPOLY_TOL must be positive")
    return tol


def _positive(text: str) -> float:
    x = float(text)
    if not x > 0:
        raise argparse.ArgumentTypeError(f"must be positive, got {text}")
    return x


def _degrees(text: str) -> list[int]:
    try:
        lo, hi = (int(x) for x in text.split("..")) if ".." in text else (int(text),) * 2
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a..b, got {text!r}") from None
    if lo < 3 or hi < lo:
        raise argparse.ArgumentTypeError("degrees need 3 <= a <= b")
    return list(range(lo, hi + 1))


def _write(text: str, out: str | None) -> None:
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def _load(path: str):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise CliError(EXIT_USAGE, f"cannot read {path}: {exc}") from None
    try:
        return import_obj(text)
    except ParseError as exc:
        raise CliError(EXIT_USAGE, f"{path}: {exc}") from None
    except MeshError as exc:
        raise CliError(EXIT_BAD_MESH, f"{path}: {type(exc).__name__}: {exc}") from None


def cmd_build(args) -> int:
    model = args.model
    try:
        if model == "cube":
            mesh = make_cube(args.size)
        elif model == "frame-torus":
            mesh = make_frame_torus(3 * args.size, args.size, args.size)
        elif model == "octopus":
            mesh = make_octopus(OctopusParams(args.L))
        elif model == "octopus-cubes":
            mesh = make_octopus_cubes(OctopusParams(args.L))
        elif model.startswith("star:"):
            spec = StarGadgetSpec(model[5:], args.size)
            mesh, _ = make_star_gadget(spec, seed=args.seed)
        else:
            raise CliError(EXIT_USAGE, f"unknown model {model!r}; choose from {', '.join(MODELS)}")
    except ValueError as exc:
        raise CliError(EXIT_USAGE, str(exc)) from None
    except (ConstructionSelfCheck, UnrealizablePattern) as exc:
        raise CliError(EXIT_CONSTRUCTION, f"{type(exc).__name__}: {exc}") from None
    _write(export_obj(mesh), args.out)
    if args.out not in (None, "-"):
        print(f"wrote {model} ({mesh.n_vertices} vertices, {mesh.n_faces} faces) to {args.out}")
    return EXIT_OK


def cmd_analyze(args) -> int:
    tol = args.tol if args.tol is not None else default_tol()
    mesh = _load(args.input)
    try:
        report = analyze(mesh, tol)
    except MeshError as exc:
        raise CliError(EXIT_BAD_MESH, str(exc)) from None
    print("\n".join(summary_lines(report)))
    if args.json:
        _write(report.to_json(), args.json)
    return EXIT_OK


def cmd_unfold(args) -> int:
    tol = args.tol if args.tol is not None else default_tol()
    mesh = _load(args.input)
    if not 0 <= args.root < mesh.n_faces:
        raise CliError(EXIT_USAGE, f"root face {args.root} out of range 0..{mesh.n_faces - 1}")
    try:
        net = unfold(mesh, args.root, Strategy(args.strategy))
    except MeshError as exc:
        raise CliError(EXIT_BAD_MESH, str(exc)) from None
    status = overlap_status(net, tol)
    info = unfold_summary(mesh, net)
    print(status.name)
    print(
        f"panels={info['panels']} folds={info['folds']} cuts={info['cuts']} "
        f"cut_excess={info['cut_excess']} overlapping_pairs={len(status.overlapping)} "
        f"touching_pairs={len(status.touching)}"
    )
    if args.svg:
        _write(export_svg(net, args.mm_per_unit), args.svg)
    return EXIT_OK


def cmd_lemma_sweep(args) -> int:
    tol = args.tol if args.tol is not None else default_tol()
    result = lemma_sweep(args.samples, args.degrees, args.seed, tol, args.rectilinear_prob)
    print(f"samples={result.samples} sampling_failures={result.sampling_failures}")
    print("degree: red-count histogram")
    for n in sorted(result.histogram):
        row = " ".join(f"{k}:{v}" for k, v in sorted(result.histogram[n].items()))
        print(f"  {n}: {row}")
    totals = result.red_count_totals()
    print("red-count totals: " + " ".join(f"{k}:{v}" for k, v in sorted(totals.items())))
    print(
        f"two-red antipodal={result.two_red_antipodal} four-red plus={result.four_red_plus} "
        f"red runs checked={result.runs_checked} run failures={result.run_failures}"
    )
    print(f"violations={len(result.violations)}")
    if args.json:
        payload = {
            "samples": result.samples,
            "seed": args.seed,
            "degrees": list(args.degrees),
            "histogram": {
                str(n): {str(k): v for k, v in sorted(c.items())} for n, c in sorted(result.histogram.items())
            },
            "violations": [{"sample": s, "lemma": lemma} for s, lemma in result.violations],
            "sampling_failures": result.sampling_failures,
            "run_failures": result.run_failures,
        }
        _write(json.dumps(payload, indent=2) + "\n", args.json)
    return EXIT_OK if result.ok else EXIT_VIOLATION


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rectipoly", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build", help="build a model and write it as OBJ")
    p.add_argument("model", help=" | ".join(MODELS))
    p.add_argument("--L", type=_positive, default=3.0, help="octopus prism length (> sqrt 2)")
    p.add_argument("--size", type=_positive, default=1.0, help="cube side, torus hole side, star edge length")
    p.add_argument("--seed", type=int, default=None, help="seed for star gadgets")
    p.add_argument("--out", default=None, help="output OBJ path (default stdout)")
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("analyze", help="topology, dihedrals, certificate and red-graph audit")
    p.add_argument("input", help="OBJ file of a closed mesh")
    p.add_argument("--tol", type=_positive, default=None, help="rectilinearity tolerance (rad)")
    p.add_argument("--json", default=None, help="write the JSON report here")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("unfold", help="edge-unfold into a net and classify overlap")
    p.add_argument("input", help="OBJ file of a closed mesh")
    p.add_argument("--strategy", choices=[s.value for s in Strategy], default="bfs")
    p.add_argument("--root", type=int, default=0, help="root face index")
    p.add_argument("--svg", default=None, help="write the net as SVG here")
    p.add_argument("--mm-per-unit", type=_positive, default=MM_PER_UNIT)
    p.add_argument("--tol", type=_positive, default=None, help="overlap tolerance relative to net scale")
    p.set_defaults(func=cmd_unfold)

    p = sub.add_parser("lemma-sweep", help="sample vertex links and check the local constraints")
    p.add_argument("--samples", type=int, default=10000)
    p.add_argument("--degrees", type=_degrees, default=list(range(3, 13)), help="range a..b")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--rectilinear-prob", type=float, default=0.5)
    p.add_argument("--tol", type=_positive, default=None)
    p.add_argument("--json", default=None, help="write the sweep result as JSON here")
    p.set_defaults(func=cmd_lemma_sweep)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "lemma-sweep":
        if args.samples < 1:
            parser.error("--samples must be at least 1")
        if not 0.0 <= args.rectilinear_prob <= 1.0:
            parser.error("--rectilinear-prob must lie in [0, 1]")
    try:
        return args.func(args)
    except CliError as exc:
        print(f"rectipoly: error: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
