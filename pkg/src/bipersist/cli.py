"""Command-line front end: slice diagrams, distance heatmaps, monodromy
groups, coherent distances, and singular-pair scans.

Outputs are deterministic: identical inputs and flags produce
byte-identical files, independent of the thread count.
"""
from __future__ import annotations

import argparse
import json
import sys
import tempfile
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import examples
from .bifiltration import (ComplexError, ParamPoint, SimplicialBifiltration,
                           load_complex)
from .coherent_distance import (SampleSpec, coherent_distance_report,
                                monodromy_group, save_heatmap, save_report)
from .diagram_metric import CapExceeded, bottleneck_distance
from .parameter_space import (ParameterRegion, detect_singular_pairs,
                              load_region, save_reports)
from .persistence import diagram_at, save_diagram_csv
from .transport import (RegionViolation, SingularityEncountered,
                        TransportConfig, TransportConsistencyError)

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_COMPUTE = 3

_COMPUTE_ERRORS = (SingularityEncountered, RegionViolation,
                   TransportConsistencyError, CapExceeded, RuntimeError,
                   AssertionError, ArithmeticError)
_INPUT_ERRORS = (ComplexError, ValueError, KeyError, TypeError, OSError,
                 json.JSONDecodeError)


class CliInputError(ValueError):
    """Bad flag combination or malformed input file."""


def _load_function(args, suffix: str = "") -> SimplicialBifiltration:
    example_id = getattr(args, "example" + suffix, None)
    input_path = getattr(args, "input" + suffix, None)
    if (example_id is None) == (input_path is None):
        which = "second function" if suffix else "function"
        raise CliInputError(
            f"exactly one of --example{suffix}/--input{suffix} must name "
            f"the {which}")
    if input_path is not None:
        return load_complex(input_path)
    bounds = None
    if getattr(args, "bounds", None):
        lo, hi = (float(v) for v in args.bounds.split(","))
        bounds = (lo, hi)
    return examples.example(example_id, resolution=args.resolution,
                            bounds=bounds)


def _load_pair(args):
    bif_f = _load_function(args)
    if args.perturb is not None:
        if args.example2 or args.input2:
            raise CliInputError(
                "--perturb replaces --example2/--input2, not both")
        return bif_f, examples.perturbed(bif_f, args.perturb)
    if not (args.example2 or args.input2):
        raise CliInputError(
            "second function required: --example2, --input2 or --perturb")
    return bif_f, _load_function(args, "2")


def _parse_rect(text: str) -> tuple[float, float, float, float]:
    parts = [float(v) for v in text.split(",")]
    if len(parts) != 4:
        raise CliInputError("--rect needs a0,a1,b0,b1")
    return tuple(parts)


def _emit(saver, out_path) -> None:
    """Write through the given saver; stream to stdout when no --out."""
    if out_path is not None:
        saver(out_path)
        return
    with tempfile.NamedTemporaryFile(suffix=".out") as tmp:
        saver(tmp.name)
        with open(tmp.name, "rb") as fh:
            sys.stdout.buffer.write(fh.read())
            sys.stdout.flush()


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def cmd_diagram(args) -> int:
    bif = _load_function(args)
    p = ParamPoint(args.a, args.b)
    diagram = diagram_at(bif, p, args.degree)
    _emit(lambda path: save_diagram_csv(path, [diagram]), args.out)
    return EXIT_OK


_SWEEP_STATE: dict = {}


def _sweep_init(bif_f, bif_g, degree):
    _SWEEP_STATE["job"] = (bif_f, bif_g, degree)


def _sweep_cell(task):
    idx, a, b = task
    bif_f, bif_g, degree = _SWEEP_STATE["job"]
    p = ParamPoint(a, b)
    value, _ = bottleneck_distance(diagram_at(bif_f, p, degree),
                                   diagram_at(bif_g, p, degree))
    return idx, a, b, value


def cmd_heatmap(args) -> int:
    if args.grid < 2:
        raise CliInputError("--grid must be at least 2")
    bif_f, bif_g = _load_pair(args)
    a0, a1, b0, b1 = _parse_rect(args.rect)
    tasks = []
    idx = 0
    for a in np.linspace(a0, a1, args.grid):
        for b in np.linspace(b0, b1, args.grid):
            p = ParamPoint(float(a), float(b))  # validates the rect
            tasks.append((idx, p.a, p.b))
            idx += 1
    if args.threads > 1:
        with ProcessPoolExecutor(
                max_workers=args.threads, initializer=_sweep_init,
                initargs=(bif_f, bif_g, args.degree)) as pool:
            rows = sorted(pool.map(_sweep_cell, tasks, chunksize=16))
    else:
        _sweep_init(bif_f, bif_g, args.degree)
        rows = [_sweep_cell(t) for t in tasks]
    table = [(a, b, value) for _, a, b, value in rows]
    _emit(lambda path: save_heatmap(table, path), args.out)
    return EXIT_OK


def cmd_monodromy(args) -> int:
    bif = _load_function(args)
    region = load_region(args.region)
    basepoint = ParamPoint(args.a, args.b)
    cfg = TransportConfig(separation=region.separation)
    group = monodromy_group(bif, bif, args.degree, region, basepoint, cfg)
    payload = {
        "basepoint": {"a": basepoint.a, "b": basepoint.b},
        "degree": args.degree,
        "order": group.order,
        "elements": [{"f": list(pf), "g": list(pg)}
                     for pf, pg in group.elements],
        "separation": region.separation,
    }

    def write(path):
        with open(path, "w") as fh:
            json.dump(payload, fh, sort_keys=True)
            fh.write("\n")

    _emit(write, args.out)
    return EXIT_OK


def cmd_cohdist(args) -> int:
    bif_f, bif_g = _load_pair(args)
    region = load_region(args.region)
    basepoint = ParamPoint(args.a, args.b)
    cfg = TransportConfig(separation=region.separation)
    spec = SampleSpec(interior_n=args.interior, boundary_n=args.boundary,
                      half_width_n=args.halfwidth)
    report = coherent_distance_report(bif_f, bif_g, args.degree, region,
                                      basepoint, spec, cfg,
                                      enumeration_cap=args.cap)
    _emit(lambda path: save_report(report, path), args.out)
    return EXIT_OK


def cmd_singular(args) -> int:
    if args.grid < 2:
        raise CliInputError("--grid must be at least 2")
    bif = _load_function(args)
    rect = _parse_rect(args.rect)
    reports = detect_singular_pairs(bif, args.degree, rect,
                                    grid_n=args.grid,
                                    refine_tol=args.refine_tol)
    _emit(lambda path: save_reports(reports, path), args.out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------

def _add_function_flags(sub, second: bool = False):
    sub.add_argument("--example", choices=examples.EXAMPLE_IDS,
                     help="built-in surface id")
    sub.add_argument("--input", help="complex JSON file")
    sub.add_argument("--resolution", type=int, default=32,
                     help="mesh density for built-in surfaces")
    sub.add_argument("--bounds", help="x0,x1 domain bounds (strip surface)")
    if second:
        sub.add_argument("--example2", choices=examples.EXAMPLE_IDS,
                         help="second built-in surface")
        sub.add_argument("--input2", help="second complex JSON file")
        sub.add_argument("--perturb", type=float,
                         help="compare against a perturbation of this "
                              "magnitude instead of a second input")


def _add_common_flags(sub):
    sub.add_argument("--degree", type=int, default=0)
    sub.add_argument("--out", help="output path (stdout when omitted)")
    sub.add_argument("--threads", type=int, default=1)
    sub.add_argument("--seed", type=int, default=0,
                     help="reserved for randomized harnesses; never "
                          "affects results")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bipersist",
        description="Two-parameter persistence: slice diagrams, matching "
                    "distances, monodromy and coherent distances.")
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("diagram", help="slice diagram at one (a, b)")
    _add_function_flags(p)
    p.add_argument("--a", type=float, required=True)
    p.add_argument("--b", type=float, required=True)
    _add_common_flags(p)
    p.set_defaults(func=cmd_diagram)

    p = subs.add_parser("heatmap",
                        help="bottleneck distance over an (a, b) grid")
    _add_function_flags(p, second=True)
    p.add_argument("--rect", required=True, help="a0,a1,b0,b1")
    p.add_argument("--grid", type=int, required=True)
    _add_common_flags(p)
    p.set_defaults(func=cmd_heatmap)

    p = subs.add_parser("monodromy",
                        help="loop-induced permutation group of a region")
    _add_function_flags(p)
    p.add_argument("--region", required=True, help="region JSON file")
    p.add_argument("--a", type=float, required=True,
                   help="basepoint a")
    p.add_argument("--b", type=float, required=True,
                   help="basepoint b")
    _add_common_flags(p)
    p.set_defaults(func=cmd_monodromy)

    p = subs.add_parser("cohdist",
                        help="coherent matching distance over a region")
    _add_function_flags(p, second=True)
    p.add_argument("--region", required=True, help="region JSON file")
    p.add_argument("--a", type=float, required=True, help="basepoint a")
    p.add_argument("--b", type=float, required=True, help="basepoint b")
    p.add_argument("--interior", type=int, default=5)
    p.add_argument("--boundary", type=int, default=8)
    p.add_argument("--halfwidth", type=int, default=8)
    p.add_argument("--cap", type=int, default=12,
                   help="diagram size cap for matching enumeration")
    _add_common_flags(p)
    p.set_defaults(func=cmd_cohdist)

    p = subs.add_parser("singular",
                        help="scan a parameter rectangle for singular pairs")
    _add_function_flags(p)
    p.add_argument("--rect", required=True, help="a0,a1,b0,b1")
    p.add_argument("--grid", type=int, default=24)
    p.add_argument("--refine-tol", type=float, default=5e-3)
    _add_common_flags(p)
    p.set_defaults(func=cmd_singular)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except _COMPUTE_ERRORS as exc:
        print(f"computation failed: {exc}", file=sys.stderr)
        return EXIT_COMPUTE
    except _INPUT_ERRORS as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
