"""Command line: ``bockstein run <spec-file> [options]``.

Exit codes: 0 success, 2 invalid input, 3 certified mathematical failure,
4 input/output error.
"""
import argparse
import os
import re
import sys
from importlib import resources

from ..errors import WindowTooSmall
from .emit import emit
from .run import PhaseError, RunReport, run
from .spec import (ProblemSpec, SpecError, SpecSyntaxError, SpecValidationError, parse_spec,
                   print_spec)

EXIT_OK, EXIT_INVALID, EXIT_MATH, EXIT_IO = 0, 2, 3, 4
# reported but never turned into a failing exit code
INFORMATIONAL = ("parity_collapse", "linearity_observed")

__all__ = ["main", "run", "emit", "parse_spec", "print_spec", "preset_names", "preset_text",
           "ProblemSpec", "RunReport", "SpecError", "SpecSyntaxError", "SpecValidationError",
           "PhaseError"]


def preset_names():
    files = resources.files("bockstein.cli").joinpath("presets").iterdir()
    return sorted(f.name[:-5] for f in files if f.name.endswith(".spec"))


def preset_text(name):
    path = resources.files("bockstein.cli").joinpath("presets", f"{name}.spec")
    if not path.is_file():
        raise KeyError(f"unknown preset {name!r}; available: {', '.join(preset_names())}")
    return path.read_text(encoding="utf-8")


def _parser():
    ap = argparse.ArgumentParser(prog="bockstein",
                                 description="Exact Bockstein spectral sequence pages.")
    sub = ap.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run a problem description")
    r.add_argument("spec_file", nargs="?", help="problem description file")
    r.add_argument("--preset", help="use a bundled problem description instead of a file")
    r.add_argument("--window", help="degree range a..b")
    r.add_argument("--max-filtration", type=int, help="largest filtration s")
    r.add_argument("--max-page", type=int, help="last page r")
    r.add_argument("--mode", choices=["comodule", "presentation"])
    r.add_argument("--emit", help="comma separated formats: json, table, svg")
    r.add_argument("--out", help="output directory")
    sub.add_parser("presets", help="list bundled problem descriptions")
    return ap


def _apply_overrides(spec, args):
    kw = {}
    if args.window:
        m = re.fullmatch(r"\s*(-?\d+)\s*\.\.\s*(-?\d+)\s*", args.window)
        if not m or int(m.group(1)) > int(m.group(2)):
            raise SpecValidationError([(0, 0, f"--window must look like a..b, got {args.window!r}")])
        kw["degrees"] = (int(m.group(1)), int(m.group(2)))
    if args.max_filtration is not None:
        if args.max_filtration < 1:
            raise SpecValidationError([(0, 0, "--max-filtration must be at least 1")])
        kw["s_max"] = args.max_filtration
    if args.max_page is not None:
        if args.max_page < 1:
            raise SpecValidationError([(0, 0, "--max-page must be at least 1")])
        kw["r_max"] = args.max_page
    if args.mode:
        kw["mode"] = args.mode
    if args.emit:
        kw["formats"] = tuple(f.strip() for f in args.emit.split(",") if f.strip())
    if args.out:
        kw["path"] = args.out
    if not kw:
        return spec
    # re-validate the combined description so overrides get the same checks
    return parse_spec(print_spec(spec.replace(**kw)))


def _err(msg):
    print(f"bockstein: {msg}", file=sys.stderr)


def main(argv=None):
    args = _parser().parse_args(argv)
    if args.command == "presets":
        print("\n".join(preset_names()))
        return EXIT_OK
    if bool(args.spec_file) == bool(args.preset):
        _err("give exactly one of a spec file or --preset")
        return EXIT_INVALID
    try:
        if args.preset:
            text = preset_text(args.preset)
        else:
            with open(args.spec_file, encoding="utf-8") as fh:
                text = fh.read()
    except KeyError as exc:
        _err(exc.args[0])
        return EXIT_INVALID
    except OSError as exc:
        _err(f"cannot read {args.spec_file}: {exc.strerror}")
        return EXIT_IO
    try:
        spec = _apply_overrides(parse_spec(text), args)
    except SpecError as exc:
        source = args.spec_file or args.preset
        for line, col, msg in exc.errors:
            _err(f"{source}:{line}:{col}: {msg}" if line else f"{source}: {msg}")
        return EXIT_INVALID
    try:
        report = run(spec)
    except PhaseError as exc:
        _err(str(exc))
        # a window that cannot hold the problem is an input error, anything
        # else raised by the engine is a certified failure
        return EXIT_INVALID if isinstance(exc.cause, WindowTooSmall) else EXIT_MATH
    except ValueError as exc:
        _err(f"invalid problem: {exc}")
        return EXIT_INVALID
    try:
        paths = emit(report, spec.formats, spec.path)
    except OSError as exc:
        _err(f"cannot write output to {spec.path}: {exc.strerror or exc}")
        return EXIT_IO
    failed = [k for k, c in report.certificates.items()
              if isinstance(c, dict) and c.get("ok") is False and k not in INFORMATIONAL]
    for k, c in report.certificates.items():
        status = {True: "ok", False: "not certified", None: "inconclusive"}[c.get("ok")]
        print(f"{k:<24}{status}")
    for p in paths:
        print(f"wrote {os.path.relpath(p)}")
    if failed:
        _err("certificates failed: " + ", ".join(failed))
        return EXIT_MATH
    return EXIT_OK
