"""Command line entry point.

Exit codes: 0 success (and, for ``check``, no self-intersection), 1 the
surface self-intersects, 2 usage or configuration error, 3 numeric fault.
Diagnostics go to stderr; data goes to the output file or stdout.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import fields

from .assembly import build_complex
from .errors import BracketInvalid, GeometryError, UnsupportedSchema
from .surface_io import (
    FORMATS,
    VIEWS,
    RunConfig,
    export_json,
    export_obj,
    export_povray,
    twist_of,
)
from .sweep import find_threshold, run_experiment

EXIT_OK, EXIT_INTERSECTING, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3

# reference side lengths, each grown for 11 iterations
PRESETS = {
    "s048": {"side": 0.48, "iterations": 11},
    "s053": {"side": 0.53, "iterations": 11},
    "s054": {"side": 0.54, "iterations": 11},
    "s075": {"side": 0.75, "iterations": 11},
    "ci": {"iterations": 8},
    "full": {"iterations": 11},
}


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file with RunConfig fields")
    common.add_argument("--preset", choices=sorted(PRESETS))
    common.add_argument("--side", type=float)
    common.add_argument("--iterations", type=int)
    common.add_argument("--twist", choices=["cw", "ccw"])
    common.add_argument("--antiprism-align", dest="antiprism_align", type=int, choices=range(4))
    common.add_argument("--depth", type=int)
    common.add_argument("--eps", type=float)
    common.add_argument("--aabb-pad", dest="aabb_pad", type=float)
    common.add_argument("-o", "--output")

    parser = argparse.ArgumentParser(prog="hypsurface", description="Hyperbolic {3,7} surface experiments")
    sub = parser.add_subparsers(dest="command", required=True)
    b = sub.add_parser("build", parents=[common], help="construct and export the surface")
    b.add_argument("--format", choices=FORMATS)
    sub.add_parser("check", parents=[common], help="construct and test for self-intersection")
    s = sub.add_parser("sweep", parents=[common], help="bracket the threshold side length")
    s.add_argument("--lo", type=float)
    s.add_argument("--hi", type=float)
    s.add_argument("--tol", type=float)
    r = sub.add_parser("render", parents=[common], help="write a POV-Ray scene")
    r.add_argument("--view", choices=VIEWS)
    return parser


def resolve_config(args: argparse.Namespace) -> RunConfig:
    """Merge defaults < config file < preset < explicit flags."""
    values = {}
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            data = json.load(fh)
        if not isinstance(data, dict):
            raise ValueError("config file must hold a JSON object")
        data = data.get("config", data)
        known = {f.name for f in fields(RunConfig)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        values.update(data)
    if args.preset:
        values.update(PRESETS[args.preset])
    for f in fields(RunConfig):
        v = getattr(args, f.name, None)
        if v is not None and f.name != "command":
            values[f.name] = v
    values["command"] = args.command
    if args.command == "render":
        values["format"] = "pov"
    return RunConfig(**values)


def _say(msg: str) -> None:
    print(msg, file=sys.stderr)


def _run(cfg: RunConfig) -> int:
    twist = twist_of(cfg)
    if cfg.command == "build":
        cx = build_complex(cfg.side, cfg.iterations, twist, cfg.antiprism_align)
        if cfg.format == "obj":
            export_obj(cx, cfg.depth, cfg.output)
        elif cfg.format == "pov":
            export_povray(cx, cfg.output, cfg.view)
        else:
            export_json(cx, None, cfg.output, cfg.echo())
        _say(f"built {len(cx.solids)} solids, {len(cx.open_frames)} open squares")
        return EXIT_OK

    if cfg.command == "render":
        cx = build_complex(cfg.side, cfg.iterations, twist, cfg.antiprism_align)
        export_povray(cx, cfg.output, cfg.view)
        _say(f"wrote scene with {len(cx.solids)} solids ({cfg.view} view)")
        return EXIT_OK

    if cfg.command == "check":
        result, cx, pairs, grazing = run_experiment(
            cfg.side, cfg.iterations, cfg.depth, twist, cfg.antiprism_align, cfg.eps, cfg.aabb_pad,
            keep_complex=True)
        state = "SELF-INTERSECTING" if result.intersecting else "embedded"
        _say(f"s={cfg.side:g} iterations={result.iterations_built}/{cfg.iterations} depth={cfg.depth}: "
             f"{state}; {len(pairs)} crossing pairs, {len(grazing)} grazing, "
             f"{result.triangle_count} triangles, {result.wall_time:.1f}s")
        if result.intersecting:
            _say(f"first intersection at iteration {result.first_iteration}")
        payload = result.to_dict()
        payload["pairs"] = pairs.tolist()[:1000]
        payload["grazing"] = grazing.tolist()[:1000]
        payload["config"] = cfg.echo()
        _emit_json(payload, cfg.output)
        return EXIT_INTERSECTING if result.intersecting else EXIT_OK

    # sweep
    def progress(r):
        tag = f"intersects at iteration {r.first_iteration}" if r.intersecting else "clean"
        _say(f"  s={r.side:.6f}: {tag} ({r.wall_time:.1f}s)")

    res = find_threshold(cfg.lo, cfg.hi, cfg.iterations, cfg.depth, cfg.tol, twist,
                         cfg.antiprism_align, cfg.eps, progress=progress)
    _say(f"threshold bracket after {cfg.iterations} iterations: "
         f"({res.bracket_low:.6f}, {res.bracket_high:.6f}]")
    payload = res.to_dict()
    payload["config"] = cfg.echo()
    _emit_json(payload, cfg.output)
    return EXIT_OK


def _emit_json(payload, path):
    text = json.dumps(payload, sort_keys=True, indent=1) + "\n"
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def cli_main(argv=None) -> int:
    parser = _parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        cfg = resolve_config(args)
    except (ValueError, TypeError, OSError) as exc:
        _say(f"configuration error: {exc}")
        return EXIT_USAGE
    try:
        return _run(cfg)
    except (BracketInvalid, UnsupportedSchema) as exc:
        _say(f"error: {exc}")
        return EXIT_USAGE
    except (GeometryError, FloatingPointError) as exc:
        _say(f"numeric fault: {type(exc).__name__}: {exc}")
        return EXIT_NUMERIC
    except OSError as exc:
        _say(f"I/O error: {exc}")
        return EXIT_USAGE


def main() -> None:
    sys.exit(cli_main())


if __name__ == "__main__":
    main()
