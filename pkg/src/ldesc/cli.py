"""Command line entry points: catalog listing, sweeps, scans, verification.

Output files are deterministic: identical flags give byte-identical CSV and
JSON regardless of worker count or run order. Everything execution-specific
(worker count, output paths) stays out of the embedded configs.
"""
from __future__ import annotations

import argparse
import json
import os
from pathlib import Path
from typing import Optional

import numpy as np

from .descriptors import DescriptorSpec
from .errors import LdescError
from .fieldscan import (
    AXIS_NAMES,
    Region,
    contours,
    contours_to_json,
    contours_to_svg,
    field_to_csv,
    field_to_json,
    sweep,
    write_text,
)
from .systems import DiscreteMap2D, catalog, get, load_config
from .verify import (
    claim_names,
    line_scan,
    reports_table,
    reports_to_json,
    run_all,
    scan_to_csv,
    scan_to_json,
    scan_to_svg,
)

DESCRIPTORS = {
    "M": "M_both",
    "Mf": "M_forward",
    "Mb": "M_backward",
    "Lf": "L_forward",
}

_LINE_ALIASES = {"q": "x", "qd": "y", "w1": "x", "w2": "y", "w3": "z"}

FORMATS = ("csv", "json", "svg")


# ---------------------------------------------------------------------------
# flag parsing helpers (raise ArgumentTypeError -> usage text, exit 2)

def _parse_region(text: str) -> Region:
    bounds = []
    entries = text.split(",")
    for k, entry in enumerate(entries):
        parts = entry.split(":")
        if len(parts) != 3:
            raise argparse.ArgumentTypeError(
                f"region entry {entry!r} is not name:lo:hi"
            )
        name, lo, hi = parts
        if k >= len(AXIS_NAMES) or name != AXIS_NAMES[k]:
            raise argparse.ArgumentTypeError(
                f"region axes must be {','.join(AXIS_NAMES[:len(entries)])} in order"
            )
        try:
            bounds.append((float(lo), float(hi)))
        except ValueError:
            raise argparse.ArgumentTypeError(f"bad region bounds in {entry!r}")
    try:
        return Region(tuple(bounds))
    except (LdescError, ValueError) as err:
        raise argparse.ArgumentTypeError(str(err))


def _parse_res(text: str) -> tuple:
    parts = text.split("x")
    try:
        res = tuple(int(p) for p in parts)
    except ValueError:
        raise argparse.ArgumentTypeError(f"resolution {text!r} is not NxM")
    if len(res) < 1 or any(r < 2 for r in res):
        raise argparse.ArgumentTypeError("resolution needs >= 2 nodes per axis")
    return res


def _parse_levels(text: str):
    if "," not in text:
        try:
            return int(text)
        except ValueError:
            pass  # single explicit float level
    try:
        return [float(p) for p in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"levels {text!r}: give a count or a comma-separated list"
        )


def _parse_formats(text: str) -> tuple:
    asked = {p.strip() for p in text.split(",") if p.strip()}
    unknown = asked - set(FORMATS)
    if unknown:
        raise argparse.ArgumentTypeError(
            f"unknown formats {sorted(unknown)}; choose from {','.join(FORMATS)}"
        )
    if not asked:
        raise argparse.ArgumentTypeError("empty format list")
    return tuple(f for f in FORMATS if f in asked)


def _parse_line(text: str) -> tuple:
    """\"x=1.1,y:-2:2\" -> ({axis: value}, varying axis, lo, hi)."""
    fixed = {}
    varying = None
    for entry in text.split(","):
        if "=" in entry:
            name, _, value = entry.partition("=")
            kind = "fixed"
        else:
            parts = entry.split(":", 1)
            if len(parts) != 2:
                raise argparse.ArgumentTypeError(
                    f"line entry {entry!r} is neither name=value nor name:lo:hi"
                )
            name, value = parts
            kind = "range"
        name = _LINE_ALIASES.get(name, name)
        if name not in AXIS_NAMES:
            raise argparse.ArgumentTypeError(f"unknown axis {name!r} in --line")
        axis = AXIS_NAMES.index(name)
        try:
            if kind == "fixed":
                if axis in fixed:
                    raise argparse.ArgumentTypeError(f"axis {name} given twice")
                fixed[axis] = float(value)
            else:
                lo, _, hi = value.partition(":")
                if varying is not None:
                    raise argparse.ArgumentTypeError(
                        "exactly one axis may carry a range"
                    )
                varying = (axis, float(lo), float(hi))
        except ValueError:
            raise argparse.ArgumentTypeError(f"bad number in line entry {entry!r}")
    if varying is None:
        raise argparse.ArgumentTypeError("--line needs one ranged axis name:lo:hi")
    if varying[0] in fixed:
        raise argparse.ArgumentTypeError("the ranged axis also has a fixed value")
    return fixed, varying[0], varying[1], varying[2]


def _resolve_workers(args) -> int:
    if args.workers is not None:
        return args.workers
    env = os.environ.get("LD_WORKERS")
    if env is None:
        return 1
    try:
        workers = int(env)
    except ValueError:
        workers = 0
    if workers < 1:
        raise LdescError(f"LD_WORKERS={env!r} is not a positive integer")
    return workers


def _load_system(args):
    if args.config is not None:
        return load_config(args.config)
    return get(args.system)


def _require_flow(system, args) -> None:
    if isinstance(system, DiscreteMap2D):
        args.parser.error(
            f"{system.name} is a discrete map; descriptors "
            f"{','.join(DESCRIPTORS)} need a flow system"
        )


def _outdir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


# ---------------------------------------------------------------------------
# subcommands

def cmd_list(args) -> int:
    entries = []
    for system in catalog():
        is_map = isinstance(system, DiscreteMap2D)
        notes = [system.summary] if system.summary else []
        if not is_map and system.oracle is not None:
            if system.oracle.value is not None:
                notes.append("exact descriptor formula")
            elif system.oracle.axis_value is not None:
                notes.append("axis closed form")
        if not is_map and system.attractors:
            notes.append(f"{len(system.attractors)} attractors")
        entries.append({
            "name": system.name,
            "kind": "map" if is_map else "flow",
            "dimension": 2 if is_map else system.dimension,
            "params": system.params,
            "notes": "; ".join(notes),
        })
    if args.json:
        print(json.dumps(entries, sort_keys=True, separators=(",", ":"),
                         default=list))
        return 0
    width = max(len(e["name"]) + len(_param_text(e["params"])) for e in entries)
    for e in entries:
        label = e["name"] + _param_text(e["params"])
        print(f"{label:<{width}}  {e['kind']:<4} {e['dimension']}d  {e['notes']}")
    return 0


def _param_text(params: dict) -> str:
    if not params:
        return ""

    def fmt(v):
        return f"{v:g}" if isinstance(v, (int, float)) else str(v)

    inner = ", ".join(f"{k}={fmt(params[k])}" for k in sorted(params))
    return f" ({inner})"


def cmd_sweep(args) -> int:
    system = _load_system(args)
    _require_flow(system, args)
    spec = DescriptorSpec(kind=DESCRIPTORS[args.descriptor], tau=args.tau,
                          t0=args.t0)
    workers = _resolve_workers(args)
    field = sweep(system, spec, args.region, args.res, workers=workers)
    out = _outdir(args)
    written = []
    if "csv" in args.formats:
        write_text(out / "field.csv", field_to_csv(field))
        written.append("field.csv")
    if "json" in args.formats:
        write_text(out / "field.json", field_to_json(field))
        written.append("field.json")
    if "json" in args.formats or "svg" in args.formats:
        cset = contours(field, _resolve_levels(args, field))
        if "json" in args.formats:
            write_text(out / "contours.json", contours_to_json(cset))
            written.append("contours.json")
        if "svg" in args.formats:
            write_text(out / "contours.svg", contours_to_svg(cset, field.region))
            written.append("contours.svg")
    if field.failures:
        total = int(np.prod(field.resolution))
        print(f"note: {len(field.failures)} of {total} nodes failed")
    print(f"wrote {', '.join(written)} in {out}")
    return 0


def _resolve_levels(args, field):
    if args.levels_mode == "equal":
        return args.levels
    if not isinstance(args.levels, int):
        args.parser.error("--levels-mode quantile needs an integer --levels")
    finite = field.values[np.isfinite(field.values)]
    if finite.size == 0:
        raise LdescError("field has no finite values to take quantiles of")
    probs = np.linspace(0.0, 1.0, args.levels + 2)[1:-1]
    return [float(q) for q in np.quantile(finite, probs)]


def cmd_scan(args) -> int:
    system = _load_system(args)
    _require_flow(system, args)
    spec = DescriptorSpec(kind=DESCRIPTORS[args.descriptor], tau=args.tau,
                          t0=args.t0)
    fixed, axis, lo, hi = args.line
    if args.samples < 2:
        args.parser.error("--samples must be at least 2")
    if not lo < hi:
        args.parser.error("--line range needs lo < hi")
    dim = system.dimension
    needed = set(range(dim))
    given = set(fixed) | {axis}
    if given != needed:
        args.parser.error(
            f"--line must give all axes {','.join(AXIS_NAMES[:dim])} "
            f"of {system.name} exactly once"
        )
    base = np.zeros(dim)
    for ax, value in fixed.items():
        base[ax] = value
    direction = np.zeros(dim)
    direction[axis] = 1.0
    workers = _resolve_workers(args)
    scan = line_scan(system, spec, base, direction, (lo, hi),
                     samples=args.samples, workers=workers)
    out = _outdir(args)
    written = []
    if "csv" in args.formats:
        write_text(out / "line.csv", scan_to_csv(scan))
        written.append("line.csv")
    if "json" in args.formats:
        write_text(out / "line.json", scan_to_json(scan))
        written.append("line.json")
    if "svg" in args.formats:
        write_text(out / "line.svg", scan_to_svg(scan))
        written.append("line.svg")
    if scan.failures:
        print(f"note: {len(scan.failures)} of {args.samples} samples failed")
    print(f"argmin {AXIS_NAMES[axis]} = {scan.argmin_param!r} "
          f"(value {scan.min_value!r})")
    print(f"wrote {', '.join(written)} in {out}")
    return 0


def cmd_verify(args) -> int:
    names = args.claim if args.claim else None
    reports = run_all(names)
    out = _outdir(args)
    write_text(out / "report.json", reports_to_json(reports))
    print(reports_table(reports))
    return 0 if all(r.passed for r in reports) else 1


# ---------------------------------------------------------------------------
# parser assembly

def _add_system_flags(parser) -> None:
    group = parser.add_mutually_exclusive_group(required=True)
    group.add_argument("--system", help="catalog name")
    group.add_argument("--config", help="JSON system definition file")
    parser.add_argument("--descriptor", choices=sorted(DESCRIPTORS),
                        default="M", help="descriptor kind (default M)")
    parser.add_argument("--tau", type=float, required=True,
                        help="window half-length")
    parser.add_argument("--t0", type=float, default=0.0)
    parser.add_argument("--workers", type=int, default=None,
                        help="thread count (default: LD_WORKERS or 1)")
    parser.add_argument("--out", default=".", help="output directory")
    parser.add_argument("--formats", type=_parse_formats,
                        default=("csv", "json"),
                        help="comma list from csv,json,svg (default csv,json)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ld",
        description="descriptor fields, scans, and verification claims",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_list = sub.add_parser("list", help="show the system catalog")
    p_list.add_argument("--json", action="store_true")
    p_list.set_defaults(func=cmd_list, parser=p_list)

    p_sweep = sub.add_parser("sweep", help="evaluate a descriptor on a grid")
    _add_system_flags(p_sweep)
    p_sweep.add_argument("--region", type=_parse_region, required=True,
                         help='e.g. "x:-1:1,y:-1:1"')
    p_sweep.add_argument("--res", type=_parse_res, default=(201, 201),
                         help="grid resolution NxM (default 201x201)")
    p_sweep.add_argument("--levels", type=_parse_levels, default=30,
                         help="contour level count or explicit comma list")
    p_sweep.add_argument("--levels-mode", choices=("equal", "quantile"),
                         default="equal", dest="levels_mode")
    p_sweep.set_defaults(func=cmd_sweep, parser=p_sweep)

    p_scan = sub.add_parser("scan", help="evaluate a descriptor along a line")
    _add_system_flags(p_scan)
    p_scan.add_argument("--line", type=_parse_line, required=True,
                        help='e.g. "x=1.1,y:-2:2"')
    p_scan.add_argument("--samples", type=int, default=2001)
    p_scan.set_defaults(func=cmd_scan, parser=p_scan)

    p_verify = sub.add_parser("verify", help="run measured claim checks")
    p_verify.add_argument("--claim", action="append", choices=claim_names(),
                          help="run this claim only (repeatable)")
    p_verify.add_argument("--out", default=".", help="report directory")
    p_verify.set_defaults(func=cmd_verify, parser=p_verify)
    return parser


def main(argv: Optional[list] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except SystemExit as exc:  # parser.error inside a subcommand
        return int(exc.code or 0)
    except (LdescError, OSError) as err:
        print(f"error: {err}")
        return 3


if __name__ == "__main__":
    raise SystemExit(main())
