"""Descriptor fields on grids: sweeps, contour extraction, serialization.

Grids are row-major with the first axis outermost: flat index = i * ny + j
in two dimensions. Failed nodes carry nan and are listed as (flat index,
tag) pairs; cells touching a failed node produce no contour segments.

Contours come from marching squares with linear interpolation along cell
edges. A corner counts as "above" when its value is >= the level. The two
ambiguous corner patterns are resolved by the sign of the cell-center mean.
Interpolated vertices are computed once per grid edge, so polylines that
share an edge share identical floats.
"""
from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field as dataclass_field
from typing import Optional, Sequence, Union
from xml.sax.saxutils import escape

import numpy as np

from .descriptors import DescriptorSpec, evaluate_batch
from .errors import LdescError
from .integrate import DEFAULT_CONFIG, IntegratorConfig
from .systems import DiscreteMap2D, FlowSystem

AXIS_NAMES = ("x", "y", "z", "w4", "w5", "w6")

SVG_PALETTE = (
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b",
    "#e377c2", "#7f7f7f", "#bcbd22", "#17becf", "#aec7e8", "#ffbb78",
)


class FieldError(LdescError):
    pass


class SweepError(FieldError):
    pass


class EmptyBand(FieldError):
    pass


@dataclass(frozen=True)
class Region:
    """Axis-aligned box: ((lo, hi), ...) one pair per coordinate."""

    bounds: tuple

    def __post_init__(self):
        bounds = tuple((float(lo), float(hi)) for lo, hi in self.bounds)
        object.__setattr__(self, "bounds", bounds)
        if not 1 <= len(bounds) <= 6:
            raise ValueError("region needs 1 to 6 axes")
        for lo, hi in bounds:
            if not (np.isfinite(lo) and np.isfinite(hi) and lo < hi):
                raise ValueError(f"bad axis bounds ({lo}, {hi}): need finite lo < hi")

    @property
    def dimension(self) -> int:
        return len(self.bounds)

    def axes(self, resolution: Sequence[int]) -> list[np.ndarray]:
        if len(resolution) != self.dimension:
            raise ValueError("resolution must match region dimension")
        if any(int(r) < 2 for r in resolution):
            raise ValueError("resolution must be >= 2 per axis")
        return [
            np.linspace(lo, hi, int(r)) for (lo, hi), r in zip(self.bounds, resolution)
        ]

    def grid(self, resolution: Sequence[int]) -> np.ndarray:
        """All grid nodes, row-major, shape (prod(resolution), dimension)."""
        mesh = np.meshgrid(*self.axes(resolution), indexing="ij")
        return np.stack([m.ravel(order="C") for m in mesh], axis=1)


@dataclass(frozen=True, eq=False)
class ScalarField:
    region: Region
    resolution: tuple
    values: np.ndarray  # shaped like resolution, C order
    spec: DescriptorSpec
    failures: list = dataclass_field(default_factory=list)
    config: dict = dataclass_field(default_factory=dict)

    def __post_init__(self):
        if tuple(self.values.shape) != tuple(self.resolution):
            raise ValueError("values shape must equal resolution")

    @property
    def axes(self) -> list[np.ndarray]:
        return self.region.axes(self.resolution)


@dataclass(frozen=True, eq=False)
class ContourSet:
    levels: list
    lines: list  # per level: list of (m, 2) vertex arrays
    config: dict


def _run_config(command: str, system, spec: DescriptorSpec, region: Region,
                resolution, cfg: IntegratorConfig, **extra) -> dict:
    out = {
        "command": command,
        "system": system.name,
        "system_params": json.loads(json.dumps(system.params, default=list)),
        "descriptor": spec.to_dict(),
        "region": [list(b) for b in region.bounds],
        "resolution": [int(r) for r in resolution],
        "rel_tol": cfg.rel_tol,
        "abs_tol": cfg.abs_tol,
    }
    out.update(extra)
    return out


def chunked_evaluate(
    system: Union[FlowSystem, DiscreteMap2D],
    points: np.ndarray,
    spec: DescriptorSpec,
    cfg: Optional[IntegratorConfig] = None,
    workers: int = 1,
):
    """evaluate_batch over contiguous chunks on a thread pool.

    Per-point results never depend on the chunking, so any worker count
    yields identical values and the same failures list (row index, tag).
    """
    if workers < 1:
        raise ValueError("workers must be >= 1")
    n = points.shape[0]
    values = np.empty(n)
    failures: list[tuple[int, str]] = []
    chunks = np.array_split(np.arange(n), min(workers, n))
    if workers == 1:
        results = [evaluate_batch(system, points[c], spec, cfg) for c in chunks]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = [
                pool.submit(evaluate_batch, system, points[c], spec, cfg)
                for c in chunks
            ]
            results = [f.result() for f in futures]
    for chunk, (vals, fails) in zip(chunks, results):
        values[chunk] = vals
        offset = int(chunk[0]) if len(chunk) else 0
        failures.extend((offset + i, tag) for i, tag in fails)
    return values, failures


def sweep(
    system: Union[FlowSystem, DiscreteMap2D],
    spec: DescriptorSpec,
    region: Region,
    resolution: Sequence[int],
    cfg: Optional[IntegratorConfig] = None,
    workers: int = 1,
) -> ScalarField:
    """Evaluate the descriptor on every grid node.

    Aborts with SweepError when more than 10% of nodes fail; isolated
    failures are kept as nan and listed on the field.
    """
    cfg = cfg or DEFAULT_CONFIG
    if isinstance(system, FlowSystem) and region.dimension != system.dimension:
        raise ValueError(
            f"region dimension {region.dimension} != system dimension {system.dimension}"
        )
    if isinstance(system, DiscreteMap2D) and region.dimension != 2:
        raise ValueError("map sweeps need a 2-d region")
    resolution = tuple(int(r) for r in resolution)
    nodes = region.grid(resolution)
    n = nodes.shape[0]
    values, failures = chunked_evaluate(system, nodes, spec, cfg, workers)
    if len(failures) > 0.1 * n:
        raise SweepError(
            f"{len(failures)} of {n} nodes failed ({len(failures) / n:.0%}); "
            f"first: {failures[0]}"
        )
    config = _run_config("sweep", system, spec, region, resolution, cfg)
    return ScalarField(
        region=region,
        resolution=resolution,
        values=values.reshape(resolution),
        spec=spec,
        failures=failures,
        config=config,
    )


# ---------------------------------------------------------------------------
# marching squares

# cell corner bits: a = (i, j), b = (i+1, j), c = (i+1, j+1), d = (i, j+1)
# edges: S below (a-b), E right (b-c), N above (d-c), W left (a-d)
_SEGMENTS = {
    1: (("S", "W"),),
    2: (("S", "E"),),
    3: (("W", "E"),),
    4: (("E", "N"),),
    6: (("S", "N"),),
    7: (("W", "N"),),
    8: (("W", "N"),),
    9: (("S", "N"),),
    11: (("E", "N"),),
    12: (("W", "E"),),
    13: (("S", "E"),),
    14: (("S", "W"),),
}


def _edge_key(name: str, i: int, j: int):
    if name == "S":
        return ("x", i, j)
    if name == "N":
        return ("x", i, j + 1)
    if name == "W":
        return ("y", i, j)
    return ("y", i + 1, j)  # E


def _trace_level(xs: np.ndarray, ys: np.ndarray, V: np.ndarray, level: float):
    with np.errstate(invalid="ignore"):
        above = V >= level
    finite = np.isfinite(V)
    a = above[:-1, :-1]
    b = above[1:, :-1]
    c = above[1:, 1:]
    d = above[:-1, 1:]
    ok = finite[:-1, :-1] & finite[1:, :-1] & finite[1:, 1:] & finite[:-1, 1:]
    code = (
        a.astype(np.int8)
        + 2 * b.astype(np.int8)
        + 4 * c.astype(np.int8)
        + 8 * d.astype(np.int8)
    )
    code = np.where(ok, code, 0)
    center_above = np.zeros_like(a)
    amb = (code == 5) | (code == 10)
    if amb.any():
        with np.errstate(invalid="ignore"):
            center = (V[:-1, :-1] + V[1:, :-1] + V[1:, 1:] + V[:-1, 1:]) / 4.0
            center_above = center >= level

    vertex_cache: dict = {}

    def vertex(key):
        pt = vertex_cache.get(key)
        if pt is None:
            kind, i, j = key
            if kind == "x":
                v0, v1 = V[i, j], V[i + 1, j]
                t = (level - v0) / (v1 - v0)
                pt = (xs[i] + t * (xs[i + 1] - xs[i]), ys[j])
            else:
                v0, v1 = V[i, j], V[i, j + 1]
                t = (level - v0) / (v1 - v0)
                pt = (xs[i], ys[j] + t * (ys[j + 1] - ys[j]))
            vertex_cache[key] = pt
        return pt

    adjacency: dict = {}

    def add_segment(i, j, e1, e2):
        k1 = _edge_key(e1, i, j)
        k2 = _edge_key(e2, i, j)
        adjacency.setdefault(k1, []).append(k2)
        adjacency.setdefault(k2, []).append(k1)

    for i, j in zip(*np.nonzero((code != 0) & (code != 15))):
        i, j = int(i), int(j)
        cc = int(code[i, j])
        if cc == 5:
            pairs = (("S", "E"), ("W", "N")) if center_above[i, j] else (("S", "W"), ("E", "N"))
        elif cc == 10:
            pairs = (("S", "W"), ("E", "N")) if center_above[i, j] else (("S", "E"), ("W", "N"))
        else:
            pairs = _SEGMENTS[cc]
        for e1, e2 in pairs:
            add_segment(i, j, e1, e2)

    # chain segments into polylines: open paths first (from degree-1 ends),
    # then closed loops; sorted starts keep the output deterministic
    visited = set()
    polylines = []

    def walk(start):
        path = [start]
        visited.add(start)
        prev = None
        cur = start
        while True:
            nxt = None
            for cand in adjacency[cur]:
                if cand != prev and cand not in visited:
                    nxt = cand
                    break
            if nxt is None:
                break
            path.append(nxt)
            visited.add(nxt)
            prev, cur = cur, nxt
        return path

    ends = sorted(k for k, nbrs in adjacency.items() if len(nbrs) == 1)
    for start in ends:
        if start in visited:
            continue
        path = walk(start)
        polylines.append(path)
    for start in sorted(adjacency):
        if start in visited:
            continue
        path = walk(start)
        path.append(start)  # explicit closure
        polylines.append(path)

    return [np.array([vertex(k) for k in path]) for path in polylines]


def _interior_levels(lo: float, hi: float, count: int) -> list[float]:
    return [float(v) for v in np.linspace(lo, hi, count + 2)[1:-1]]


def contours(field: ScalarField, levels: Union[int, Sequence[float]] = 30) -> ContourSet:
    """Iso-lines of a 2-d field at explicit levels or N interior levels."""
    if len(field.resolution) != 2:
        raise FieldError("contours need a 2-d field")
    V = field.values
    finite = V[np.isfinite(V)]
    if isinstance(levels, (int, np.integer)):
        if finite.size == 0:
            raise FieldError("field has no finite values")
        lo, hi = float(finite.min()), float(finite.max())
        if lo == hi:
            raise FieldError("field is constant; give explicit levels")
        level_list = _interior_levels(lo, hi, int(levels))
    else:
        level_list = [float(v) for v in levels]
        if not level_list:
            raise ValueError("need at least one level")
    xs, ys = field.axes
    lines = [_trace_level(xs, ys, V, lv) for lv in level_list]
    config = dict(field.config)
    config["levels"] = level_list
    return ContourSet(levels=level_list, lines=lines, config=config)


def contour_through(
    system: Union[FlowSystem, DiscreteMap2D],
    spec: DescriptorSpec,
    point,
    region: Region,
    resolution: Sequence[int],
    cfg: Optional[IntegratorConfig] = None,
    workers: int = 1,
) -> np.ndarray:
    """The connected iso-line whose level is the descriptor value at `point`.

    Sweeps the region, contours at the point's own value, and returns the
    polyline containing the vertex nearest to the point.
    """
    point = np.asarray(point, dtype=float)
    vals, fails = evaluate_batch(system, point[None, :], spec, cfg or DEFAULT_CONFIG)
    if fails:
        raise FieldError(f"descriptor failed at {tuple(point)}: {fails[0][1]}")
    level = float(vals[0])
    field = sweep(system, spec, region, resolution, cfg, workers)
    cset = contours(field, [level])
    lines = cset.lines[0]
    if not lines:
        raise FieldError(f"no contour at level {level!r} inside the region")
    best = None
    best_d2 = np.inf
    for line in lines:
        d2 = np.min(np.sum((line - point[None, :2]) ** 2, axis=1))
        if d2 < best_d2:
            best_d2 = d2
            best = line
    return best


def horizontal_deviation(polyline: np.ndarray, x_band: Sequence[float]) -> float:
    """Spread in y (max - min) of the vertices with x inside the band."""
    lo, hi = float(x_band[0]), float(x_band[1])
    ys = polyline[(polyline[:, 0] >= lo) & (polyline[:, 0] <= hi), 1]
    if ys.size == 0:
        raise EmptyBand(f"no contour vertices with x in [{lo}, {hi}]")
    return float(ys.max() - ys.min())


def gradient_magnitude(field: ScalarField) -> ScalarField:
    """Norm of the grid gradient: central differences inside, one-sided at
    the boundary. nan cells poison their neighbors, which are reported as
    failures of the derived field."""
    if len(field.resolution) != 2:
        raise FieldError("gradient_magnitude needs a 2-d field")
    xs, ys = field.axes
    with np.errstate(invalid="ignore"):
        gx, gy = np.gradient(field.values, xs, ys, edge_order=1)
        mag = np.hypot(gx, gy)
    failures = [
        (int(i), "non_finite") for i in np.flatnonzero(~np.isfinite(mag.ravel()))
    ]
    config = dict(field.config)
    config["post"] = "gradient_magnitude"
    return ScalarField(
        region=field.region,
        resolution=field.resolution,
        values=mag,
        spec=field.spec,
        failures=failures,
        config=config,
    )


def transverse_second_difference(field: ScalarField, axis: int) -> ScalarField:
    """|second difference| / h^2 along one axis; boundary slices are zero.

    Complements the gradient-magnitude ridge proxy: a crease in the field
    (a line where the gradient direction flips) shows up as a blow-up of
    this quantity along lines transverse to the crease even when the
    gradient norm itself stays flat.
    """
    if not 0 <= axis < len(field.resolution):
        raise ValueError("axis out of range")
    V = field.values
    h = field.axes[axis][1] - field.axes[axis][0]
    out = np.zeros_like(V)
    sl_mid = [slice(None)] * V.ndim
    sl_lo = [slice(None)] * V.ndim
    sl_hi = [slice(None)] * V.ndim
    sl_mid[axis] = slice(1, -1)
    sl_lo[axis] = slice(0, -2)
    sl_hi[axis] = slice(2, None)
    with np.errstate(invalid="ignore"):
        out[tuple(sl_mid)] = np.abs(
            V[tuple(sl_lo)] - 2.0 * V[tuple(sl_mid)] + V[tuple(sl_hi)]
        ) / (h * h)
    failures = [
        (int(i), "non_finite") for i in np.flatnonzero(~np.isfinite(out.ravel()))
    ]
    config = dict(field.config)
    config["post"] = f"second_difference_axis{axis}"
    return ScalarField(
        region=field.region,
        resolution=field.resolution,
        values=out,
        spec=field.spec,
        failures=failures,
        config=config,
    )


# ---------------------------------------------------------------------------
# serialization: deterministic text, '\n' endings, repr floats

def _config_json(config: dict) -> str:
    return json.dumps(config, sort_keys=True, separators=(",", ":"))


def field_to_csv(field: ScalarField) -> str:
    names = AXIS_NAMES[: len(field.resolution)]
    lines = [f"# config: {_config_json(field.config)}"]
    lines.append(",".join(names) + ",value")
    axes = field.axes
    flat = field.values.ravel(order="C")
    coords = np.meshgrid(*axes, indexing="ij")
    cols = [c.ravel(order="C") for c in coords]
    for idx in range(flat.size):
        parts = [repr(float(col[idx])) for col in cols]
        parts.append(repr(float(flat[idx])))
        lines.append(",".join(parts))
    return "\n".join(lines) + "\n"


def _json_values(arr: np.ndarray) -> list:
    return [float(v) if np.isfinite(v) else None for v in arr.ravel(order="C")]


def field_to_json(field: ScalarField) -> str:
    doc = {
        "config": field.config,
        "region": [list(b) for b in field.region.bounds],
        "resolution": [int(r) for r in field.resolution],
        "spec": field.spec.to_dict(),
        "values": _json_values(field.values),
        "failures": [[int(i), tag] for i, tag in field.failures],
    }
    return json.dumps(doc, sort_keys=True, separators=(",", ":")) + "\n"


def contours_to_json(cset: ContourSet) -> str:
    doc = {
        "config": cset.config,
        "levels": cset.levels,
        "lines": [
            [[[float(x), float(y)] for x, y in line] for line in level_lines]
            for level_lines in cset.lines
        ],
    }
    return json.dumps(doc, sort_keys=True, separators=(",", ":")) + "\n"


def contours_to_svg(cset: ContourSet, region: Region) -> str:
    """Standalone 800x800 SVG: one stroke color per level, cycled from a
    12-color palette, with a text legend keyed by level value."""
    if region.dimension != 2:
        raise FieldError("SVG rendering needs a 2-d region")
    (x0, x1), (y0, y1) = region.bounds
    size, margin = 800.0, 45.0
    span = size - 2 * margin

    def sx(x):
        return margin + (x - x0) / (x1 - x0) * span

    def sy(y):
        return size - margin - (y - y0) / (y1 - y0) * span

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {size:g} {size:g}">',
        f"<desc>{escape(_config_json(cset.config))}</desc>",
        f'<rect x="0" y="0" width="{size:g}" height="{size:g}" fill="#ffffff"/>',
        f'<rect x="{margin:g}" y="{margin:g}" width="{span:g}" height="{span:g}" '
        f'fill="none" stroke="#888888" stroke-width="1"/>',
    ]
    for li, (level, lines) in enumerate(zip(cset.levels, cset.lines)):
        color = SVG_PALETTE[li % len(SVG_PALETTE)]
        for line in lines:
            pts = " ".join(f"{sx(x):.3f},{sy(y):.3f}" for x, y in line)
            out.append(
                f'<polyline fill="none" stroke="{color}" stroke-width="1.2" '
                f'points="{pts}"/>'
            )
    out.append(
        f'<text x="{margin:g}" y="{margin - 15:g}" font-family="monospace" '
        f'font-size="12" fill="#000000">levels</text>'
    )
    shown = cset.levels[:16]
    for li, level in enumerate(shown):
        color = SVG_PALETTE[li % len(SVG_PALETTE)]
        y = margin + 16 + 15 * li
        out.append(
            f'<line x1="{size - 150:.0f}" y1="{y - 4:g}" x2="{size - 130:.0f}" '
            f'y2="{y - 4:g}" stroke="{color}" stroke-width="3"/>'
        )
        out.append(
            f'<text x="{size - 124:.0f}" y="{y:g}" font-family="monospace" '
            f'font-size="11" fill="#000000">{level:.6g}</text>'
        )
    if len(cset.levels) > len(shown):
        y = margin + 16 + 15 * len(shown)
        out.append(
            f'<text x="{size - 124:.0f}" y="{y:g}" font-family="monospace" '
            f'font-size="11" fill="#000000">(+{len(cset.levels) - len(shown)} more)</text>'
        )
    out.append("</svg>")
    return "\n".join(out) + "\n"


def write_text(path, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
