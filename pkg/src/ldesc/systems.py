"""Catalog of benchmark vector fields and diffeomorphisms.

Every flow exposes a batched velocity callable: state arrays have shape
(..., d) and the time argument may be a scalar or an array broadcastable
against the leading axes (autonomous fields ignore it). Where a closed-form
descriptor value is known it is attached as an oracle so verification code
can compare measured values against exact ones.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from . import fieldparse
from .errors import LdescError


class NotInCatalog(LdescError):
    def __init__(self, name: str, available: list[str]):
        super().__init__(f"no system named {name!r}; available: {', '.join(available)}")
        self.name = name


class ConfigError(LdescError):
    pass


@dataclass(frozen=True, eq=False)
class ClosedFormOracle:
    """Exact reference values where the arc-length field integrates in closed form.

    value(tau, t0, state) gives the full two-sided descriptor at a point;
    axis_value[i](tau, c) gives it at c * e_i. Either may be None when no
    closed form exists. manifold describes the known stable set:
    ("axis", i) is the coordinate axis spanned by e_i, ("hyperplane", i)
    is the set where coordinate i vanishes.
    """

    value: Optional[Callable[[float, float, np.ndarray], float]] = None
    axis_value: Optional[tuple] = None
    manifold: Optional[tuple[str, int]] = None


@dataclass(frozen=True, eq=False)
class FlowSystem:
    name: str
    dimension: int
    velocity: Callable[[np.ndarray, object], np.ndarray]
    params: dict = field(default_factory=dict)
    equilibria: tuple = ()
    attractors: tuple = ()
    incompressible: bool = False
    reference_region: tuple = ()
    oracle: Optional[ClosedFormOracle] = None
    summary: str = ""

    def __post_init__(self):
        for point in self.equilibria + self.attractors:
            if len(point) != self.dimension:
                raise ConfigError(
                    f"{self.name}: point {point} does not match dimension {self.dimension}"
                )


@dataclass(frozen=True, eq=False)
class DiscreteMap2D:
    """Planar diffeomorphism given by forward and (optional) inverse steps.

    step and inverse act componentwise on x, y arrays and broadcast.
    """

    name: str
    step: Callable[[np.ndarray, np.ndarray], tuple]
    inverse: Optional[Callable[[np.ndarray, np.ndarray], tuple]] = None
    params: dict = field(default_factory=dict)
    fixed_points: tuple = ()
    summary: str = ""


def saddle2d(lam: float = 1.0) -> FlowSystem:
    if lam <= 0:
        raise ConfigError("saddle2d rate must be positive")

    def velocity(state, t):
        out = np.empty_like(state)
        out[..., 0] = lam * state[..., 0]
        out[..., 1] = -lam * state[..., 1]
        return out

    def axis(tau, c):
        return abs(c) * (math.exp(lam * tau) - math.exp(-lam * tau))

    return FlowSystem(
        name="saddle2d",
        dimension=2,
        velocity=velocity,
        params={"lam": lam},
        equilibria=((0.0, 0.0),),
        incompressible=True,
        reference_region=((-1.0, 1.0), (-1.0, 1.0)),
        oracle=ClosedFormOracle(axis_value=(axis, axis), manifold=("axis", 1)),
        summary="linear saddle; expansion along x, contraction along y",
    )


def rotation2d() -> FlowSystem:
    def velocity(state, t):
        out = np.empty_like(state)
        out[..., 0] = -state[..., 1]
        out[..., 1] = state[..., 0]
        return out

    def value(tau, t0, state):
        return 2.0 * tau * math.hypot(float(state[0]), float(state[1]))

    return FlowSystem(
        name="rotation2d",
        dimension=2,
        velocity=velocity,
        equilibria=((0.0, 0.0),),
        incompressible=True,
        reference_region=((-1.0, 1.0), (-1.0, 1.0)),
        oracle=ClosedFormOracle(value=value),
        summary="rigid rotation about the origin at unit angular speed",
    )


def _shear_system(name, f, fprime, params, summary) -> FlowSystem:
    # x' = f(x), y' = -y f'(x): volume preserving by construction, and on the
    # y-axis the y-dynamics reduce to y' = -f'(0) y with f'(0) = 1.
    def velocity(state, t):
        x = state[..., 0]
        out = np.empty_like(state)
        out[..., 0] = f(x)
        out[..., 1] = -state[..., 1] * fprime(x)
        return out

    def stable_axis(tau, c):
        return abs(c) * (math.exp(tau) - math.exp(-tau))

    return FlowSystem(
        name=name,
        dimension=2,
        velocity=velocity,
        params=params,
        equilibria=((0.0, 0.0),),
        incompressible=True,
        reference_region=((-1.0, 1.0), (0.05, 0.5)),
        oracle=ClosedFormOracle(axis_value=(None, stable_axis), manifold=("axis", 1)),
        summary=summary,
    )


def shear_tanh() -> FlowSystem:
    def f(x):
        return np.tanh(x)

    def fprime(x):
        return 1.0 / np.cosh(x) ** 2

    return _shear_system(
        "shear_tanh", f, fprime, {},
        "tanh shear; saturating drift along x, matched contraction in y",
    )


def shear_piecewise() -> FlowSystem:
    # slope exactly 1 on |x| <= 1, arctan tails keep it C1 and bounded
    def f(x):
        x = np.asarray(x, dtype=float)
        return np.where(
            x <= -1.0,
            np.arctan(x + 1.0) - 1.0,
            np.where(x >= 1.0, np.arctan(x - 1.0) + 1.0, x),
        )

    def fprime(x):
        x = np.asarray(x, dtype=float)
        return np.where(np.abs(x) < 1.0, 1.0, 1.0 / (1.0 + (np.abs(x) - 1.0) ** 2))

    return _shear_system(
        "shear_piecewise", f, fprime, {"a": 1.0, "k": 1.0},
        "piecewise-arctan shear; drift slope is exactly 1 on |x| <= 1",
    )


def linearNd(rates) -> FlowSystem:
    rates = tuple(float(r) for r in rates)
    d = len(rates)
    if not 1 <= d <= 6:
        raise ConfigError("linearNd supports 1 to 6 coordinates")
    if any(r == 0.0 for r in rates):
        raise ConfigError("linearNd rates must be nonzero")
    rate_arr = np.array(rates)

    def velocity(state, t):
        return state * rate_arr

    def make_axis(r):
        def axis(tau, c):
            return abs(c) * (math.exp(abs(r) * tau) - math.exp(-abs(r) * tau))

        return axis

    stable = [i for i, r in enumerate(rates) if r < 0]
    manifold = ("axis", stable[0]) if len(stable) == 1 else None
    return FlowSystem(
        name="linearNd",
        dimension=d,
        velocity=velocity,
        params={"rates": rates},
        equilibria=((0.0,) * d,),
        incompressible=math.fsum(rates) == 0.0,
        reference_region=((-0.5, 0.5),) * d,
        oracle=ClosedFormOracle(
            axis_value=tuple(make_axis(r) for r in rates), manifold=manifold
        ),
        summary="diagonal linear flow with per-axis rates",
    )


def linear3d(l1: float = 0.5, l2: float = 1.5, l3: float = 2.0) -> FlowSystem:
    if min(l1, l2, l3) <= 0:
        raise ConfigError("linear3d rates must be positive")
    base = linearNd((l1, l2, -l3))
    return FlowSystem(
        name="linear3d",
        dimension=3,
        velocity=base.velocity,
        params={"l1": l1, "l2": l2, "l3": l3},
        equilibria=base.equilibria,
        incompressible=base.incompressible,
        reference_region=base.reference_region,
        oracle=ClosedFormOracle(
            axis_value=base.oracle.axis_value, manifold=("axis", 2)
        ),
        summary="3-d saddle; two expanding axes, one contracting",
    )


def basin2d() -> FlowSystem:
    # y' = y - y^2 for y >= 0 and y + y^2 for y < 0: odd in y, so the x-axis
    # is the separatrix between the basins of (1, 1) and (-1, -1).
    def velocity(state, t):
        y = state[..., 1]
        out = np.empty_like(state)
        out[..., 0] = -state[..., 0] + y
        out[..., 1] = np.where(y >= 0.0, y - y * y, y + y * y)
        return out

    return FlowSystem(
        name="basin2d",
        dimension=2,
        velocity=velocity,
        equilibria=((0.0, 0.0), (1.0, 1.0), (-1.0, -1.0)),
        attractors=((1.0, 1.0), (-1.0, -1.0)),
        reference_region=((-2.0, 2.0), (-2.0, 2.0)),
        oracle=ClosedFormOracle(manifold=("hyperplane", 1)),
        summary="two stable states with the x-axis as separatrix",
    )


def duffing_damped() -> FlowSystem:
    # q'' = -q' + 0.1 q (1 - q^2), written as a first-order system in (q, q')
    def velocity(state, t):
        q = state[..., 0]
        out = np.empty_like(state)
        out[..., 0] = state[..., 1]
        out[..., 1] = -state[..., 1] + 0.1 * q * (1.0 - q * q)
        return out

    return FlowSystem(
        name="duffing_damped",
        dimension=2,
        velocity=velocity,
        params={"delta": 1.0, "alpha": 0.1},
        equilibria=((0.0, 0.0), (1.0, 0.0), (-1.0, 0.0)),
        attractors=((1.0, 0.0), (-1.0, 0.0)),
        reference_region=((-2.0, 2.0), (-10.0, 10.0)),
        summary="damped double-well oscillator in (q, qdot) coordinates",
    )


def bump_g(x):
    """Smooth bump: exp(-1/(x(1-x))) on (0, 1), identically 0 elsewhere."""
    arr = np.asarray(x, dtype=float)
    inside = (arr > 0.0) & (arr < 1.0)
    denom = np.where(inside, arr * (1.0 - arr), 1.0)
    with np.errstate(divide="ignore", over="ignore", under="ignore"):
        out = np.where(inside, np.exp(-1.0 / denom), 0.0)
    if np.ndim(x) == 0:
        return float(out)
    return out


def linear_map(lam: float = 2.0) -> DiscreteMap2D:
    if lam <= 0 or lam == 1.0:
        raise ConfigError("linear_map rate must be positive and not 1")

    def step(x, y):
        return lam * x, y / lam

    def inverse(x, y):
        return x / lam, lam * y

    return DiscreteMap2D(
        name="linear_map",
        step=step,
        inverse=inverse,
        params={"lam": lam},
        fixed_points=((0.0, 0.0),),
        summary="linear hyperbolic map; axes are the invariant manifolds",
    )


def perturbed_map() -> DiscreteMap2D:
    # forward: (2x, y/2 + g(x)); the bump is supported on 0 < x < 1 only,
    # so orbits started at integer x >= 1 never feel it going forward.
    def step(x, y):
        return 2.0 * x, y / 2.0 + bump_g(x)

    def inverse(x, y):
        half = np.asarray(x, dtype=float) / 2.0
        return half, 2.0 * (y - bump_g(half))

    return DiscreteMap2D(
        name="perturbed_map",
        step=step,
        inverse=inverse,
        params={},
        fixed_points=((0.0, 0.0),),
        summary="hyperbolic map with a compactly supported bump in y",
    )


_FLOW_FACTORIES = {
    "saddle2d": saddle2d,
    "rotation2d": rotation2d,
    "shear_tanh": shear_tanh,
    "shear_piecewise": shear_piecewise,
    "linear3d": linear3d,
    "linearNd": lambda: linearNd((0.5, 1.5, -2.0)),
    "basin2d": basin2d,
    "duffing_damped": duffing_damped,
}

_MAP_FACTORIES = {
    "linear_map": linear_map,
    "perturbed_map": perturbed_map,
}


def catalog() -> list:
    """All default-parameter systems, flows first, then maps."""
    entries = [factory() for factory in _FLOW_FACTORIES.values()]
    entries += [factory() for factory in _MAP_FACTORIES.values()]
    return entries


def get(name: str):
    """Look up a catalog system by name, or build one from a JSON config path."""
    if name in _FLOW_FACTORIES:
        return _FLOW_FACTORIES[name]()
    if name in _MAP_FACTORIES:
        return _MAP_FACTORIES[name]()
    if name.endswith(".json"):
        if not Path(name).exists():
            raise ConfigError(f"config file not found: {name}")
        return load_config(name)
    raise NotInCatalog(name, sorted(_FLOW_FACTORIES) + sorted(_MAP_FACTORIES))


_AXIS_VARS = ("x", "y", "z", "w4", "w5", "w6")
_VAR_ALIASES = {"w1": "x", "w2": "y", "w3": "z"}


def _axis_names(dimension: int) -> tuple[str, ...]:
    return _AXIS_VARS[:dimension]


def load_config(source) -> FlowSystem:
    """Build a FlowSystem from a JSON config (path, JSON text, or dict).

    Expected keys: name, dimension (1..6), components (list of expressions,
    one per coordinate), optional equilibria (validated against the field),
    optional region (per-axis [lo, hi] bounds).
    """
    if isinstance(source, dict):
        cfg = source
    else:
        text = Path(source).read_text() if Path(str(source)).exists() else str(source)
        try:
            cfg = json.loads(text)
        except json.JSONDecodeError as err:
            raise ConfigError(f"config is not valid JSON: {err}") from None
    try:
        name = str(cfg["name"])
        dimension = int(cfg["dimension"])
        components = list(cfg["components"])
    except KeyError as err:
        raise ConfigError(f"config missing required key {err.args[0]!r}") from None
    if not 1 <= dimension <= 6:
        raise ConfigError(f"dimension must be 1..6, got {dimension}")
    if len(components) != dimension:
        raise ConfigError(
            f"expected {dimension} component expressions, got {len(components)}"
        )

    axes = _axis_names(dimension)
    allowed = set(axes) | {"t"} | {
        alias for alias, target in _VAR_ALIASES.items() if target in axes
    }
    exprs = []
    for i, text in enumerate(components):
        try:
            expr = fieldparse.parse(str(text))
        except LdescError as err:
            raise ConfigError(f"component {i}: {err}") from None
        bad = fieldparse.free_vars(expr) - allowed
        if bad:
            raise ConfigError(
                f"component {i} uses {sorted(bad)}, valid for this dimension: "
                f"{sorted(allowed)}"
            )
        exprs.append(expr)

    def velocity(state, t):
        env = {axis: state[..., i] for i, axis in enumerate(axes)}
        for alias, target in _VAR_ALIASES.items():
            if target in env:
                env[alias] = env[target]
        env["t"] = t
        shape = state.shape[:-1]
        out = np.empty_like(np.asarray(state, dtype=float))
        for i, expr in enumerate(exprs):
            out[..., i] = np.broadcast_to(fieldparse.eval_array(expr, env), shape)
        return out

    equilibria = tuple(tuple(map(float, p)) for p in cfg.get("equilibria", ()))
    for point in equilibria:
        if len(point) != dimension:
            raise ConfigError(f"equilibrium {point} does not match dimension")
        v = velocity(np.array(point)[None, :], 0.0)[0]
        if not np.all(np.isfinite(v)) or np.max(np.abs(v)) > 1e-12:
            raise ConfigError(
                f"declared equilibrium {point} has residual velocity {v.tolist()}"
            )

    region = cfg.get("region")
    if region is None:
        reference_region = ((-1.0, 1.0),) * dimension
    else:
        if len(region) != dimension:
            raise ConfigError("region bounds must match dimension")
        reference_region = tuple((float(lo), float(hi)) for lo, hi in region)
        if any(lo >= hi for lo, hi in reference_region):
            raise ConfigError("region bounds must satisfy lo < hi")

    return FlowSystem(
        name=name,
        dimension=dimension,
        velocity=velocity,
        params={"components": [str(c) for c in components]},
        equilibria=equilibria,
        reference_region=reference_region,
        summary="user-defined field from config",
    )


def estimate_divergence(system: FlowSystem, point, t: float = 0.0, h: float = 1e-5) -> float:
    """Central-difference divergence of the velocity field at a point."""
    point = np.asarray(point, dtype=float)
    total = 0.0
    for i in range(system.dimension):
        hi = point.copy()
        lo = point.copy()
        hi[i] += h
        lo[i] -= h
        vhi = system.velocity(hi[None, :], t)[0, i]
        vlo = system.velocity(lo[None, :], t)[0, i]
        total += (vhi - vlo) / (2.0 * h)
    return float(total)
