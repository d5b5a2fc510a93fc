"""Descriptor values: accumulated arc length along forward/backward orbits.

Continuous kinds integrate the phase-space speed along the trajectory
through a seed point: M_forward and M_backward are the one-sided arcs over
[t0, t0+tau] and [t0-tau, t0], M_both is their sum, and L_forward is the
forward arc with an optional restriction of the speed to the configuration
half of the coordinates. The discrete kind MD_p sums |delta|^p increments
over a two-sided map orbit of length 2n+1, which needs the map's inverse.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .errors import LdescError
from .integrate import (
    OK,
    STATUS_TAGS,
    IntegratorConfig,
    _STATUS_EXCEPTIONS,
    integrate_batch,
)
from .systems import DiscreteMap2D, FlowSystem

_TAG_EXCEPTIONS = {STATUS_TAGS[code]: exc for code, exc in _STATUS_EXCEPTIONS.items()}

CONTINUOUS_KINDS = ("M_both", "M_forward", "M_backward", "L_forward")
DISCRETE_KINDS = ("MD_p",)
KINDS = CONTINUOUS_KINDS + DISCRETE_KINDS

# short CLI spellings
KIND_ALIASES = {"M": "M_both", "Mf": "M_forward", "Mb": "M_backward", "Lf": "L_forward"}


class MissingInverse(LdescError):
    pass


class NonFiniteOrbit(LdescError):
    pass


@dataclass(frozen=True)
class DescriptorSpec:
    """What to evaluate: a descriptor kind plus its parameters.

    Continuous kinds need tau > 0 (and use t0); MD_p needs the exponent
    p in (0, 1) and the one-sided orbit length n >= 1. speed selects the
    integrand for L_forward: "phase" is the full velocity norm, "config"
    restricts to the first half of the coordinates (even dimension only).
    """

    kind: str = "M_both"
    tau: Optional[float] = None
    t0: float = 0.0
    p: Optional[float] = None
    n: Optional[int] = None
    speed: str = "phase"

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown descriptor kind {self.kind!r}; one of {KINDS}")
        if self.kind in CONTINUOUS_KINDS:
            if self.tau is None or not (self.tau > 0 and math.isfinite(self.tau)):
                raise ValueError(f"{self.kind} needs a positive finite tau")
            if self.speed not in ("phase", "config"):
                raise ValueError("speed must be 'phase' or 'config'")
            if self.speed == "config" and self.kind != "L_forward":
                raise ValueError("config speed applies to L_forward only")
        else:
            if self.p is None or not 0.0 < self.p < 1.0:
                raise ValueError("MD_p needs an exponent p strictly inside (0, 1)")
            if self.n is None or self.n < 1 or self.n != int(self.n):
                raise ValueError("MD_p needs an integer orbit half-length n >= 1")

    def to_dict(self) -> dict:
        if self.kind in CONTINUOUS_KINDS:
            out = {"kind": self.kind, "tau": self.tau, "t0": self.t0}
            if self.kind == "L_forward":
                out["speed"] = self.speed
            return out
        return {"kind": self.kind, "p": self.p, "n": int(self.n)}


def _arc_components(system: FlowSystem, spec: DescriptorSpec) -> Optional[slice]:
    if spec.kind != "L_forward" or spec.speed == "phase":
        return None
    if system.dimension % 2 != 0:
        raise ValueError(
            "config speed needs an even-dimensional (position, velocity) system"
        )
    return slice(0, system.dimension // 2)


def evaluate_batch(
    system: Union[FlowSystem, DiscreteMap2D],
    X,
    spec: DescriptorSpec,
    cfg: Optional[IntegratorConfig] = None,
):
    """Descriptor values for rows of seeds.

    Returns (values, failures): failures is a list of (row index, tag) and
    the matching values are nan. Raises only on structural problems (wrong
    shapes, missing inverse), never on per-row numerical failures.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if isinstance(system, DiscreteMap2D):
        if spec.kind != "MD_p":
            raise ValueError(f"{spec.kind} needs a flow, not a map")
        return _mdp_batch(system, X, int(spec.n), spec.p)
    if spec.kind == "MD_p":
        raise ValueError("MD_p needs a map, not a flow")

    arc_slice = _arc_components(system, spec)
    n = X.shape[0]
    values = np.zeros(n)
    failures: list[tuple[int, str]] = []
    legs = []
    if spec.kind in ("M_both", "M_forward", "L_forward"):
        legs.append(("forward", spec.tau))
    if spec.kind in ("M_both", "M_backward"):
        legs.append(("backward", -spec.tau))
    failed = np.zeros(n, dtype=bool)
    for label, span in legs:
        _, arc, status, _ = integrate_batch(system, X, spec.t0, span, cfg, arc_slice)
        values = values + np.where(status == OK, arc, 0.0)
        for i in np.flatnonzero(status != OK):
            if not failed[i]:
                failures.append((int(i), f"{label}:{STATUS_TAGS[int(status[i])]}"))
        failed |= status != OK
    values[failed] = np.nan
    return values, failures


def _mdp_batch(map2d: DiscreteMap2D, X, n_steps: int, p: float):
    if map2d.inverse is None:
        raise MissingInverse(f"{map2d.name} has no inverse; MD_p needs both directions")
    x0 = np.asarray(X[:, 0], dtype=float)
    y0 = np.asarray(X[:, 1], dtype=float)
    total = np.zeros(x0.shape)
    with np.errstate(all="ignore"):
        for advance in (map2d.step, map2d.inverse):
            x, y = x0.copy(), y0.copy()
            for _ in range(n_steps):
                xn, yn = advance(x, y)
                total += np.abs(xn - x) ** p + np.abs(yn - y) ** p
                x, y = xn, yn
            bad_tail = ~(np.isfinite(x) & np.isfinite(y))
            total = np.where(bad_tail, np.nan, total)
    failures = [(int(i), "non_finite_orbit") for i in np.flatnonzero(~np.isfinite(total))]
    values = np.where(np.isfinite(total), total, np.nan)
    return values, failures


def compute_M(system: FlowSystem, x0, t0: float, tau: float,
              cfg: Optional[IntegratorConfig] = None) -> float:
    """Two-sided arc length over [t0 - tau, t0 + tau]."""
    return _single(system, x0, DescriptorSpec(kind="M_both", tau=tau, t0=t0), cfg)


def compute_Lf(system: FlowSystem, x0, t0: float, tau: float,
               cfg: Optional[IntegratorConfig] = None, speed: str = "phase") -> float:
    """Forward-only arc length over [t0, t0 + tau]."""
    spec = DescriptorSpec(kind="L_forward", tau=tau, t0=t0, speed=speed)
    return _single(system, x0, spec, cfg)


def compute_MDp(map2d: DiscreteMap2D, point, n: int, p: float) -> float:
    """Two-sided |delta|^p sum over a map orbit of length 2n + 1."""
    values, failures = _mdp_batch(
        map2d, np.asarray(point, dtype=float)[None, :], int(n), p
    )
    if failures:
        raise NonFiniteOrbit(f"orbit through {tuple(point)} left the finite range")
    return float(values[0])


def _single(system, x0, spec, cfg) -> float:
    values, failures = evaluate_batch(system, np.asarray(x0, float)[None, :], spec, cfg)
    if failures:
        _, tag = failures[0]
        direction, _, reason = tag.partition(":")
        exc = _TAG_EXCEPTIONS.get(reason, LdescError)
        raise exc(f"{direction} integration failed: {reason}")
    return float(values[0])
