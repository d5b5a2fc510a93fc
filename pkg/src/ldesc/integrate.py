"""Adaptive Runge-Kutta 5(4) integration with arc length carried as state.

The stepper advances whole batches of initial conditions at once; each row
keeps its own adaptive step size, so results for a given row are identical
no matter how the batch is partitioned. That property is what makes worker
parallelism reproducible byte for byte.

Arc length rides along as one extra state component with derivative equal
to the phase-space speed, under the same error control as the state itself.
Backward spans integrate the time-reversed field and the returned arrays
are flipped so times always increase.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import LdescError
from .systems import FlowSystem

# Dormand-Prince 5(4) tableau, FSAL form: the 7th stage sits at the new
# state, and b5 equals the 7th row of A.
_C2, _C3, _C4, _C5 = 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0
_A21 = 1.0 / 5.0
_A31, _A32 = 3.0 / 40.0, 9.0 / 40.0
_A41, _A42, _A43 = 44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0
_A51, _A52, _A53, _A54 = 19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0
_A61, _A62, _A63, _A64, _A65 = (
    9017.0 / 3168.0,
    -355.0 / 33.0,
    46732.0 / 5247.0,
    49.0 / 176.0,
    -5103.0 / 18656.0,
)
_B1, _B3, _B4, _B5, _B6 = 35.0 / 384.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0
_E1, _E3, _E4, _E5, _E6, _E7 = (
    71.0 / 57600.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
)

OK = 0
OVERFLOW = 1
STEP_LIMIT = 2
STIFF = 3

STATUS_TAGS = {OVERFLOW: "overflow_guard", STEP_LIMIT: "step_limit", STIFF: "stiffness_suspected"}


class IntegrationError(LdescError):
    pass


class StepLimitExceeded(IntegrationError):
    pass


class OverflowGuard(IntegrationError):
    pass


class StiffnessSuspected(IntegrationError):
    pass


_STATUS_EXCEPTIONS = {
    OVERFLOW: OverflowGuard,
    STEP_LIMIT: StepLimitExceeded,
    STIFF: StiffnessSuspected,
}


@dataclass(frozen=True)
class IntegratorConfig:
    rel_tol: float = 1e-9
    abs_tol: float = 1e-11
    max_step: float = math.inf
    max_steps: int = 10_000_000
    overflow_guard: float = 1e300

    def __post_init__(self):
        if self.rel_tol <= 0 or self.abs_tol <= 0:
            raise ValueError("tolerances must be positive")
        if self.max_step <= 0 or self.max_steps <= 0 or self.overflow_guard <= 0:
            raise ValueError("limits must be positive")


DEFAULT_CONFIG = IntegratorConfig()


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Accepted integration points in increasing time order.

    arc_length starts at 0 at the earliest time and is nondecreasing; for
    backward spans the seed therefore sits at the last index.
    """

    times: np.ndarray
    states: np.ndarray
    arc_length: np.ndarray
    t0: float
    span: float

    @property
    def seed(self) -> np.ndarray:
        return self.states[-1] if self.span < 0 else self.states[0]

    @property
    def endpoint(self) -> np.ndarray:
        return self.states[0] if self.span < 0 else self.states[-1]

    @property
    def total_arc(self) -> float:
        return float(self.arc_length[-1])


def _rms(arr: np.ndarray) -> np.ndarray:
    return np.sqrt(np.mean(arr * arr, axis=1))


def _advance(
    velocity: Callable,
    X0: np.ndarray,
    t0: float,
    span: float,
    cfg: IntegratorConfig,
    arc_slice: Optional[slice] = None,
    record: bool = False,
):
    """Advance a batch of seeds by `span`, integrating arc length alongside.

    Returns (states, arc, status, steps[, samples]); samples only with
    record=True, which requires a single-row batch. arc_slice restricts the
    speed integrand to a subset of velocity components (full norm when None).

    Each row carries its own step size, error history, and failure status:
    a row that trips the overflow guard, the step budget, or the stiffness
    floor is retired with that status while the rest continue.
    """
    n, d = X0.shape
    direction = 1.0 if span > 0 else -1.0
    T = abs(span)
    m = d + 1

    def rhs(sigma: np.ndarray, Z: np.ndarray) -> np.ndarray:
        v = velocity(Z[:, :d], t0 + direction * sigma)
        out = np.empty((Z.shape[0], m))
        out[:, :d] = v if direction > 0 else -v
        sq = v if arc_slice is None else v[:, arc_slice]
        # naive sum-of-squares overflows at |v| ~ 1e154, far below the 1e300
        # state guard; rows that trip it get a rescaled norm instead
        with np.errstate(all="ignore"):
            speed = np.sqrt(np.einsum("ij,ij->i", sq, sq))
            big = np.isinf(speed)
            if big.any():
                huge = sq[big]
                mx = np.max(np.abs(huge), axis=1)
                scaled = huge / mx[:, None]
                speed[big] = mx * np.sqrt(np.einsum("ij,ij->i", scaled, scaled))
            out[:, d] = speed
        return out

    Z = np.concatenate([X0, np.zeros((n, 1))], axis=1)
    sigma = np.zeros(n)
    k1 = rhs(sigma, Z)

    out_states = np.empty((n, d))
    out_arc = np.empty(n)
    out_status = np.full(n, OK, dtype=np.int64)
    out_steps = np.zeros(n, dtype=np.int64)
    samples = None
    if record:
        if n != 1:
            raise ValueError("record mode expects a single seed")
        samples = [(0.0, Z[0].copy())]

    # Initial step: the standard two-probe heuristic, done rowwise.
    with np.errstate(all="ignore"):
        scale = cfg.abs_tol + cfg.rel_tol * np.abs(Z)
        d0 = _rms(Z / scale)
        d1 = _rms(k1 / scale)
        h0 = np.where((d0 < 1e-5) | (d1 < 1e-5), 1e-6 * T, 0.01 * d0 / d1)
        h0 = np.minimum(np.where(np.isfinite(h0), h0, 1e-6 * T), T)
        probe = rhs(h0, Z + h0[:, None] * k1)
        d2 = _rms((probe - k1) / scale) / np.where(h0 > 0, h0, 1.0)
        dm = np.maximum(d1, d2)
        h1 = np.where(dm <= 1e-15, np.maximum(1e-6 * T, h0 * 1e-3), (0.01 / dm) ** 0.2)
        h = np.minimum(np.minimum(100.0 * h0, h1), min(T, cfg.max_step))
        h = np.where(np.isfinite(h) & (h > 0), h, 1e-6 * T)

    errold = np.full(n, 1e-4)
    steps = np.zeros(n, dtype=np.int64)
    idx = np.arange(n)
    stiff_floor = 1e-14 * T

    while idx.size:
        remaining = T - sigma
        finishes = h >= remaining
        h_eff = np.where(finishes, remaining, h)
        he = h_eff[:, None]

        k2 = rhs(sigma + _C2 * h_eff, Z + he * (_A21 * k1))
        k3 = rhs(sigma + _C3 * h_eff, Z + he * (_A31 * k1 + _A32 * k2))
        k4 = rhs(sigma + _C4 * h_eff, Z + he * (_A41 * k1 + _A42 * k2 + _A43 * k3))
        k5 = rhs(
            sigma + _C5 * h_eff,
            Z + he * (_A51 * k1 + _A52 * k2 + _A53 * k3 + _A54 * k4),
        )
        k6 = rhs(
            sigma + h_eff,
            Z + he * (_A61 * k1 + _A62 * k2 + _A63 * k3 + _A64 * k4 + _A65 * k5),
        )
        Z_new = Z + he * (_B1 * k1 + _B3 * k3 + _B4 * k4 + _B5 * k5 + _B6 * k6)
        k7 = rhs(sigma + h_eff, Z_new)

        with np.errstate(all="ignore"):
            err_vec = he * (
                _E1 * k1 + _E3 * k3 + _E4 * k4 + _E5 * k5 + _E6 * k6 + _E7 * k7
            )
            tol = cfg.abs_tol + cfg.rel_tol * np.maximum(np.abs(Z), np.abs(Z_new))
            err = _rms(err_vec / tol)
        err = np.where(np.isfinite(err), err, np.inf)
        steps += 1

        accept = err <= 1.0
        if accept.any():
            sigma = np.where(accept & finishes, T, np.where(accept, sigma + h_eff, sigma))
            Z = np.where(accept[:, None], Z_new, Z)
            k1 = np.where(accept[:, None], k7, k1)
            if record and accept[0]:
                samples.append((float(sigma[0]), Z[0].copy()))
        with np.errstate(all="ignore"):
            grow = h_eff * np.clip(0.9 * err ** -0.17 * errold ** 0.04, 0.2, 10.0)
            shrink = h_eff * np.clip(0.9 * err ** -0.2, 0.1, 1.0)
        h = np.minimum(np.where(accept, grow, shrink), cfg.max_step)
        errold = np.where(accept, np.maximum(err, 1e-4), errold)

        # Retirement checks. Overflow covers non-finite states and
        # velocities too: poison values must not circulate silently.
        bad_state = np.max(np.abs(Z), axis=1) > cfg.overflow_guard
        bad_state |= ~np.all(np.isfinite(Z), axis=1)
        bad_state |= accept & ~np.all(np.isfinite(k1), axis=1)
        done = sigma >= T
        stiff = ~done & ~bad_state & (h < stiff_floor)
        exhausted = ~done & ~bad_state & ~stiff & (steps >= cfg.max_steps)

        retire = bad_state | done | stiff | exhausted
        if retire.any():
            rid = idx[retire]
            out_states[rid] = Z[retire, :d]
            out_arc[rid] = Z[retire, d]
            out_steps[rid] = steps[retire]
            code = np.full(rid.shape, OK, dtype=np.int64)
            code[stiff[retire]] = STIFF
            code[exhausted[retire]] = STEP_LIMIT
            code[bad_state[retire]] = OVERFLOW
            out_status[rid] = code
            keep = ~retire
            idx = idx[keep]
            Z = Z[keep]
            sigma = sigma[keep]
            h = h[keep]
            k1 = k1[keep]
            errold = errold[keep]
            steps = steps[keep]

    if record:
        return out_states, out_arc, out_status, out_steps, samples
    return out_states, out_arc, out_status, out_steps


def integrate_batch(
    system: FlowSystem,
    X0,
    t0: float,
    span: float,
    cfg: Optional[IntegratorConfig] = None,
    arc_slice: Optional[slice] = None,
):
    """Endpoint-only batch integration; failures come back as status codes.

    Returns (endpoints, arc_lengths, status, steps). Status 0 rows are
    trustworthy; others carry the tag in STATUS_TAGS and nan values.
    """
    cfg = cfg or DEFAULT_CONFIG
    X0 = np.ascontiguousarray(X0, dtype=np.float64)
    if X0.ndim != 2 or X0.shape[1] != system.dimension:
        raise ValueError(f"expected seeds of shape (n, {system.dimension})")
    if span == 0.0 or not math.isfinite(span):
        raise ValueError("span must be nonzero and finite")
    states, arc, status, steps = _advance(
        system.velocity, X0, t0, span, cfg, arc_slice=arc_slice
    )
    failed = status != OK
    if failed.any():
        states = states.copy()
        arc = arc.copy()
        states[failed] = np.nan
        arc[failed] = np.nan
    return states, arc, status, steps


def integrate(
    system: FlowSystem,
    x0,
    t0: float,
    span: float,
    cfg: Optional[IntegratorConfig] = None,
) -> Trajectory:
    """Integrate one seed, keeping every accepted point.

    Raises StepLimitExceeded, OverflowGuard, or StiffnessSuspected when the
    run cannot be completed within the configured budgets.
    """
    cfg = cfg or DEFAULT_CONFIG
    x0 = np.asarray(x0, dtype=np.float64)
    if x0.shape != (system.dimension,):
        raise ValueError(f"expected a state of shape ({system.dimension},)")
    if not np.all(np.isfinite(x0)):
        raise ValueError("initial state must be finite")
    if span == 0.0 or not math.isfinite(span):
        raise ValueError("span must be nonzero and finite")

    _, _, status, steps, samples = _advance(
        system.velocity, x0[None, :], t0, span, cfg, record=True
    )
    code = int(status[0])
    if code != OK:
        sigma_reached = samples[-1][0]
        raise _STATUS_EXCEPTIONS[code](
            f"{STATUS_TAGS[code]} after {int(steps[0])} steps at "
            f"t={t0 + math.copysign(sigma_reached, span):.9g} "
            f"(target t={t0 + span:.9g})"
        )

    sigmas = np.array([s for s, _ in samples])
    Z = np.array([z for _, z in samples])
    d = system.dimension
    if span > 0:
        times = t0 + sigmas
        states = Z[:, :d]
        arc = Z[:, d]
    else:
        times = (t0 - sigmas)[::-1]
        states = Z[::-1, :d]
        arc = Z[-1, d] - Z[::-1, d]
    return Trajectory(
        times=times, states=np.ascontiguousarray(states),
        arc_length=np.ascontiguousarray(arc), t0=t0, span=span,
    )
