"""Flights from the reset line to the next spike.

A flight starting at ``(v_reset, w0)`` with ``w0 <= w*`` rises monotonically
in ``v`` and is integrated as a graph ``W(v)``; one starting above ``w*``
first loops below the reset line and is integrated in time until it is back
on the rising branch.  Both return the adaptation value at blow-up and its
derivative with respect to ``w0``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from . import _kernels as K
from .errors import FlightError, PreconditionError
from .model import Family, ModelParams

DEFAULT_TOL = 1e-10
DEFAULT_MAX_STEPS = 1_000_000

_STATUS_TEXT = {
    K.ERR_BUDGET: "step budget exhausted",
    K.ERR_DENOMINATOR: "F(v) - W + I became non-positive on the rising branch",
    K.ERR_TAIL: "tail bound could not be pushed below tolerance",
    K.ERR_NONFINITE: "step size underflow or non-finite state",
}


class FlightMode(str, enum.Enum):
    DIRECT_RISE = "DirectRise"
    LOOP_THEN_RISE = "LoopThenRise"


@dataclass(frozen=True)
class SpikeFlight:
    w_start: float
    w_at_spike: float
    derivative: float
    crossing_w: float | None
    n_steps: int
    tail_bound: float
    mode: FlightMode


def _run(params: ModelParams, w0: float, tol: float, max_steps: int) -> SpikeFlight:
    if not tol > 0:
        raise ValueError("tol must be positive")
    w0 = float(w0)
    fam, a, b, I, _, eps, vr = params.kernel_args()
    wi, der, cross, n, bound, loop, _, st = K.flight(
        fam, a, b, I, eps, vr, w0, tol, int(max_steps), np.empty((0, 3))
    )
    mode = FlightMode.LOOP_THEN_RISE if loop else FlightMode.DIRECT_RISE
    if st != K.OK:
        raise FlightError(
            f"flight from w0={w0!r} failed: {_STATUS_TEXT.get(st, st)}",
            int(st),
            {"w_at_spike": float(wi), "n_steps": int(n), "tail_bound": float(bound)},
        )
    return SpikeFlight(
        w_start=w0,
        w_at_spike=float(wi),
        derivative=float(der),
        crossing_w=float(cross) if loop else None,
        n_steps=int(n),
        tail_bound=float(bound),
        mode=mode,
    )


def fly_direct(params: ModelParams, w0: float, tol: float = DEFAULT_TOL,
               max_steps: int = DEFAULT_MAX_STEPS) -> SpikeFlight:
    """Flight from below the v-nullcline (``w0 <= w*``)."""
    w_star = params.F(params.v_reset) + params.I
    if w0 > w_star:
        raise PreconditionError(f"fly_direct needs w0 <= w* = {w_star!r}, got {w0!r}")
    return _run(params, w0, tol, max_steps)


def fly_loop(params: ModelParams, w0: float, tol: float = DEFAULT_TOL,
             max_steps: int = DEFAULT_MAX_STEPS) -> SpikeFlight:
    """Flight from above the v-nullcline (``w0 > w*``)."""
    w_star = params.F(params.v_reset) + params.I
    if not w0 > w_star:
        raise PreconditionError(f"fly_loop needs w0 > w* = {w_star!r}, got {w0!r}")
    return _run(params, w0, tol, max_steps)


def fly(params: ModelParams, w0: float, tol: float = DEFAULT_TOL,
        max_steps: int = DEFAULT_MAX_STEPS) -> SpikeFlight:
    return _run(params, w0, tol, max_steps)


def variational(params: ModelParams, w0: float, tol: float = DEFAULT_TOL) -> float:
    """d(w_at_spike)/d(w0).

    The derivative is accumulated alongside the flight itself (log-derivative
    quadrature on the rising branch, first-variation ODE on the time leg), so
    this is a thin accessor.
    """
    return fly(params, w0, tol).derivative


def _field(params: ModelParams):
    F = {Family.QUARTIC: lambda v: v**4 + 2.0 * params.a * v,
         Family.EXPONENTIAL: lambda v: np.exp(v) - v}[params.family]
    b, I, eps = params.b, params.I, params.eps

    def rhs(t, y):
        return [F(y[0]) - y[1] + I, eps * (b * y[0] - y[1])]

    return rhs


def _time_to_level(params: ModelParams, w0: float, V: float, rtol: float,
                   t_max: float, dense: bool = False):
    rhs = _field(params)

    def hit(t, y):
        return y[0] - V

    hit.terminal = True
    hit.direction = 1
    sol = solve_ivp(rhs, (0.0, t_max), [params.v_reset, w0], method="DOP853",
                    rtol=rtol, atol=rtol * 0.1, events=hit, dense_output=dense)
    if sol.status != 1 or not len(sol.t_events[0]):
        raise FlightError(f"reference flight from w0={w0!r} never reached v={V!r}", -1)
    return sol


def reference_flight(params: ModelParams, w0: float, rtol: float = 1e-13,
                     t_max: float = 1e4) -> float:
    """Brute-force time-domain estimate of ``w_at_spike``.

    Integrates the unreduced system with DOP853 up to the levels ``v = V``
    and removes the algebraic tail by fitting ``W(V) = W_inf + c2/V^2 +
    c3/V^3 + c5/V^5`` (quartic).  The exponential tail is below round-off
    already at V = 40.  Independent of the compiled kernels; used as an
    oracle in tests.
    """
    if params.family is Family.EXPONENTIAL:
        sol = _time_to_level(params, w0, 40.0, rtol, t_max)
        return float(sol.y_events[0][0][1])
    Vs = np.array([40.0, 80.0, 160.0, 320.0])
    Ws = [float(_time_to_level(params, w0, V, rtol, t_max).y_events[0][0][1]) for V in Vs]
    A = np.stack([np.ones_like(Vs), Vs**-2.0, Vs**-3.0, Vs**-5.0], axis=1)
    return float(np.linalg.solve(A, np.asarray(Ws))[0])


def trajectory(params: ModelParams, w0: float, v_max: float = 50.0,
               n_points: int = 2000, rtol: float = 1e-10) -> np.ndarray:
    """Sampled ``(t, v, w)`` rows from the reset line up to ``v = v_max``."""
    sol = _time_to_level(params, float(w0), v_max, rtol, 1e4, dense=True)
    t_end = float(sol.t_events[0][0])
    # cluster samples toward the blow-up, where v changes fastest
    s = np.linspace(0.0, 1.0, n_points)
    ts = t_end * (1.0 - (1.0 - s) ** 3)
    vw = sol.sol(ts)
    return np.column_stack([ts, vw[0], vw[1]])
