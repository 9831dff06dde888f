"""The adaptation map Phi and scalar features derived from it."""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from . import _kernels as K
from .errors import BracketError, BurstmapError, FlightError, PreconditionError
from .flow import DEFAULT_MAX_STEPS, DEFAULT_TOL, SpikeFlight, fly
from .model import Landmarks, ModelParams, landmarks


@dataclass(frozen=True)
class MapSample:
    w: float
    phi: float
    dphi: float
    flight: SpikeFlight


@dataclass(frozen=True)
class SlopeBand:
    alpha: float
    xi: float


class Branch(str, enum.Enum):
    LEFT = "left"
    RIGHT = "right"


def w_star(params: ModelParams) -> float:
    return params.F(params.v_reset) + params.I


def phi(params: ModelParams, w: float, tol: float = DEFAULT_TOL) -> MapSample:
    fl = fly(params, w, tol)
    return MapSample(float(w), fl.w_at_spike + params.d, fl.derivative, fl)


def phi_values(params: ModelParams, ws, tol: float = DEFAULT_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Vectorised ``(Phi(w), Phi'(w))`` over an array of w."""
    ws = np.ascontiguousarray(np.asarray(ws, dtype=float).ravel())
    out = np.empty_like(ws)
    dout = np.empty_like(ws)
    st = K.phi_grid(*params.kernel_args(), ws, tol, DEFAULT_MAX_STEPS, out, dout)
    if st != K.OK:
        bad = ws[~np.isfinite(out)]
        raise FlightError(f"map evaluation failed (status {st}) at w={bad[:3]!r}", int(st))
    return out, dout


def phi_scalar(params: ModelParams, w: float, tol: float = DEFAULT_TOL) -> float:
    p, _, st = K.phi_value(*params.kernel_args(), float(w), tol, DEFAULT_MAX_STEPS)
    if st != K.OK:
        raise FlightError(f"map evaluation failed (status {st}) at w={w!r}", int(st))
    return float(p)


def dphi_scalar(params: ModelParams, w: float, tol: float = DEFAULT_TOL) -> float:
    _, dp, st = K.phi_value(*params.kernel_args(), float(w), tol, DEFAULT_MAX_STEPS)
    if st != K.OK:
        raise FlightError(f"map evaluation failed (status {st}) at w={w!r}", int(st))
    return float(dp)


def phi_iter(params: ModelParams, w: float, n: int, tol: float = DEFAULT_TOL) -> list[float]:
    """``[Phi(w), ..., Phi^n(w)]``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    out, _ = iterate(params, w, n, tol)
    return out.tolist()


def iterate(params: ModelParams, w0: float, n: int, tol: float = DEFAULT_TOL):
    """Arrays ``x[k] = Phi^(k+1)(w0)`` and ``g[k] = Phi'(Phi^k(w0))``."""
    out = np.empty(int(n))
    dout = np.empty(int(n))
    cnt, st = K.iterate(*params.kernel_args(), float(w0), int(n), tol, DEFAULT_MAX_STEPS, out, dout)
    if st != K.OK:
        raise FlightError(f"iteration stopped after {cnt} steps (status {st})", int(st),
                          {"count": int(cnt)})
    return out, dout


def iterate_discard(params: ModelParams, w0: float, n: int, tol: float = DEFAULT_TOL) -> float:
    w, cnt, st = K.iterate_discard(*params.kernel_args(), float(w0), int(n), tol, DEFAULT_MAX_STEPS)
    if st != K.OK:
        raise FlightError(f"iteration stopped after {cnt} steps (status {st})", int(st))
    return float(w)


def critical_orbit(params: ModelParams, n: int, tol: float = DEFAULT_TOL) -> np.ndarray:
    """``[w*, Phi(w*), ..., Phi^n(w*)]``."""
    ws = w_star(params)
    return np.concatenate([[ws], iterate(params, ws, n, tol)[0]])


def fixed_point(params: ModelParams, tol: float = DEFAULT_TOL, xtol: float = 1e-10,
                max_expand: int = 60) -> float:
    """The unique root of ``Phi(w) - w``."""
    lm = landmarks(params)
    lo, hi = lm.w_star2, lm.w_star + 10.0 * max(params.d, 1e-3)
    g = lambda w: phi_scalar(params, w, tol) - w  # noqa: E731
    glo, ghi = g(lo), g(hi)
    for _ in range(max_expand):
        if glo > 0 > ghi:
            break
        width = hi - lo
        if glo <= 0:
            lo -= width
            glo = g(lo)
        if ghi >= 0:
            hi += width
            ghi = g(hi)
    else:
        raise BracketError(f"Phi(w) - w keeps one sign on [{lo!r}, {hi!r}]")
    if glo == 0:
        return lo
    return float(brentq(g, lo, hi, xtol=xtol, rtol=4 * np.finfo(float).eps))


def slope_band(params: ModelParams, n_grid: int = 200, tol: float = DEFAULT_TOL) -> SlopeBand | None:
    """First and last points of ``[w*, Phi(w*)]`` where ``Phi' = -1``.

    Returns None when Phi' stays above -1 on that interval.
    """
    ws = w_star(params)
    top = phi_scalar(params, ws, tol)
    if top <= ws:
        return None
    grid = np.linspace(ws, top, n_grid)
    _, dp = phi_values(params, grid, tol)
    s = dp + 1.0
    idx = np.nonzero(np.sign(s[:-1]) * np.sign(s[1:]) < 0)[0]
    if idx.size == 0:
        if np.all(s < 0):  # pragma: no cover - Phi'(w*) = 0 rules this out
            return SlopeBand(ws, top)
        return None
    h = lambda w: dphi_scalar(params, w, tol) + 1.0  # noqa: E731
    alpha = brentq(h, grid[idx[0]], grid[idx[0] + 1], xtol=1e-12)
    xi = brentq(h, grid[idx[-1]], grid[idx[-1] + 1], xtol=1e-12)
    return SlopeBand(float(alpha), float(xi))


def plateau(params: ModelParams, tol: float = 1e-8, k_max: int = 40) -> float:
    """Limit of Phi(w) as w -> infinity, probed at ``w* + 2^k d``."""
    ws = w_star(params)
    d = max(params.d, 1e-3)
    prev = None
    for k in range(3, k_max + 1):
        val = phi_scalar(params, ws + 2.0**k * d, min(tol * 0.1, DEFAULT_TOL))
        if prev is not None:
            if val > prev + tol:
                raise BurstmapError(
                    f"plateau probe increased ({prev!r} -> {val!r}); decreasing right branch violated")
            if abs(val - prev) < tol:
                return val
        prev = val
    raise BurstmapError("plateau probe did not settle")


def landmarks_with_plateau(params: ModelParams, tol: float = 1e-8) -> Landmarks:
    from dataclasses import replace

    return replace(landmarks(params), plateau=plateau(params, tol))


@dataclass(frozen=True)
class SchwarzianEstimate:
    value: float
    error: float
    reliable: bool


def schwarzian_of(dphi, w: float, h: float = 1e-3) -> SchwarzianEstimate:
    """Schwarzian ``f'''/f' - 1.5 (f''/f')^2`` from a first-derivative callable.

    f'' and f''' come from central differences of ``dphi`` at steps h and h/2
    combined by Richardson extrapolation; the error is the size of that
    correction.
    """
    def diffs(step):
        fp, fm = dphi(w + step), dphi(w - step)
        return (fp - fm) / (2 * step), (fp - 2 * f0 + fm) / step**2

    f0 = dphi(w)
    d2h, d3h = diffs(h)
    d2q, d3q = diffs(h / 2)
    d2 = (4 * d2q - d2h) / 3
    d3 = (4 * d3q - d3h) / 3
    s_rich = d3 / f0 - 1.5 * (d2 / f0) ** 2
    s_half = d3q / f0 - 1.5 * (d2q / f0) ** 2
    err = abs(s_rich - s_half)
    return SchwarzianEstimate(float(s_rich), float(err), bool(err <= 0.1 * abs(s_rich)))


def schwarzian(params: ModelParams, w: float, h: float = 1e-3, exclusion: float | None = None,
               tol: float = 1e-11) -> SchwarzianEstimate:
    ws = w_star(params)
    r = 0.05 * params.d if exclusion is None else exclusion
    if abs(w - ws) <= r:
        raise PreconditionError(f"w={w!r} is within {r!r} of the critical point")
    return schwarzian_of(lambda x: dphi_scalar(params, x, tol), float(w), h)


def second_derivative_at_wstar(params: ModelParams, delta: float = 1e-3, tol: float = 1e-11) -> float:
    """Phi''(w*) from left-sided differences of Phi' (which vanishes at w*)."""
    if not params.dF(params.v_reset) > params.eps:
        raise PreconditionError("needs F'(v_reset) > eps")
    ws = w_star(params)
    # Phi'(w*) = 0, so (0 - Phi'(w* - delta)) / delta, extrapolated in delta
    one = -dphi_scalar(params, ws - delta, tol) / delta
    half = -dphi_scalar(params, ws - delta / 2, tol) / (delta / 2)
    return float(2 * half - one)


def invert_on_branch(params: ModelParams, y: float, branch: Branch | str,
                     tol: float = DEFAULT_TOL, xtol: float = 1e-12) -> float:
    """Solve ``Phi(w) = y`` on the increasing (left) or decreasing (right) branch."""
    branch = Branch(branch)
    ws = w_star(params)
    top = phi_scalar(params, ws, tol)
    if y > top:
        raise PreconditionError(f"y={y!r} exceeds the maximum Phi(w*)={top!r}")
    if y == top:
        return ws
    g = lambda w: phi_scalar(params, w, tol) - y  # noqa: E731
    step = max(params.d, 1e-3)
    sign = -1.0 if branch is Branch.LEFT else 1.0
    far = ws + sign * step
    for _ in range(60):
        if g(far) < 0:
            break
        step *= 2.0
        far = ws + sign * step
    else:
        raise PreconditionError(f"y={y!r} is outside the range of the {branch.value} branch")
    lo, hi = (far, ws) if branch is Branch.LEFT else (ws, far)
    return float(brentq(g, lo, hi, xtol=xtol, rtol=4 * np.finfo(float).eps))

