"""Singular limit Phi0 of the adaptation map and convergence checks.

Phi0 translates by ``d`` up to the critical point and is constant equal to
``p0 = w_fold + d`` beyond it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .adaptmap import phi_values
from .model import ModelParams, landmarks


@dataclass(frozen=True)
class SingularMap:
    w_star: float
    p0: float
    d: float

    @classmethod
    def from_params(cls, params: ModelParams) -> "SingularMap":
        lm = landmarks(params)
        return cls(lm.w_star, lm.p0, params.d)

    @property
    def well_formed(self) -> bool:
        return self.w_star + self.d > self.p0


def phi0(m: SingularMap, w):
    """Phi0, elementwise for arrays."""
    if np.ndim(w) == 0:
        return w + m.d if w <= m.w_star else m.p0
    w = np.asarray(w, dtype=float)
    return np.where(w <= m.w_star, w + m.d, m.p0)


def phi0_period_floor(m: SingularMap) -> int:
    """``floor((w* - p0)/d) + 2`` without any correction."""
    if m.w_star < m.p0:
        return 1
    return int(math.floor((m.w_star - m.p0) / m.d)) + 2


def phi0_period(m: SingularMap) -> int:
    """Smallest k with ``p0 + (k-1) d > w*`` (1 when w* < p0)."""
    if m.w_star < m.p0:
        return 1
    # p0 + (k-1) d evaluated by repeated addition, as phi0 itself produces it
    return len(phi0_orbit(m))


def phi0_orbit(m: SingularMap) -> list[float]:
    # accumulate like phi0 does so the list matches iterates bit for bit
    if m.w_star >= m.p0 and not m.d > 0:
        raise ValueError("orbit needs d > 0")
    out = [m.p0]
    while out[-1] <= m.w_star:
        out.append(out[-1] + m.d)
    return out


def phi0_brute_period(m: SingularMap, max_steps: int = 1_000_000) -> int:
    """Return time of p0 under repeated application of phi0."""
    w = phi0(m, m.p0)
    for n in range(1, max_steps + 1):
        if w == m.p0:
            return n
        w = phi0(m, w)
    raise RuntimeError("no return to p0")


def _base_grid(params: ModelParams, n_grid: int, cluster_frac: float) -> np.ndarray:
    lm = landmarks(params)
    d = max(params.d, 1e-3)
    lo, hi = lm.w_star2 - 5 * d, lm.w_star + 10 * d
    n_cluster = int(round(cluster_frac * n_grid))
    n_side = n_cluster // 2
    uniform = np.linspace(lo, hi, n_grid - 2 * n_side)
    offs = np.geomspace(1e-6 * d, d / 10, n_side)
    grid = np.concatenate([uniform, lm.w_star - offs, lm.w_star + offs, [lm.w_star]])
    return np.unique(grid)


def phi_graph(params: ModelParams, n_grid: int = 2000, cluster_frac: float = 0.2,
              tol: float = 1e-10, refine: bool = True, max_rounds: int = 80):
    """Sample the graph of Phi as (w, y) points.

    Starting from the clustered grid, midpoints are inserted wherever two
    neighbouring samples are further apart than the mean grid spacing.
    Where the graph drops faster than double precision can resolve (a
    bracket narrower than 1e-12 relative), the drop is filled by a vertical
    run of points: by continuity the graph passes through every
    intermediate height inside that bracket.
    """
    w = _base_grid(params, n_grid, cluster_frac)
    y, _ = phi_values(params, w, tol)
    if not refine:
        return w, y, np.empty((0, 2))
    res = (w[-1] - w[0]) / n_grid
    fills = []
    for _ in range(max_rounds):
        gap = np.hypot(np.diff(w), np.diff(y))
        dw = np.diff(w)
        wide = gap > res
        tiny = dw <= 1e-12 * np.maximum(1.0, np.abs(w[:-1]))
        todo = np.nonzero(wide & ~tiny)[0]
        if todo.size == 0:
            for i in np.nonzero(wide & tiny)[0]:
                n = int(math.ceil(abs(y[i + 1] - y[i]) / res)) + 1
                ys = np.linspace(y[i], y[i + 1], n)[1:-1]
                fills.append(np.column_stack([np.full(ys.size, 0.5 * (w[i] + w[i + 1])), ys]))
            break
        mid = 0.5 * (w[todo] + w[todo + 1])
        ym, _ = phi_values(params, mid, tol)
        w = np.concatenate([w, mid])
        y = np.concatenate([y, ym])
        order = np.argsort(w, kind="stable")
        w, y = w[order], y[order]
    fill = np.concatenate(fills) if fills else np.empty((0, 2))
    return w, y, fill


def phi0_graph(m: SingularMap, w: np.ndarray, n_segment: int = 200) -> np.ndarray:
    pts = np.column_stack([w, phi0(m, w)])
    seg = np.column_stack([np.full(n_segment, m.w_star),
                           np.linspace(m.p0, m.w_star + m.d, n_segment)])
    return np.concatenate([pts, seg])


def hausdorff_points(A: np.ndarray, B: np.ndarray) -> float:
    """Symmetric Hausdorff distance between two finite point sets in the plane."""
    if len(A) == 0 or len(B) == 0:
        raise ValueError("empty point set")
    da, _ = cKDTree(B).query(A)
    db, _ = cKDTree(A).query(B)
    return float(max(da.max(), db.max()))


def hausdorff_distance(params: ModelParams, n_grid: int = 2000, n_segment: int = 200,
                       cluster_frac: float = 0.2, tol: float = 1e-10) -> float:
    """Discrete Hausdorff distance between the graphs of Phi and Phi0.

    Phi0's graph is closed up with the vertical segment at w*.
    """
    w, y, fill = phi_graph(params, n_grid, cluster_frac, tol)
    G = np.concatenate([np.column_stack([w, y]), fill])
    G0 = phi0_graph(SingularMap.from_params(params), w, n_segment)
    return hausdorff_points(G, G0)


def c1_discrepancy(params: ModelParams, n_grid: int = 2000, exclusion: float = 0.1,
                   tol: float = 1e-10) -> float:
    """max |Phi' - Phi0'| on the grid with ``|w - w*| >= exclusion``."""
    lm = landmarks(params)
    d = max(params.d, 1e-3)
    w = np.linspace(lm.w_star2 - 5 * d, lm.w_star + 10 * d, n_grid)
    w = w[np.abs(w - lm.w_star) >= exclusion]
    _, dp = phi_values(params, w, tol)
    target = np.where(w < lm.w_star, 1.0, 0.0)
    return float(np.max(np.abs(dp - target)))
