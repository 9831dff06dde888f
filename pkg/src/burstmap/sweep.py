"""Parameter sweeps, period-window extraction and the eps-convergence table."""

from __future__ import annotations

import math
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .adaptmap import iterate, iterate_discard, w_star
from .errors import BurstmapError
from .model import ModelParams
from .orbits import AttractorResult, Kind, classify_samples
from .singular import c1_discrepancy, hausdorff_distance


@dataclass(frozen=True)
class SweepProtocol:
    transient: int = 1000
    sample: int = 100
    detect_sample: int = 200
    p_max: int = 64
    orbit_tol: float = 1e-7
    map_tol: float = 1e-8
    warm_start: bool = True
    w0: float | None = None
    workers: int = 1

    def __post_init__(self):
        if self.transient < 1 or self.sample < 1:
            raise ValueError("transient and sample must be positive")
        if self.detect_sample < 2 * self.p_max:
            raise ValueError("detect_sample must be at least 2 * p_max")
        if not (self.orbit_tol > 0 and self.map_tol > 0):
            raise ValueError("tolerances must be positive")


@dataclass(frozen=True)
class SweepRow:
    param_value: float
    samples: tuple[float, ...]
    attractor: AttractorResult | None
    error: str | None = None

    @property
    def label(self) -> str:
        return "Error" if self.attractor is None else self.attractor.label


def _row(params: ModelParams, w0: float, protocol: SweepProtocol) -> tuple[SweepRow, float]:
    v = params.v_reset
    try:
        w = iterate_discard(params, w0, protocol.transient, protocol.map_tol)
        n = max(protocol.sample, protocol.detect_sample)
        x, g = iterate(params, w, n, protocol.map_tol)
        att = classify_samples(params, x, g, protocol.orbit_tol, protocol.p_max)
        samples = tuple(float(s) for s in x[-protocol.sample:])
        return SweepRow(v, samples, att), float(x[-1])
    except BurstmapError as exc:
        return SweepRow(v, (), None, str(exc)), math.nan


def _cold_row(args):
    params, protocol = args
    w0 = w_star(params) if protocol.w0 is None else protocol.w0
    return _row(params, w0, protocol)[0]


def grid(v_range: tuple[float, float], step: float) -> np.ndarray:
    lo, hi = float(v_range[0]), float(v_range[1])
    if not step > 0:
        raise ValueError("step must be positive")
    n = int(math.floor((hi - lo) / step + 1e-9)) + 1
    return lo + step * np.arange(n)


def sweep_vr(params_base: ModelParams, v_range: tuple[float, float], step: float,
             protocol: SweepProtocol = SweepProtocol()) -> list[SweepRow]:
    """One SweepRow per v_reset on ``v_range`` (inclusive) with spacing ``step``.

    Warm start feeds each row the last iterate of the previous one; the
    first row (and every row in cold mode) starts from ``protocol.w0`` or,
    if unset, from the critical point w* of that row.
    """
    values = grid(v_range, step)
    if not protocol.warm_start:
        jobs = [(params_base.replace(v_reset=float(v)), protocol) for v in values]
        if protocol.workers > 1:
            with ProcessPoolExecutor(protocol.workers) as ex:
                return list(ex.map(_cold_row, jobs, chunksize=8))
        return [_cold_row(j) for j in jobs]
    rows = []
    w = protocol.w0
    for v in values:
        p = params_base.replace(v_reset=float(v))
        if w is None or not math.isfinite(w):
            w = w_star(p)
        row, w = _row(p, w, protocol)
        rows.append(row)
    return rows


@dataclass(frozen=True)
class Gap:
    v_lo: float
    v_hi: float
    classification: str
    counts: dict = field(default_factory=dict)

    @property
    def width(self) -> float:
        return self.v_hi - self.v_lo


@dataclass(frozen=True)
class WindowTable:
    windows: tuple[tuple[int, float, float], ...]
    gaps: tuple[Gap, ...]

    def window(self, k: int) -> tuple[int, float, float] | None:
        for w in self.windows:
            if w[0] == k:
                return w
        return None

    def gap_between(self, k: int) -> Gap | None:
        """Gap separating the k and k+1 windows when they are adjacent."""
        for (k1, _, _), (k2, _, _), g in zip(self.windows, self.windows[1:], self.gaps):
            if k1 == k and k2 == k + 1:
                return g
        return None

    def is_ordered(self) -> bool:
        ks = [w[0] for w in self.windows]
        bounds = [(w[1], w[2]) for w in self.windows]
        return all(a < b for a, b in zip(ks, ks[1:])) and all(
            h1 < l2 for (_, h1), (l2, _) in zip(bounds, bounds[1:]))

    def as_dict(self) -> dict:
        return {
            "windows": [{"k": k, "v_lo": lo, "v_hi": hi} for k, lo, hi in self.windows],
            "gaps": [{"v_lo": g.v_lo, "v_hi": g.v_hi, "width": g.width,
                      "classification": g.classification, "counts": dict(g.counts)} for g in self.gaps],
        }


def _window_k(row: SweepRow) -> int | None:
    """k when the row sits on an orbit with itinerary L^(k-1)R, k >= 2."""
    att = row.attractor
    if att is None or att.kind is not Kind.PERIODIC:
        return None
    k = att.period
    return k if att.itinerary == "L" * (k - 1) + "R" else None


def _gap_kind(row: SweepRow) -> str:
    att = row.attractor
    if att is None:
        return "undecided"
    if att.kind in (Kind.PERIODIC, Kind.FIXED_POINT):
        return "doubling"
    return "chaotic" if att.kind is Kind.CHAOTIC else "undecided"


def extract_windows(rows: list[SweepRow], min_run: int = 5) -> WindowTable:
    """Maximal runs (at least ``min_run`` rows) of L^(k-1)R orbits.

    Rows between two windows form a gap, classified by the majority kind
    of its rows: other periodic orbits count as doubling.
    """
    rows = sorted(rows, key=lambda r: r.param_value)
    runs = []
    i = 0
    while i < len(rows):
        k = _window_k(rows[i])
        j = i
        while j + 1 < len(rows) and _window_k(rows[j + 1]) == k:
            j += 1
        if k is not None and j - i + 1 >= min_run:
            runs.append((k, i, j))
        i = j + 1
    windows = tuple((k, rows[i].param_value, rows[j].param_value) for k, i, j in runs)
    gaps = []
    for (_, _, j), (_, i2, _) in zip(runs, runs[1:]):
        between = rows[j + 1:i2]
        counts = Counter(_gap_kind(r) for r in between)
        if counts:
            order = ("chaotic", "doubling", "undecided")
            cls = max(order, key=lambda c: (counts.get(c, 0), -order.index(c)))
        else:
            cls = "none"
        gaps.append(Gap(rows[j].param_value, rows[i2].param_value, cls, dict(counts)))
    return WindowTable(windows, tuple(gaps))


def compress_labels(rows: list[SweepRow], skip=("Undecided",)) -> list[str]:
    """Run-length compressed attractor labels, e.g. Periodic(2) -> Chaotic."""
    out = []
    for r in sorted(rows, key=lambda r: r.param_value):
        lab = r.label
        if lab in skip:
            continue
        if not out or out[-1] != lab:
            out.append(lab)
    return out


@dataclass(frozen=True)
class ConvergenceRow:
    eps: float
    v_reset: float
    hausdorff: float
    c1: float


@dataclass(frozen=True)
class ConvergenceTable:
    rows: tuple[ConvergenceRow, ...]
    hausdorff_slope: float
    c1_slope: float


def sweep_eps(params_base: ModelParams, eps_list, v_reset: float, n_grid: int = 2000,
              tol: float = 1e-10) -> ConvergenceTable:
    """Hausdorff and C1 distances to the singular map for each eps.

    The slopes are least-squares fits of log distance against log eps.
    """
    eps_list = [float(e) for e in eps_list]
    if any(b > a for a, b in zip(eps_list, eps_list[1:])):
        raise ValueError("eps_list must be non-increasing")
    rows = []
    for e in eps_list:
        p = params_base.replace(eps=e, v_reset=float(v_reset))
        rows.append(ConvergenceRow(e, float(v_reset), hausdorff_distance(p, n_grid, tol=tol),
                                   c1_discrepancy(p, n_grid, tol=tol)))
    slopes = (math.nan, math.nan)
    if len({r.eps for r in rows}) >= 2:
        le = np.log([r.eps for r in rows])
        slopes = tuple(float(np.polyfit(le, np.log([getattr(r, c) for r in rows]), 1)[0])
                       for c in ("hausdorff", "c1"))
    return ConvergenceTable(tuple(rows), *slopes)
