"""Chaos diagnostics: the shape conditions on the critical orbit,
2-horseshoe (turbulence) witnesses, Misiurewicz parameter tuning and
invariant-density histograms."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .adaptmap import dphi_scalar, fixed_point, iterate, iterate_discard, phi_values, slope_band, w_star
from .errors import BracketError, BurstmapError
from .flow import DEFAULT_TOL
from .model import ModelParams

IMPLIED = (
    "periodic orbits of all periods",
    "positive topological entropy",
    "chaos in the sense of Devaney, Li-Yorke and Block-Coppel on an invariant subset",
)


@dataclass(frozen=True)
class TurbulenceWitness:
    m: int
    A1: tuple[float, float]
    A2: tuple[float, float]


@dataclass(frozen=True)
class ChaosReport:
    shape_ok: bool
    order_ok: bool
    fixed_point_unstable: bool
    turbulence_witness: TurbulenceWitness | None
    critical: tuple[float, float, float, float]
    w_fixed: float
    dphi_fixed: float
    implied: tuple[str, ...] = ()
    notes: tuple[str, ...] = ()

    def as_dict(self) -> dict:
        tw = self.turbulence_witness
        return {
            "shape_ok": self.shape_ok,
            "order_ok": self.order_ok,
            "fixed_point_unstable": self.fixed_point_unstable,
            "turbulence_witness": None if tw is None else {"m": tw.m, "A1": list(tw.A1), "A2": list(tw.A2)},
            "w_star": self.critical[0],
            "phi_w_star": self.critical[1],
            "phi2_w_star": self.critical[2],
            "phi3_w_star": self.critical[3],
            "w_fixed": self.w_fixed,
            "dphi_fixed": self.dphi_fixed,
            "implied": list(self.implied),
            "notes": list(self.notes),
        }


def dynamical_core(params: ModelParams, tol: float = DEFAULT_TOL) -> tuple[float, float]:
    """``[Phi^2(w*), Phi(w*)]``."""
    x, _ = iterate(params, w_star(params), 2, tol)
    return float(min(x[0], x[1])), float(max(x[0], x[1]))


def chaos_conditions(params: ModelParams, tol: float = DEFAULT_TOL, witness: bool = True,
                     marginal: float = 1e-6) -> ChaosReport:
    ws = w_star(params)
    x, _ = iterate(params, ws, 3, tol)
    c1, c2, c3 = (float(v) for v in x)
    shape = c2 < ws < c1
    order = shape and c2 < c3 < ws
    wf = fixed_point(params, tol)
    dwf = dphi_scalar(params, wf, tol)
    notes = []
    gaps = {"Phi^2(w*) vs w*": ws - c2, "Phi(w*) vs w*": c1 - ws,
            "Phi^3(w*) vs w*": ws - c3, "Phi^3(w*) vs Phi^2(w*)": c3 - c2}
    for name, g in gaps.items():
        if abs(g) < marginal:
            notes.append(f"marginal: {name} differ by {g:.3g}")
    notes.append("Misiurewicz-type statements are checked to finite precision only")
    tw = turbulence_witness(params, 2, tol=tol) if (witness and order) else None
    return ChaosReport(shape, order, bool(dwf < -1.0), tw, (ws, c1, c2, c3), wf, dwf,
                       IMPLIED if order else (), tuple(notes))


def _phi_m(params: ModelParams, w: np.ndarray, m: int, tol: float) -> np.ndarray:
    y = np.asarray(w, dtype=float)
    for _ in range(m):
        y, _ = phi_values(params, y, tol)
    return y


def _laps(y: np.ndarray) -> list[tuple[int, int]]:
    """Index ranges [i, j] of maximal monotone runs of a sampled function."""
    s = np.sign(np.diff(y))
    # flat steps inherit the previous direction
    for i in range(1, len(s)):
        if s[i] == 0:
            s[i] = s[i - 1]
    laps = []
    start = 0
    for i in range(1, len(s)):
        if s[i] != s[i - 1]:
            laps.append((start, i))
            start = i
    laps.append((start, len(y) - 1))
    return laps


def turbulence_witness(params: ModelParams, m: int = 2, n_grid: int = 2000, margin: float = 1e-6,
                       tol: float = DEFAULT_TOL) -> TurbulenceWitness | None:
    """Search for closed intervals A1 < A2 (disjoint interiors) with
    ``A1 u A2`` inside both ``f(A1)`` and ``f(A2)``, ``f = Phi^m``.

    Each interval lies in one monotone lap of f, so its image is spanned by
    the values at its endpoints.  For a given hull ``[x1, y2]`` the largest
    admissible choice is ``A1 = [x1, end of its lap]`` and ``A2 = [start of
    its lap, y2]``, which reduces the search to pairs of grid points.
    """
    if m not in (2, 3, 4):
        raise ValueError("m must be 2, 3 or 4")
    lo, hi = dynamical_core(params, tol)
    if not hi > lo:
        return None
    w = np.linspace(lo, hi, n_grid)
    f = _phi_m(params, w, m, tol)
    laps = _laps(f)
    for a in range(len(laps)):
        i0, i1 = laps[a]
        for b in range(a + 1, len(laps)):
            j0, j1 = laps[b]
            if j0 < i1:
                continue
            x1 = np.arange(i0, i1)  # left end of A1 (A1 = [w[x1], w[i1]])
            y2 = np.arange(j0 + 1, j1 + 1)  # right end of A2 (A2 = [w[j0], w[y2]])
            # images: f on a lap is monotone, so min/max sit at the endpoints
            f1lo = np.minimum(f[x1], f[i1])[:, None]
            f1hi = np.maximum(f[x1], f[i1])[:, None]
            f2lo = np.minimum(f[j0], f[y2])[None, :]
            f2hi = np.maximum(f[j0], f[y2])[None, :]
            need_lo = w[x1][:, None] - margin
            need_hi = w[y2][None, :] + margin
            good = (f1lo <= need_lo) & (f1hi >= need_hi) & (f2lo <= need_lo) & (f2hi >= need_hi)
            hits = np.argwhere(good)
            if hits.size:
                p, q = hits[0]
                return TurbulenceWitness(m, (float(w[x1[p]]), float(w[i1])),
                                         (float(w[j0]), float(w[y2[q]])))
    return None


def verify_turbulence(params: ModelParams, witness: TurbulenceWitness, n: int = 100,
                      tol: float = DEFAULT_TOL) -> bool:
    """Brute-force re-check: sample each interval, push it through Phi^m and
    confirm the sampled images reach past both ends of ``A1 u A2``.  By the
    intermediate value theorem the image interval then covers the union."""
    (a1, b1), (a2, b2) = witness.A1, witness.A2
    if not (a1 < b1 <= a2 < b2):
        return False
    lo, hi = a1, b2
    for a, b in (witness.A1, witness.A2):
        img = _phi_m(params, np.linspace(a, b, n), witness.m, tol)
        if not (img.min() <= lo and img.max() >= hi):
            return False
    return True


@dataclass(frozen=True)
class MisiurewiczResult:
    v_reset: float
    k: int
    residual: float
    w_fixed: float
    band: tuple[float, float] | None
    fixed_in_band: bool
    verified: bool
    notes: tuple[str, ...] = field(default_factory=tuple)

    def as_dict(self) -> dict:
        return {"v_reset": self.v_reset, "k": self.k, "residual": self.residual,
                "w_fixed": self.w_fixed, "band": None if self.band is None else list(self.band),
                "fixed_in_band": self.fixed_in_band, "verified": self.verified,
                "notes": list(self.notes)}


def misiurewicz_residual(params: ModelParams, k: int, tol: float = DEFAULT_TOL) -> float:
    """``Phi^(k+1)(w*) - w_f``."""
    top = iterate_discard(params, w_star(params), k + 1, tol)
    return top - fixed_point(params, tol)


def tune_misiurewicz(params: ModelParams, k: int, bracket: tuple[float, float],
                     xtol: float = 1e-6, tol: float = DEFAULT_TOL) -> MisiurewiczResult:
    """Find v_reset in ``bracket`` where the critical point lands on the
    fixed point after k+1 steps."""
    lo, hi = float(bracket[0]), float(bracket[1])
    h = lambda v: misiurewicz_residual(params.replace(v_reset=v), k, tol)  # noqa: E731
    hlo, hhi = h(lo), h(hi)
    if not np.sign(hlo) * np.sign(hhi) < 0:
        raise BracketError(
            f"Phi^{k + 1}(w*) - w_f has the same sign at v_reset={lo!r} ({hlo:.3g}) and {hi!r} ({hhi:.3g});"
            " refine the sweep to bracket a root")
    # bisection contract is xtol; brentq converges far past it, keeping the residual small
    v = float(brentq(h, lo, hi, xtol=min(xtol, 1e-12), rtol=4 * np.finfo(float).eps))
    p = params.replace(v_reset=v)
    res = h(v)
    wf = fixed_point(p, tol)
    band = slope_band(p, tol=tol)
    in_band = band is not None and band.alpha < wf < band.xi
    notes = ("finite-precision check of the critical-orbit landing; the exact Misiurewicz"
             " property is not finitely decidable",)
    return MisiurewiczResult(v, k, float(res), wf, None if band is None else (band.alpha, band.xi),
                             bool(in_band), bool(abs(res) < 1e-4 and in_band), notes)


@dataclass(frozen=True)
class DensityEstimate:
    bins: int
    support: tuple[float, float]
    mass: np.ndarray
    n_samples: int

    @property
    def edges(self) -> np.ndarray:
        return np.linspace(self.support[0], self.support[1], self.bins + 1)

    @property
    def centers(self) -> np.ndarray:
        e = self.edges
        return 0.5 * (e[:-1] + e[1:])


def _histogram(x: np.ndarray, support: tuple[float, float], bins: int) -> np.ndarray:
    counts, _ = np.histogram(x, bins=bins, range=support)
    total = counts.sum()
    return counts / total


def acip_histogram(params: ModelParams, w0: float | None = None, n: int = 1_000_000,
                   bins: int = 200, transient_n: int = 1000, seed: int | None = None,
                   tol: float = 1e-8, return_samples: bool = False):
    """Histogram of ``n`` post-transient iterates over the dynamical core.

    With ``w0=None`` the start is drawn uniformly from the core using
    ``seed``.
    """
    if n < 100_000:
        raise ValueError("n must be >= 1e5")
    lo, hi = dynamical_core(params, DEFAULT_TOL)
    if w0 is None:
        w0 = float(np.random.default_rng(seed).uniform(lo, hi))
    w = iterate_discard(params, w0, transient_n, tol)
    x, _ = iterate(params, w, n, tol)
    slack = 1e-9 * max(1.0, hi - lo)
    if x.min() < lo - slack or x.max() > hi + slack:
        raise BurstmapError(f"orbit left the core [{lo!r}, {hi!r}]: range [{x.min()!r}, {x.max()!r}]")
    x = np.clip(x, lo, hi)
    est = DensityEstimate(bins, (lo, hi), _histogram(x, (lo, hi), bins), n)
    return (est, x) if return_samples else est


def l1_distance(p: DensityEstimate, q: DensityEstimate) -> float:
    if p.bins != q.bins or not np.allclose(p.support, q.support, rtol=0, atol=1e-12):
        raise ValueError("estimates live on different partitions")
    return float(np.abs(p.mass - q.mass).sum())


def pushforward_l1(params: ModelParams, samples: np.ndarray, est: DensityEstimate,
                   tol: float = 1e-8) -> float:
    """L1 gap between the histogram of ``samples`` and that of their images.

    The images are fresh evaluations of Phi, not the next iterates of the
    stored run.
    """
    img, _ = phi_values(params, np.asarray(samples, dtype=float), tol)
    img = np.clip(img, *est.support)
    return float(np.abs(_histogram(img, est.support, est.bins) - est.mass).sum())
