"""Asymptotic behaviour of Phi: periodic orbits, itineraries, Lyapunov
exponents, certified stable k-orbits and the exceptional set around them."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .adaptmap import (Branch, invert_on_branch, iterate, iterate_discard, phi_scalar,
                       phi_values, slope_band, w_star)
from .errors import AmbiguousItinerary
from .flow import DEFAULT_TOL
from .model import ModelParams


class Kind(str, enum.Enum):
    FIXED_POINT = "FixedPoint"
    PERIODIC = "Periodic"
    CHAOTIC = "Chaotic"
    UNDECIDED = "Undecided"


@dataclass(frozen=True)
class AttractorResult:
    kind: Kind
    period: int | None
    orbit: tuple[float, ...]
    itinerary: str
    multiplier: float
    lyapunov: float
    diameter: float = 0.0

    @property
    def label(self) -> str:
        if self.kind in (Kind.FIXED_POINT, Kind.PERIODIC):
            return f"Periodic({self.period})"
        return self.kind.value

    def as_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "period": self.period,
            "orbit": list(self.orbit),
            "itinerary": self.itinerary,
            "multiplier": self.multiplier,
            "lyapunov": self.lyapunov,
            "diameter": self.diameter,
        }


def canonical_word(word: str) -> str:
    """Least rotation of a cyclic word (L < R), e.g. RLL -> LLR."""
    if not word:
        return word
    return min(word[i:] + word[:i] for i in range(len(word)))


def itinerary(params: ModelParams, orbit, tol: float = 1e-12) -> str:
    """One letter per orbit point: L left of w*, R right of it."""
    ws = w_star(params)
    letters = []
    for i, w in enumerate(orbit):
        if abs(w - ws) < tol:
            raise AmbiguousItinerary(i, float(w), ws)
        letters.append("L" if w < ws else "R")
    return "".join(letters)


def _closure_period(x: np.ndarray, tol: float, p_max: int) -> int | None:
    for p in range(1, min(p_max, len(x) - 1) + 1):
        if np.max(np.abs(x[p:] - x[:-p])) < tol:
            return p
    return None


def _still_converging(x: np.ndarray, p_max: int) -> bool:
    """True when some lag p has closure errors that shrink markedly across
    the sample (a slowly settling periodic orbit rather than chaos)."""
    n = len(x)
    for p in range(1, min(p_max, n // 4) + 1):
        e = np.abs(x[p:] - x[:-p])
        q = len(e) // 4
        head, tail = e[:q].max(), e[-q:].max()
        if head > 0 and tail < 0.25 * head:
            return True
    return False


def detect_attractor(params: ModelParams, w0: float, transient_n: int = 1000,
                     sample_n: int = 200, tol: float = 1e-7, p_max: int = 64,
                     map_tol: float = DEFAULT_TOL, return_samples: bool = False):
    """Classify the asymptotic behaviour of the orbit of ``w0``.

    Periodic orbits are reported phase-aligned to start at their largest
    point (which is right of w* whenever any point is), and the itinerary is
    given as the least rotation of the cyclic L/R word.
    """
    if transient_n < 1:
        raise ValueError("transient_n must be >= 1")
    if sample_n < 2 * p_max:
        raise ValueError("sample_n must be at least 2 * p_max")
    w = iterate_discard(params, w0, transient_n, map_tol)
    x, g = iterate(params, w, sample_n, map_tol)
    res = classify_samples(params, x, g, tol, p_max)
    return (res, x) if return_samples else res


def classify_samples(params: ModelParams, x: np.ndarray, g: np.ndarray, tol: float = 1e-7,
                     p_max: int = 64) -> AttractorResult:
    """Classify a post-transient sample ``x`` with derivatives ``g`` where
    ``x[k] = Phi(x[k-1])`` and ``g[k]`` is Phi' at ``x[k-1]``."""
    diam = float(np.ptp(x))
    p = _closure_period(x, tol, p_max)
    if p is None:
        lyap = float(np.mean(np.log(np.abs(g))))
        if diam > 10 * tol and not _still_converging(x, p_max):
            return AttractorResult(Kind.CHAOTIC, None, (), "", float("nan"), lyap, diam)
        return AttractorResult(Kind.UNDECIDED, None, (), "", float("nan"), lyap, diam)
    cyc = x[-p:]
    start = int(np.argmax(cyc))
    orbit = np.roll(cyc, -start)
    mult = float(np.prod(g[-p:]))
    lyap = float(np.log(abs(mult)) / p) if mult != 0 else float("-inf")
    try:
        word = canonical_word(itinerary(params, orbit))
    except AmbiguousItinerary:
        word = "?" * p
    kind = Kind.FIXED_POINT if p == 1 else Kind.PERIODIC
    return AttractorResult(kind, p, tuple(float(v) for v in orbit), word, mult, lyap, diam)


@dataclass(frozen=True)
class LyapunovEstimate:
    value: float
    band: float
    n: int


def lyapunov(params: ModelParams, w0: float, n: int = 100_000, transient_n: int = 1000,
             tol: float = DEFAULT_TOL) -> LyapunovEstimate:
    """Mean of ``log|Phi'|`` along ``n`` post-transient iterates.

    ``band`` is the gap between the first-half and full-sample means.
    """
    if n < 1000:
        raise ValueError("n must be >= 1000")
    w = iterate_discard(params, w0, transient_n, tol) if transient_n > 0 else float(w0)
    ws = w_star(params)
    logs = np.empty(n)
    done = 0
    while done < n:
        if w == ws:
            w = ws + 1e-12
        x, g = iterate(params, w, n - done, tol)
        zero = np.nonzero(g == 0.0)[0]
        stop = zero[0] if zero.size else len(g)
        logs[done:done + stop] = np.log(np.abs(g[:stop]))
        done += stop
        if zero.size:
            # landed exactly on w*: nudge and carry on
            w = ws + 1e-12
        else:
            w = x[-1]
    full = float(np.mean(logs))
    half = float(np.mean(logs[: n // 2]))
    return LyapunovEstimate(full, abs(full - half), n)


@dataclass(frozen=True)
class Certificate:
    k: int
    w_tilde: float
    orbit: AttractorResult
    multiplier: float
    critical_orbit: tuple[float, ...]
    flags: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return True

    def as_dict(self) -> dict:
        return {"certified": True, "k": self.k, "w_tilde": self.w_tilde,
                "multiplier": self.multiplier, "orbit": self.orbit.as_dict(),
                "flags": dict(self.flags)}


@dataclass(frozen=True)
class Failure:
    reason: str
    detail: str

    @property
    def ok(self) -> bool:
        return False

    def as_dict(self) -> dict:
        return {"certified": False, "reason": self.reason, "detail": self.detail}


def certify_k(params: ModelParams, n_grid: int = 400, i_max: int = 64,
              tol: float = DEFAULT_TOL) -> Certificate | Failure:
    """Check the sufficient conditions for a stable k-periodic orbit with
    itinerary L^(k-1)R, and locate that orbit."""
    ws = w_star(params)
    c, _ = iterate(params, ws, i_max + 2, tol)
    crit = np.concatenate([[ws], c])  # crit[i] = Phi^i(w*)
    if not (crit[2] < ws < crit[1]):
        return Failure("precondition", f"need Phi^2(w*) < w* < Phi(w*); got {crit[2]!r}, {ws!r}, {crit[1]!r}")
    if not crit[3] < ws:
        return Failure("precondition", f"need Phi^3(w*) < w*; got {crit[3]!r}")
    above = [i for i in range(3, i_max + 1) if crit[i + 1] > ws]
    if not above:
        return Failure("k", f"Phi^(i+1)(w*) stays below w* for i <= {i_max}")
    k = above[0]
    band = slope_band(params, tol=tol)
    if band is None:
        return Failure("slope_band", "Phi' > -1 on [w*, Phi(w*)]")
    xi = band.xi
    if not crit[k + 1] > xi:
        return Failure("order", f"Phi^{k + 1}(w*) = {crit[k + 1]!r} is not above xi = {xi!r}")
    cand = np.linspace(xi, crit[1], n_grid, endpoint=False)
    cand = cand[cand < crit[k + 1]]
    ok = np.ones(cand.size, dtype=bool)
    y = cand.copy()
    for i in range(2, k + 1):
        y, _ = phi_values(params, y, tol)  # y = Phi^(i-1)(w~)
        ok &= (crit[i] < y) & (y < ws)
    idx = np.nonzero(ok)[0]
    if idx.size == 0:
        return Failure("witness", f"no w~ on the {n_grid}-point grid over [xi, Phi(w*)) satisfies the ordering")
    w_tilde = float(cand[idx[0]])
    att = detect_attractor(params, ws, map_tol=tol)
    flags = {
        "period_matches": att.period == k,
        "itinerary_ok": att.itinerary == "L" * (k - 1) + "R",
        "stable": bool(abs(att.multiplier) < 1),
        "w_tilde_in_band": bool(xi <= w_tilde < crit[1]),
    }
    return Certificate(k, w_tilde, att, att.multiplier, tuple(float(v) for v in crit[: k + 2]), flags)


@dataclass(frozen=True)
class BasinGap:
    length: float
    intervals: tuple[tuple[float, float], ...]
    w_tilde: float


def basin_gap(params: ModelParams, cert: Certificate, tol: float = DEFAULT_TOL) -> BasinGap:
    """Total length of the exceptional set A_1 u ... u A_(k-1) built from
    the witness w~ of a certificate."""
    ws = w_star(params)
    top = phi_scalar(params, ws, tol)
    low = cert.critical_orbit[2]
    gamma = invert_on_branch(params, cert.w_tilde, Branch.RIGHT, tol)
    a, b = sorted((gamma, cert.w_tilde))
    intervals = [(a, b)]
    for _ in range(2, cert.k):
        lo_y, hi_y = intervals[-1]
        hi_y = min(hi_y, top)
        if lo_y >= hi_y:
            intervals.append((ws, ws))
            continue
        lo = invert_on_branch(params, lo_y, Branch.LEFT, tol)
        hi = invert_on_branch(params, hi_y, Branch.LEFT, tol)
        lo, hi = max(lo, low), min(hi, ws)
        intervals.append((lo, max(lo, hi)))
    length = float(sum(h - l for l, h in intervals))
    return BasinGap(length, tuple(intervals), cert.w_tilde)


def basin_escapes(params: ModelParams, cert: Certificate, gap: BasinGap, n_starts: int = 100,
                  max_iter: int = 500, seed: int = 0, tol: float = DEFAULT_TOL,
                  match_tol: float = 1e-6) -> int:
    """Monte Carlo check of attraction: number of random starts in the core
    (outside the exceptional set) that fail to reach the certified orbit."""
    rng = np.random.default_rng(seed)
    lo, hi = cert.critical_orbit[2], cert.critical_orbit[1]
    orbit = np.asarray(cert.orbit.orbit)
    starts = []
    while len(starts) < n_starts:
        w = rng.uniform(lo, hi)
        if any(a < w < b for a, b in gap.intervals):
            continue
        starts.append(w)
    misses = 0
    for w in starts:
        x, _ = iterate(params, w, max_iter, tol)
        if np.min(np.abs(orbit - x[-1])) > match_tol:
            misses += 1
    return misses
