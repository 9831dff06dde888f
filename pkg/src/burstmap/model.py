"""Nonlinearity families, the vector field, geometric landmarks and
the standing assumptions of the hybrid model.

The subthreshold dynamics are::

    dv/dt = F(v) - w + I
    dw/dt = eps * (b v - w)

and when ``v`` blows up the state is reset to ``(v_reset, w + d)``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace

from . import _kernels as K


class Family(str, enum.Enum):
    QUARTIC = "quartic"
    EXPONENTIAL = "exponential"

    @property
    def code(self) -> int:
        return K.QUARTIC if self is Family.QUARTIC else K.EXPONENTIAL


@dataclass(frozen=True)
class ModelParams:
    """Full parameterization of the hybrid system (reset factor fixed to 1)."""

    family: Family = Family.QUARTIC
    a: float = 0.2
    b: float = 0.7
    I: float = 2.0  # noqa: E741
    d: float = 1.0
    eps: float = 0.4
    v_reset: float = 1.3

    def __post_init__(self):
        object.__setattr__(self, "family", Family(self.family))
        for name in ("a", "b", "I", "d", "eps", "v_reset"):
            val = float(getattr(self, name))
            if not math.isfinite(val):
                raise ValueError(f"{name} must be finite, got {val!r}")
            object.__setattr__(self, name, val)
        if self.eps <= 0:
            raise ValueError(f"eps must be > 0, got {self.eps!r}")
        if self.b <= 0:
            raise ValueError(f"b must be > 0, got {self.b!r}")
        if self.d < 0:
            raise ValueError(f"d must be >= 0, got {self.d!r}")

    def replace(self, **changes) -> "ModelParams":
        return replace(self, **changes)

    def kernel_args(self) -> tuple:
        """Positional prefix (fam, a, b, I, d, eps, vr) used by the kernels."""
        return (self.family.code, self.a, self.b, self.I, self.d, self.eps, self.v_reset)

    def F(self, v: float) -> float:
        return float(K.f_val(self.family.code, self.a, float(v)))

    def dF(self, v: float, order: int = 1) -> float:
        fn = {1: K.f_d1, 2: K.f_d2, 3: K.f_d3}[order]
        return float(fn(self.family.code, self.a, float(v)))


def standard_params(v_reset: float = 1.3, eps: float = 0.4) -> ModelParams:
    """Quartic family with a=0.2, b=0.7, I=2, d=1."""
    return ModelParams(Family.QUARTIC, 0.2, 0.7, 2.0, 1.0, eps, v_reset)


@dataclass(frozen=True)
class Landmarks:
    v_fold: float
    w_fold: float
    p0: float
    w_star: float
    w_star2: float
    plateau: float | None = None


def eval_field(params: ModelParams, v: float, w: float) -> tuple[float, float]:
    """Right-hand side ``(dv/dt, dw/dt)`` at ``(v, w)``."""
    v = float(v)
    w = float(w)
    if not (math.isfinite(v) and math.isfinite(w)):
        raise ValueError("eval_field needs finite (v, w)")
    dv = params.F(v) - w + params.I
    dw = params.eps * (params.b * v - w)
    return dv, dw


def find_fold(params: ModelParams, tol: float = 1e-12) -> tuple[float, float, float]:
    """Minimum of F: returns ``(v_fold, w_fold, p0)``."""
    if params.family is Family.QUARTIC:
        if params.a <= 0:
            raise ValueError("quartic family needs a > 0 for a fold left of 0")
        v = -((params.a / 2.0) ** (1.0 / 3.0))
    elif params.family is Family.EXPONENTIAL:
        v = 0.0
    else:  # pragma: no cover - closed enum
        raise ValueError(params.family)
    # polish with Newton on F' (a no-op for the closed forms, kept as a check)
    for _ in range(50):
        g = params.dF(v, 1)
        step = g / params.dF(v, 2)
        v -= step
        if abs(step) <= tol * max(1.0, abs(v)):
            break
    if abs(params.dF(v, 1)) > 1e-9:
        raise ValueError("Newton on F' did not converge; malformed family")
    w_fold = params.F(v) + params.I
    return v, w_fold, w_fold + params.d


def landmarks(params: ModelParams) -> Landmarks:
    v_f, w_f, p0 = find_fold(params)
    return Landmarks(
        v_fold=v_f,
        w_fold=w_f,
        p0=p0,
        w_star=params.F(params.v_reset) + params.I,
        w_star2=params.b * params.v_reset,
    )


@dataclass(frozen=True)
class AssumptionCheck:
    name: str
    passed: bool
    detail: str


@dataclass(frozen=True)
class AssumptionReport:
    checks: tuple[AssumptionCheck, ...]
    g_min: float
    g_argmin: float
    notes: tuple[str, ...] = field(default_factory=tuple)

    @property
    def all_pass(self) -> bool:
        return all(c.passed for c in self.checks)

    def __getitem__(self, name: str) -> AssumptionCheck:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def as_dict(self) -> dict:
        return {
            "all_pass": self.all_pass,
            "g_min": self.g_min,
            "g_argmin": self.g_argmin,
            "checks": {c.name: {"passed": c.passed, "detail": c.detail} for c in self.checks},
            "notes": list(self.notes),
        }


def _minimize_gap(params: ModelParams) -> tuple[float, float]:
    """Minimum of G(v) = F(v) + I - b v, which is strictly convex."""
    b = params.b
    gp = lambda v: params.dF(v, 1) - b  # noqa: E731
    # bracket the root of G' by expansion around 0, then Newton with bisection fallback
    lo, hi = -1.0, 1.0
    for _ in range(200):
        if gp(lo) < 0:
            break
        lo *= 2.0
    for _ in range(200):
        if gp(hi) > 0:
            break
        hi *= 2.0
    if not (gp(lo) < 0 < gp(hi)):
        # G' has no sign change: G is monotone, its infimum is at -inf
        return -math.inf, math.nan
    v = 0.0 if lo < 0.0 < hi else 0.5 * (lo + hi)
    for _ in range(200):
        g1 = gp(v)
        if g1 < 0:
            lo = v
        else:
            hi = v
        curv = params.dF(v, 2)
        v_new = v - g1 / curv if curv > 0 else 0.5 * (lo + hi)
        if not (lo < v_new < hi):
            v_new = 0.5 * (lo + hi)
        if abs(v_new - v) <= 1e-15 * max(1.0, abs(v)):
            v = v_new
            break
        v = v_new
    return params.F(v) + params.I - b * v, v


def check_assumptions(params: ModelParams) -> AssumptionReport:
    """Check convexity (with the plateau clause), no-equilibrium, reset
    placement and the blow-up growth condition."""
    checks = []
    notes = []
    v_f, _, _ = find_fold(params)

    if params.family is Family.QUARTIC:
        convex = params.a > 0
        checks.append(AssumptionCheck(
            "convexity", convex,
            "F'' = 12 v^2 > 0 away from 0 and F' -> -inf at -inf, plateau clause holds for all eps"
            if convex else "a <= 0: F has no interior fold"))
        checks.append(AssumptionCheck("blowup", True, "F(v)/v^3 -> inf, eta = 1 works"))
    else:
        limit = params.eps * (params.b + math.sqrt(2.0))
        ok = limit < 1.0
        checks.append(AssumptionCheck(
            "convexity", ok,
            f"F'' = e^v > 0; F' -> -1 at -inf, plateau clause needs eps(b+sqrt2) = {limit:.6g} < 1"))
        if not ok:
            notes.append("plateau clause violated: the decreasing right branch may not be bounded below")
        checks.append(AssumptionCheck("blowup", True, "F grows faster than any polynomial"))

    gmin, gargmin = _minimize_gap(params)
    checks.append(AssumptionCheck(
        "no_equilibrium", gmin > 0,
        f"min F(v)+I-bv = {gmin!r} at v = {gargmin!r}"))
    checks.append(AssumptionCheck(
        "reset_placement", params.v_reset > v_f,
        f"v_reset = {params.v_reset!r} vs v_fold = {v_f!r}"))
    order = {"convexity": 0, "no_equilibrium": 1, "reset_placement": 2, "blowup": 3}
    checks.sort(key=lambda c: order[c.name])
    return AssumptionReport(tuple(checks), gmin, gargmin, tuple(notes))
