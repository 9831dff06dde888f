"""Compiled integration kernels for the hybrid integrate-and-fire flow.

Everything here works on plain floats so that numba can compile it; the
public, typed API lives in :mod:`burstmap.flow` and :mod:`burstmap.adaptmap`.

Two integration regimes are used.  Below the v-nullcline the orbit is a
graph over ``v`` and we integrate ``dW/dv`` together with the logarithm of
the first variation; this removes the finite-time blow-up.  Close to (or
above) the v-nullcline we integrate in time together with the linearised
flow until the orbit is safely on the rising branch, then hand over.
"""

from __future__ import annotations

import numpy as np
from numba import njit

QUARTIC = 0
EXPONENTIAL = 1

# status codes returned by the kernels
OK = 0
ERR_BUDGET = 1
ERR_DENOMINATOR = 2
ERR_TAIL = 3
ERR_NONFINITE = 4

# hand-over threshold on dv/dt between time-domain and v-parameterised legs
G_SWITCH = 0.25

# Dormand-Prince 5(4) tableau with the 4th order dense output
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0])
_A = np.array(
    [
        [0.0, 0.0, 0.0, 0.0, 0.0],
        [1 / 5, 0.0, 0.0, 0.0, 0.0],
        [3 / 40, 9 / 40, 0.0, 0.0, 0.0],
        [44 / 45, -56 / 15, 32 / 9, 0.0, 0.0],
        [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729, 0.0],
        [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    ]
)
_B = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84])
_E = np.array(
    [-71 / 57600, 0.0, 71 / 16695, -71 / 1920, 17253 / 339200, -22 / 525, 1 / 40]
)
_P = np.array(
    [
        [1.0, -8048581381 / 2820520608, 8663915743 / 2820520608, -12715105075 / 11282082432],
        [0.0, 0.0, 0.0, 0.0],
        [0.0, 131558114200 / 32700410799, -68118460800 / 10900136933, 87487479700 / 32700410799],
        [0.0, -1754552775 / 470086768, 14199869525 / 1410260304, -10690763975 / 1880347072],
        [0.0, 127303824393 / 49829197408, -318862633887 / 49829197408, 701980252875 / 199316789632],
        [0.0, -282668133 / 205662961, 2019193451 / 616988883, -1453857185 / 822651844],
        [0.0, 40617522 / 29380423, -110615467 / 29380423, 69997945 / 29380423],
    ]
)

_GL_LO_X, _GL_LO_W = np.polynomial.legendre.leggauss(12)
_GL_HI_X, _GL_HI_W = np.polynomial.legendre.leggauss(24)


@njit(cache=True)
def f_val(fam, a, v):
    if fam == QUARTIC:
        return v**4 + 2.0 * a * v
    return np.exp(v) - v


@njit(cache=True)
def f_d1(fam, a, v):
    if fam == QUARTIC:
        return 4.0 * v**3 + 2.0 * a
    return np.exp(v) - 1.0


@njit(cache=True)
def f_d2(fam, a, v):
    if fam == QUARTIC:
        return 12.0 * v * v
    return np.exp(v)


@njit(cache=True)
def f_d3(fam, a, v):
    if fam == QUARTIC:
        return 24.0 * v
    return np.exp(v)


@njit(cache=True)
def _rhs(kind, fam, a, b, I, eps, x, y, out):
    """kind 0: x=v, y=(W, log dW/dw0).  kind 1: x=t, y=(v, w, dv, dw)."""
    if kind == 0:
        fv = f_val(fam, a, x)
        g = fv - y[0] + I
        out[0] = eps * (b * x - y[0]) / g
        out[1] = eps * (b * x - fv - I) / (g * g)
        return g
    v = y[0]
    g = f_val(fam, a, v) - y[1] + I
    out[0] = g
    out[1] = eps * (b * v - y[1])
    out[2] = f_d1(fam, a, v) * y[2] - y[3]
    out[3] = eps * (b * y[2] - y[3])
    return g


@njit(cache=True)
def _step(kind, fam, a, b, I, eps, x, y, h, K, ynew, rtol, atol):
    """One Dormand-Prince attempt.  K[0] must hold f(x, y) on entry.

    Returns (error norm, min denominator seen over the stages).
    """
    n = y.shape[0]
    tmp = np.empty(n)
    gmin = np.inf
    for s in range(1, 6):
        for i in range(n):
            acc = 0.0
            for j in range(s):
                acc += _A[s, j] * K[j, i]
            tmp[i] = y[i] + h * acc
        g = _rhs(kind, fam, a, b, I, eps, x + _C[s] * h, tmp, K[s])
        if kind == 0 and g < gmin:
            gmin = g
    for i in range(n):
        acc = 0.0
        for j in range(6):
            acc += _B[j] * K[j, i]
        ynew[i] = y[i] + h * acc
    g = _rhs(kind, fam, a, b, I, eps, x + h, ynew, K[6])
    if kind == 0 and g < gmin:
        gmin = g
    if kind == 1:
        gmin = 1.0
    # error norm; variational components are controlled relatively
    dscale = 0.0
    if kind == 1:
        dscale = rtol * max(abs(y[2]) + abs(y[3]), abs(ynew[2]) + abs(ynew[3])) + 1e-300
    acc2 = 0.0
    for i in range(n):
        e = 0.0
        for j in range(7):
            e += _E[j] * K[j, i]
        e *= h
        if kind == 1 and i >= 2:
            sc = dscale
        else:
            sc = atol + rtol * max(abs(y[i]), abs(ynew[i]))
        r = e / sc
        acc2 += r * r
    err = np.sqrt(acc2 / n)
    if not np.isfinite(err):
        err = np.inf
    return err, gmin


@njit(cache=True)
def _dense(y, K, h, theta, out):
    n = y.shape[0]
    t1 = theta
    t2 = theta * theta
    t3 = t2 * theta
    t4 = t3 * theta
    for i in range(n):
        acc = 0.0
        for j in range(7):
            q = _P[j, 0] * t1 + _P[j, 1] * t2 + _P[j, 2] * t3 + _P[j, 3] * t4
            acc += K[j, i] * q
        out[i] = y[i] + h * acc


@njit(cache=True)
def _new_h(h, err):
    if err == 0.0:
        fac = 5.0
    else:
        fac = 0.9 * err ** (-0.2)
        fac = min(5.0, max(0.2, fac))
    return h * fac


@njit(cache=True)
def _tail(fam, a, b, I, eps, V, W):
    """Frozen-W quadrature of the v -> infinity remainder beyond V.

    Substitutes u = V / s, s in (0, 1].  Returns (tail_W, tail_logderiv,
    error bound on tail_W).
    """
    qlo = 0.0
    qhi = 0.0
    lhi = 0.0
    khi = 0.0
    for pass_ in range(2):
        if pass_ == 0:
            xs = _GL_LO_X
            ws = _GL_LO_W
        else:
            xs = _GL_HI_X
            ws = _GL_HI_W
        for k in range(xs.shape[0]):
            s = 0.5 * (xs[k] + 1.0)
            wt = 0.5 * ws[k] * V / (s * s)
            u = V / s
            fu = f_val(fam, a, u)
            if not np.isfinite(fu) or fu > 1e290:
                continue
            g = fu - W + I
            fw = eps * (b * u - W) / g
            fl = eps * (b * u - fu - I) / (g * g)
            if pass_ == 0:
                qlo += wt * fw
            else:
                qhi += wt * fw
                lhi += wt * fl
                khi += wt * abs(fl)
    bound = abs(qhi - qlo) + abs(qhi) * khi + 1e-16 * abs(W)
    return qhi, lhi, bound


@njit(cache=True)
def rise(fam, a, b, I, eps, v0, W0, tol, max_steps):
    """Integrate the rising branch from (v0, W0) to v = infinity.

    Returns (W_inf, log derivative, n_steps, tail_bound, V_max, status).
    """
    y = np.empty(2)
    y[0] = W0
    y[1] = 0.0
    ynew = np.empty(2)
    K = np.empty((7, 2))
    x = v0
    g = _rhs(0, fam, a, b, I, eps, x, y, K[0])
    if not g > 0.0:
        return np.nan, np.nan, 0, np.inf, x, ERR_DENOMINATOR
    rtol = tol * 0.1
    atol = tol * 0.1
    V = max(v0 + 10.0, 20.0)
    # initial step from the local scale of the denominator
    h = min(0.05, 0.1 * g / (abs(f_d1(fam, a, x)) + 1.0))
    nsteps = 0
    while True:
        while x < V:
            if nsteps >= max_steps:
                return y[0], y[1], nsteps, np.inf, x, ERR_BUDGET
            hh = min(h, V - x)
            err, gmin = _step(0, fam, a, b, I, eps, x, y, hh, K, ynew, rtol, atol)
            nsteps += 1
            if gmin <= 0.0 or not np.isfinite(err):
                h = 0.25 * hh
                if h < 1e-14:
                    return y[0], y[1], nsteps, np.inf, x, ERR_DENOMINATOR
                continue
            if err <= 1.0:
                x += hh
                y[0] = ynew[0]
                y[1] = ynew[1]
                K[0, 0] = K[6, 0]
                K[0, 1] = K[6, 1]
                h = _new_h(hh, err)
            else:
                h = _new_h(hh, err)
        tw, tl, bound = _tail(fam, a, b, I, eps, V, y[0])
        if bound <= tol:
            return y[0] + tw, y[1] + tl, nsteps, bound, V, OK
        if V > 1e7:
            return y[0] + tw, y[1] + tl, nsteps, bound, V, ERR_TAIL
        V *= 2.0


@njit(cache=True)
def time_leg(fam, a, b, I, eps, vr, w0, tol, max_steps, gswitch, record):
    """Time-domain flight from (vr, w0) until dv/dt >= gswitch with v >= vr.

    Records the upward crossing of v = vr (bisection on the dense output).
    ``record`` is an (m, 3) array of (t, v, w) rows filled with accepted steps
    when m > 0.  Returns (v, w, sensitivity of w on the section v=const,
    crossing_w, n_steps, n_recorded, status).
    """
    y = np.empty(4)
    y[0] = vr
    y[1] = w0
    y[2] = 0.0
    y[3] = 1.0
    ynew = np.empty(4)
    ytmp = np.empty(4)
    K = np.empty((7, 4))
    t = 0.0
    _rhs(1, fam, a, b, I, eps, t, y, K[0])
    rtol = tol * 0.1
    atol = tol * 0.1
    loop = K[0, 0] < 0.0
    h = 1e-3
    if loop:
        # resolve the initial dip below the reset line
        acc = f_d1(fam, a, vr) * K[0, 0] - K[0, 1]
        if acc > 0.0:
            h = max(1e-12, min(h, -0.1 * K[0, 0] / acc))
    nsteps = 0
    crossing = np.nan
    turned = not loop
    nrec = 0
    m = record.shape[0]
    if m > 0:
        record[0, 0] = t
        record[0, 1] = y[0]
        record[0, 2] = y[1]
        nrec = 1
    while True:
        vdot = K[0, 0]
        if turned and vdot >= gswitch and y[0] >= vr:
            break
        if nsteps >= max_steps:
            return y[0], y[1], np.nan, crossing, nsteps, nrec, ERR_BUDGET
        err, _ = _step(1, fam, a, b, I, eps, t, y, h, K, ynew, rtol, atol)
        nsteps += 1
        if err > 1.0:
            h = _new_h(h, err)
            if h < 1e-15:
                return y[0], y[1], np.nan, crossing, nsteps, nrec, ERR_NONFINITE
            continue
        if loop and np.isnan(crossing) and y[0] < vr and ynew[0] >= vr:
            lo = 0.0
            hi = 1.0
            for _ in range(60):
                mid = 0.5 * (lo + hi)
                _dense(y, K, h, mid, ytmp)
                if ytmp[0] < vr:
                    lo = mid
                else:
                    hi = mid
                if (hi - lo) * h < 1e-13:
                    break
            _dense(y, K, h, hi, ytmp)
            crossing = ytmp[1]
        t += h
        for i in range(4):
            y[i] = ynew[i]
            K[0, i] = K[6, i]
        if not turned and K[0, 0] >= 0.0:
            turned = True
        if loop and turned and np.isnan(crossing) and y[0] >= vr:
            # dip below v = vr too shallow to resolve in floating point
            crossing = y[1]
        if nrec < m:
            record[nrec, 0] = t
            record[nrec, 1] = y[0]
            record[nrec, 2] = y[1]
            nrec += 1
        h = _new_h(h, err)
    vdot = K[0, 0]
    wdot = K[0, 1]
    sens = y[3] - wdot / vdot * y[2]
    return y[0], y[1], sens, crossing, nsteps, nrec, OK


@njit(cache=True)
def flight(fam, a, b, I, eps, vr, w0, tol, max_steps, record):
    """Full flight from the reset line to the spike.

    Returns (w_at_spike, derivative, crossing_w, n_steps, tail_bound,
    loop flag, n_recorded, status).
    """
    wstar = f_val(fam, a, vr) + I
    g0 = wstar - w0
    loop = w0 > wstar
    if not np.isfinite(w0):
        return np.nan, np.nan, np.nan, 0, np.inf, loop, 0, ERR_NONFINITE
    if g0 >= G_SWITCH:
        wi, li, n, bound, _, st = rise(fam, a, b, I, eps, vr, w0, tol, max_steps)
        return wi, np.exp(li), np.nan, n, bound, loop, 0, st
    v1, w1, sens, cross, n1, nrec, st = time_leg(
        fam, a, b, I, eps, vr, w0, tol, max_steps, G_SWITCH, record
    )
    if st != OK:
        return np.nan, np.nan, cross, n1, np.inf, loop, nrec, st
    wi, li, n2, bound, _, st = rise(fam, a, b, I, eps, v1, w1, tol, max_steps)
    return wi, sens * np.exp(li), cross, n1 + n2, bound, loop, nrec, st


@njit(cache=True)
def phi_value(fam, a, b, I, d, eps, vr, w, tol, max_steps):
    """(Phi(w), Phi'(w), status)."""
    wi, der, _, _, _, _, _, st = flight(
        fam, a, b, I, eps, vr, w, tol, max_steps, np.empty((0, 3))
    )
    return wi + d, der, st


@njit(cache=True)
def phi_grid(fam, a, b, I, d, eps, vr, ws, tol, max_steps, out_phi, out_dphi):
    worst = OK
    for i in range(ws.shape[0]):
        p, dp, st = phi_value(fam, a, b, I, d, eps, vr, ws[i], tol, max_steps)
        out_phi[i] = p
        out_dphi[i] = dp
        if st != OK:
            worst = st
    return worst


@njit(cache=True)
def iterate(fam, a, b, I, d, eps, vr, w0, n, tol, max_steps, out_w, out_dphi):
    """Fill out_w[k] = Phi^(k+1)(w0) and out_dphi[k] = Phi'(Phi^k(w0))."""
    w = w0
    for k in range(n):
        p, dp, st = phi_value(fam, a, b, I, d, eps, vr, w, tol, max_steps)
        if st != OK:
            return k, st
        out_dphi[k] = dp
        out_w[k] = p
        w = p
    return n, OK


@njit(cache=True)
def iterate_discard(fam, a, b, I, d, eps, vr, w0, n, tol, max_steps):
    """Phi^n(w0) without storing the path."""
    w = w0
    for k in range(n):
        p, dp, st = phi_value(fam, a, b, I, d, eps, vr, w, tol, max_steps)
        if st != OK:
            return w, k, st
        w = p
    return w, n, OK
