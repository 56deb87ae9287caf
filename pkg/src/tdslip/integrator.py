"""Adaptive explicit Runge-Kutta integration of one hybrid phase.

This is an embedded Dormand-Prince 4(5) pair with proportional-integral
step-size control, compiled with numba. The motor's electrical pole
(L_a/R_a, tens of microseconds) makes the system mildly stiff for an
explicit method, so steps are small and plentiful; the compiled kernel
keeps a full candidate evaluation in the tens of milliseconds.

One call integrates a single phase (stance or flight) until the first of:
the phase-transition event, the body hitting the ground, the requested
end time, or a failure. Events are detected by direction-filtered sign
changes of the event functions over each accepted step and localized by
bisection on a cubic Hermite interpolant of the step, to a time window
below ``event_tol``. Every accepted step is recorded (time, state,
derivative, applied voltage) so trajectories can be resampled later.

In flight the applied voltage is constant within a step: steps are
clamped so they never straddle the bang-off switch, and the cached
first-same-as-last derivative is refreshed on the far side of the
switch.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

from .dynamics import flight_rhs_arr, stance_rhs_arr

__all__ = [
    "integrate_phase",
    "STATUS_T_END",
    "STATUS_EVENT",
    "STATUS_FELL",
    "STATUS_STEP_UNDERFLOW",
    "STATUS_MAX_STEPS",
]

STATUS_T_END = 0  # reached the requested end time
STATUS_EVENT = 1  # phase-transition event located
STATUS_FELL = 2  # body height crossed zero
STATUS_STEP_UNDERFLOW = 3  # step size collapsed (non-finite dynamics)
STATUS_MAX_STEPS = 4  # step budget exhausted

PHASE_STANCE = 0
PHASE_FLIGHT = 1

# Dormand-Prince 5(4) tableau.
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = np.zeros((7, 7))
_A[1, 0] = 1 / 5
_A[2, :2] = (3 / 40, 9 / 40)
_A[3, :3] = (44 / 45, -56 / 15, 32 / 9)
_A[4, :4] = (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729)
_A[5, :5] = (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656)
_A[6, :6] = (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84)
# y_new uses row 6 of _A (the propagating 5th-order weights); the error
# estimate is the difference between the 5th- and 4th-order solutions.
_E = np.array([71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40])

_NDIM = 7
_SAFETY = 0.9
_MIN_FACTOR = 0.2
_MAX_FACTOR = 5.0
# PI controller exponents for a 5th-order propagating solution.
_BETA1 = 0.7 / 5.0
_BETA2 = 0.4 / 5.0


@njit(cache=True)
def _voltage(phase, tau, cc):
    """Applied voltage at time ``tau`` since the phase started.

    cc = [a0..a5, T_FC, V_max]. Stance evaluates the clamped polynomial;
    flight is V_max strictly before T_FC and 0 after.
    """
    if phase == PHASE_STANCE:
        v = cc[0] + tau * (cc[1] + tau * (cc[2] + tau * (cc[3] + tau * (cc[4] + tau * cc[5]))))
        if v > cc[7]:
            return cc[7]
        if v < -cc[7]:
            return -cc[7]
        return v
    if tau < cc[6]:
        return cc[7]
    return 0.0


@njit(cache=True)
def _rhs(phase, y, pp, V, out):
    if phase == PHASE_STANCE:
        stance_rhs_arr(y, pp, V, out)
        out[5] = 0.0
        out[6] = 0.0
    else:
        flight_rhs_arr(y, pp, V, out)


@njit(cache=True)
def _event_value(ev, phase, y, pp):
    """ev 0: phase transition indicator; ev 1: body height."""
    if phase == PHASE_STANCE:
        if ev == 0:
            return y[2] - pp[2]  # zeta - l_0
        return y[2] * math.sin(y[0])  # body height
    if ev == 0:
        return y[1] - pp[2] * math.sin(y[4])  # foot height
    return y[1]  # body height


@njit(cache=True)
def _hermite(y0, f0, y1, f1, h, s, out):
    """Cubic Hermite interpolant of a step at fraction s in [0, 1]."""
    s2 = s * s
    s3 = s2 * s
    b00 = 2.0 * s3 - 3.0 * s2 + 1.0
    b10 = s3 - 2.0 * s2 + s
    b01 = -2.0 * s3 + 3.0 * s2
    b11 = s3 - s2
    for i in range(_NDIM):
        out[i] = b00 * y0[i] + b10 * h * f0[i] + b01 * y1[i] + b11 * h * f1[i]


@njit(cache=True)
def _locate(ev, phase, y0, f0, y1, f1, h, g0, pp, event_tol, work):
    """Bisect the Hermite interpolant for the event's crossing fraction.

    Returns the bracket edge on the crossed side, so the located state
    satisfies the post-event sign (or is exactly on the boundary).
    """
    lo = 0.0
    hi = 1.0
    pos0 = g0 > 0.0
    for _ in range(64):
        if (hi - lo) * h <= event_tol:
            break
        mid = 0.5 * (lo + hi)
        _hermite(y0, f0, y1, f1, h, mid, work)
        gm = _event_value(ev, phase, work, pp)
        if gm != 0.0 and (gm > 0.0) == pos0:
            lo = mid
        else:
            hi = mid
    return hi


@njit(cache=True)
def integrate_phase(phase, y_init, t0, t_end, t_phase_start, pp, cc,
                    rtol, atol, event_tol, h_max, max_steps):
    """Integrate one phase from t0 until an event, t_end, or failure.

    Returns ``(status, n, t_rec, y_rec, f_rec, v_rec, t_final)`` where
    the record arrays are filled up to ``n`` rows (first row is the
    initial state; on an event the last row is the localized event
    state).
    """
    cap = max_steps + 6
    t_rec = np.empty(cap)
    y_rec = np.empty((cap, _NDIM))
    f_rec = np.empty((cap, _NDIM))
    v_rec = np.empty(cap)

    y = y_init.copy()
    K = np.zeros((7, _NDIM))
    y_stage = np.empty(_NDIM)
    y_new = np.empty(_NDIM)
    work = np.empty(_NDIM)

    t = t0
    V0 = _voltage(phase, t - t_phase_start, cc)
    _rhs(phase, y, pp, V0, K[0])

    t_rec[0] = t
    for i in range(_NDIM):
        y_rec[0, i] = y[i]
        f_rec[0, i] = K[0, i]
    v_rec[0] = V0
    n = 1

    g_prim = _event_value(0, phase, y, pp)
    g_fall = _event_value(1, phase, y, pp)

    t_switch = t_phase_start + cc[6]
    has_switch = phase == PHASE_FLIGHT and cc[6] > 0.0

    h = min(1e-6, t_end - t0)
    if h <= 0.0:
        return STATUS_T_END, n, t_rec, y_rec, f_rec, v_rec, t
    err_prev = 1e-4
    rejected = False
    status = STATUS_MAX_STEPS

    steps = 0
    while steps < max_steps:
        steps += 1
        if h > h_max:
            h = h_max
        hit_end = False
        if t + h >= t_end:
            h = t_end - t
            hit_end = True
        hit_switch = False
        if has_switch and t < t_switch - 1e-15 and t + h > t_switch:
            h = t_switch - t
            hit_end = False
            hit_switch = True
        if h < 1e-14 * max(1.0, abs(t)):
            status = STATUS_STEP_UNDERFLOW
            break

        # Flight voltage is constant over a non-straddling step; stance
        # re-evaluates the polynomial at each stage time.
        if phase == PHASE_FLIGHT:
            V_step = _voltage(phase, t - t_phase_start, cc)

        # RK stages (stage 0 derivative is cached: first-same-as-last).
        for s in range(1, 7):
            for i in range(_NDIM):
                acc = 0.0
                for j in range(s):
                    acc += _A[s, j] * K[j, i]
                y_stage[i] = y[i] + h * acc
            if phase == PHASE_FLIGHT:
                Vs = V_step
            else:
                Vs = _voltage(phase, t + _C[s] * h - t_phase_start, cc)
            _rhs(phase, y_stage, pp, Vs, K[s])
        for i in range(_NDIM):
            y_new[i] = y_stage[i]  # stage 6 state is the 5th-order solution

        # scaled RMS error norm
        err = 0.0
        finite = True
        for i in range(_NDIM):
            e = 0.0
            for j in range(7):
                e += _E[j] * K[j, i]
            e *= h
            sc = atol + rtol * max(abs(y[i]), abs(y_new[i]))
            err += (e / sc) * (e / sc)
            if not math.isfinite(y_new[i]):
                finite = False
        err = math.sqrt(err / _NDIM)

        if not finite or not math.isfinite(err):
            h *= 0.2
            rejected = True
            continue
        if err > 1.0:
            fac = _SAFETY * err ** (-0.2)
            if fac < _MIN_FACTOR:
                fac = _MIN_FACTOR
            h *= fac
            rejected = True
            continue

        # accepted step
        t_new = t_end if hit_end else (t_switch if hit_switch else t + h)

        # event detection with strict pre-step sign (no retrigger at a
        # node sitting exactly on the zero)
        g_prim_new = _event_value(0, phase, y_new, pp)
        g_fall_new = _event_value(1, phase, y_new, pp)
        prim_hit = False
        fall_hit = False
        if phase == PHASE_STANCE:
            prim_hit = g_prim < 0.0 and g_prim_new >= 0.0  # extending through l_0
        else:
            prim_hit = g_prim > 0.0 and g_prim_new <= 0.0  # foot descending to ground
        fall_hit = g_fall > 0.0 and g_fall_new <= 0.0

        if prim_hit or fall_hit:
            s_prim = 2.0
            s_fall = 2.0
            if prim_hit:
                s_prim = _locate(0, phase, y, K[0], y_new, K[6], h, g_prim, pp, event_tol, work)
            if fall_hit:
                s_fall = _locate(1, phase, y, K[0], y_new, K[6], h, g_fall, pp, event_tol, work)
            if s_prim <= s_fall:
                s_ev = s_prim
                ev_status = STATUS_EVENT
            else:
                s_ev = s_fall
                ev_status = STATUS_FELL
            t_ev = t + s_ev * h
            _hermite(y, K[0], y_new, K[6], h, s_ev, work)
            if phase == PHASE_FLIGHT:
                V_ev = V_step
            else:
                V_ev = _voltage(phase, t_ev - t_phase_start, cc)
            _rhs(phase, work, pp, V_ev, y_stage)  # y_stage reused as f at event
            t_rec[n] = t_ev
            for i in range(_NDIM):
                y_rec[n, i] = work[i]
                f_rec[n, i] = y_stage[i]
            v_rec[n] = V_ev
            n += 1
            return ev_status, n, t_rec, y_rec, f_rec, v_rec, t_ev

        # record the accepted node
        if phase == PHASE_FLIGHT:
            v_node = V_step
        else:
            v_node = _voltage(phase, t_new - t_phase_start, cc)
        t_rec[n] = t_new
        for i in range(_NDIM):
            y_rec[n, i] = y_new[i]
            f_rec[n, i] = K[6, i]
        v_rec[n] = v_node
        n += 1

        if hit_switch:
            # duplicate the node on the far side of the bang-off switch
            # (one ulp later, keeping time strictly increasing): voltage
            # and current derivative change discontinuously there
            V_right = 0.0
            _rhs(phase, y_new, pp, V_right, K[6])
            t_rec[n] = np.nextafter(t_new, np.inf)
            for i in range(_NDIM):
                y_rec[n, i] = y_new[i]
                f_rec[n, i] = K[6, i]
            v_rec[n] = V_right
            n += 1

        # roll the step
        for i in range(_NDIM):
            y[i] = y_new[i]
            K[0, i] = K[6, i]
        t = t_new
        g_prim = g_prim_new
        g_fall = g_fall_new

        if hit_end:
            status = STATUS_T_END
            break

        # PI step-size update
        if err == 0.0:
            fac = _MAX_FACTOR
        else:
            fac = _SAFETY * err ** (-_BETA1) * err_prev ** _BETA2
            if fac > _MAX_FACTOR:
                fac = _MAX_FACTOR
            if fac < _MIN_FACTOR:
                fac = _MIN_FACTOR
        if rejected and fac > 1.0:
            fac = 1.0
        rejected = False
        err_prev = max(err, 1e-4)
        h *= fac

        if n >= cap - 3:
            status = STATUS_MAX_STEPS
            break

    return status, n, t_rec, y_rec, f_rec, v_rec, t
