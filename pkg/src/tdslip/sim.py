"""Hybrid trajectory simulation.

Integrates the hopper through alternating stance and flight phases,
starting in stance, switching phases at localized liftoff/touchdown
events, and recording a dense, time-stamped trajectory per phase. A
cycle is one stance plus the following flight, closed by the next
touchdown.

Bad designs must not crash an optimization run, so simulation never
raises for physics reasons: every run ends with a termination tag
(``max_cycles_reached``, ``fell``, ``invalid_touchdown``, ``time_limit``
or ``numerical_failure``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .dynamics import (
    FlightState,
    InvalidTouchdown,
    StanceState,
    liftoff_transform,
    pack_params,
    touchdown_transform,
)
from .integrator import (
    PHASE_FLIGHT,
    PHASE_STANCE,
    STATUS_EVENT,
    STATUS_FELL,
    STATUS_MAX_STEPS,
    STATUS_STEP_UNDERFLOW,
    STATUS_T_END,
    integrate_phase,
)
from .model import DesignVector, SystemParams

__all__ = ["SimConfig", "EventRecord", "PhaseSegment", "Trajectory", "simulate", "resample"]

# A stance that lasts twice the maximum allowed stride period is stuck;
# cut it off so infeasible designs stay cheap to evaluate.
STANCE_TIME_LIMIT = 4.0

STANCE = "stance"
FLIGHT = "flight"


@dataclass(frozen=True)
class SimConfig:
    rel_tol: float = 1e-6
    abs_tol: float = 1e-9
    max_cycles: int = 25
    t_max: float = 20.0
    event_tol: float = 1e-10  # event localization window [s]
    h_max: float = 5e-4  # step cap; keeps the recorded trajectory dense
    max_steps_per_phase: int = 500_000


@dataclass(frozen=True)
class EventRecord:
    time: float
    kind: str  # start | liftoff | touchdown | <termination tag>


@dataclass
class PhaseSegment:
    """One contiguous stance or flight arc.

    ``states`` rows follow the phase layout: stance
    ``[theta, theta_dot, zeta, zeta_dot, i_a]`` (with the constant
    ``foot_x`` alongside), flight
    ``[x, y, x_dot, y_dot, theta_leg, omega, i_a]``. ``derivs`` holds the
    state derivative at each sample for dense interpolation, and ``V``
    the applied voltage.
    """

    kind: str
    t: np.ndarray
    states: np.ndarray
    derivs: np.ndarray
    V: np.ndarray
    start_event: EventRecord
    end_event: EventRecord | None = None
    foot_x: float | None = None

    @property
    def duration(self) -> float:
        return float(self.t[-1] - self.t[0])

    def xy_view(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """Cartesian body position and velocity at the samples."""
        if self.kind == FLIGHT:
            s = self.states
            return s[:, 0].copy(), s[:, 1].copy(), s[:, 2].copy(), s[:, 3].copy()
        th = self.states[:, 0]
        thd = self.states[:, 1]
        ze = self.states[:, 2]
        zed = self.states[:, 3]
        x = self.foot_x - ze * np.cos(th)
        y = ze * np.sin(th)
        x_dot = -zed * np.cos(th) + ze * thd * np.sin(th)
        y_dot = zed * np.sin(th) + ze * thd * np.cos(th)
        return x, y, x_dot, y_dot


@dataclass
class Trajectory:
    segments: list[PhaseSegment]
    termination: str
    n_cycles: int

    @property
    def t_start(self) -> float:
        return float(self.segments[0].t[0]) if self.segments else 0.0

    @property
    def t_end(self) -> float:
        return float(self.segments[-1].t[-1]) if self.segments else 0.0

    def stance_segments(self) -> list[PhaseSegment]:
        return [s for s in self.segments if s.kind == STANCE]

    def flight_segments(self) -> list[PhaseSegment]:
        return [s for s in self.segments if s.kind == FLIGHT]


def _control_coeffs(design: DesignVector, params: SystemParams) -> np.ndarray:
    cc = np.empty(8)
    cc[:6] = design.a
    cc[6] = design.T_FC
    cc[7] = params.motor.V_max
    return cc


def _micro_step(phase: int, y: np.ndarray, t: float, t_phase_start: float,
                pp: np.ndarray, cc: np.ndarray, h: float = 1e-9) -> np.ndarray:
    """One classical RK4 step to move strictly past an ignored event."""
    from .integrator import _rhs, _voltage

    k1 = np.empty(7)
    k2 = np.empty(7)
    k3 = np.empty(7)
    k4 = np.empty(7)
    v = _voltage(phase, t - t_phase_start, cc)
    _rhs(phase, y, pp, v, k1)
    _rhs(phase, y + 0.5 * h * k1, pp, _voltage(phase, t + 0.5 * h - t_phase_start, cc), k2)
    _rhs(phase, y + 0.5 * h * k2, pp, _voltage(phase, t + 0.5 * h - t_phase_start, cc), k3)
    _rhs(phase, y + h * k3, pp, _voltage(phase, t + h - t_phase_start, cc), k4)
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def simulate(params: SystemParams, design: DesignVector, theta_TD1: float,
             config: SimConfig = SimConfig()) -> Trajectory:
    """Run the hybrid hopper from its first touchdown.

    The initial stance state is ``theta = theta_TD1`` with the design's
    initial rates, an uncompressed leg, zero motor current, and the foot
    anchored at the origin.
    """
    pp = pack_params(params)
    cc = _control_coeffs(design, params)

    y = np.zeros(7)
    y[0] = theta_TD1
    y[1] = params.theta_dot_0
    y[2] = params.l_0
    y[3] = params.zeta_dot_0

    try:
        return _run(params, pp, cc, y, config)
    except InvalidTouchdown:
        raise  # handled inside _run; defensive
    except Exception:
        return Trajectory(segments=[], termination="numerical_failure", n_cycles=0)


def _run(params: SystemParams, pp: np.ndarray, cc: np.ndarray, y0: np.ndarray,
         config: SimConfig) -> Trajectory:
    segments: list[PhaseSegment] = []
    n_cycles = 0
    termination = None

    phase = PHASE_STANCE
    y = y0
    t = 0.0
    t_phase_start = 0.0
    foot_x = 0.0
    start_event = EventRecord(0.0, "start")

    seg_t: list[np.ndarray] = []
    seg_y: list[np.ndarray] = []
    seg_f: list[np.ndarray] = []
    seg_v: list[np.ndarray] = []
    resuming = False

    micro_events = 0
    max_segments = 4 * config.max_cycles + 64

    def close_segment(end: EventRecord) -> None:
        t_all = np.concatenate(seg_t)
        y_all = np.vstack(seg_y)
        f_all = np.vstack(seg_f)
        v_all = np.concatenate(seg_v)
        width = 5 if phase == PHASE_STANCE else 7
        segments.append(PhaseSegment(
            kind=STANCE if phase == PHASE_STANCE else FLIGHT,
            t=t_all,
            states=y_all[:, :width],
            derivs=f_all[:, :width],
            V=v_all,
            start_event=start_event,
            end_event=end,
            foot_x=foot_x if phase == PHASE_STANCE else None,
        ))
        seg_t.clear()
        seg_y.clear()
        seg_f.clear()
        seg_v.clear()

    while termination is None:
        if len(segments) >= max_segments or micro_events > 40:
            termination = "numerical_failure"
            break
        if phase == PHASE_STANCE:
            t_budget = min(t_phase_start + STANCE_TIME_LIMIT, config.t_max)
        else:
            t_budget = config.t_max

        status, n, tr, yr, fr, vr, t_f = integrate_phase(
            phase, y, t, t_budget, t_phase_start, pp, cc,
            config.rel_tol, config.abs_tol, config.event_tol,
            config.h_max, config.max_steps_per_phase,
        )
        first = 1 if resuming else 0  # drop the duplicated resume node
        seg_t.append(tr[first:n].copy())
        seg_y.append(yr[first:n].copy())
        seg_f.append(fr[first:n].copy())
        seg_v.append(vr[first:n].copy())
        resuming = False
        y_end = yr[n - 1].copy()
        v_end = float(vr[n - 1])

        if status in (STATUS_STEP_UNDERFLOW, STATUS_MAX_STEPS):
            termination = "numerical_failure"
        elif status == STATUS_FELL:
            termination = "fell"
        elif status == STATUS_T_END:
            termination = "time_limit"
        elif status == STATUS_EVENT and phase == PHASE_STANCE:
            # The ground contact is unilateral: once the leg regains its
            # natural length while extending, the spring cannot pull, so
            # stance always ends here.
            state = StanceState.from_array(y_end, foot_x)
            close_segment(EventRecord(t_f, "liftoff"))
            fs = liftoff_transform(state, params)
            phase = PHASE_FLIGHT
            y = fs.as_array()
            t = t_f
            t_phase_start = t_f
            start_event = EventRecord(t_f, "liftoff")
            micro_events = 0
        elif status == STATUS_EVENT and phase == PHASE_FLIGHT:
            state = FlightState.from_array(y_end)
            if state.y_dot < 0.0:
                n_cycles += 1
                close_segment(EventRecord(t_f, "touchdown"))
                if n_cycles >= config.max_cycles:
                    termination = "max_cycles_reached"
                    break
                try:
                    ss = touchdown_transform(state, params)
                except InvalidTouchdown:
                    termination = "invalid_touchdown"
                    break
                phase = PHASE_STANCE
                foot_x = ss.foot_x
                y = np.zeros(7)
                y[:5] = ss.as_array()
                t = t_f
                t_phase_start = t_f
                start_event = EventRecord(t_f, "touchdown")
                micro_events = 0
            else:
                y = _micro_step(phase, y_end, t_f, t_phase_start, pp, cc)
                t = t_f + 1e-9
                resuming = True
                micro_events += 1
        else:
            termination = "numerical_failure"

    if seg_t:
        close_segment(EventRecord(float(seg_t[-1][-1]) if len(seg_t[-1]) else t, termination))
    return Trajectory(segments=segments, termination=termination, n_cycles=n_cycles)


def _hermite_interp(t_nodes: np.ndarray, y_nodes: np.ndarray, f_nodes: np.ndarray,
                    q: np.ndarray) -> np.ndarray:
    """Vectorized cubic Hermite interpolation on recorded samples."""
    idx = np.clip(np.searchsorted(t_nodes, q, side="right") - 1, 0, len(t_nodes) - 2)
    t0 = t_nodes[idx]
    h = t_nodes[idx + 1] - t0
    s = np.where(h > 0, (q - t0) / np.where(h > 0, h, 1.0), 0.0)
    s2 = s * s
    s3 = s2 * s
    b00 = 2 * s3 - 3 * s2 + 1
    b10 = s3 - 2 * s2 + s
    b01 = -2 * s3 + 3 * s2
    b11 = s3 - s2
    y0 = y_nodes[idx]
    y1 = y_nodes[idx + 1]
    f0 = f_nodes[idx]
    f1 = f_nodes[idx + 1]
    hcol = h[:, None]
    return (b00[:, None] * y0 + b10[:, None] * hcol * f0
            + b01[:, None] * y1 + b11[:, None] * hcol * f1)


def resample_segment(seg: PhaseSegment, times: np.ndarray) -> PhaseSegment:
    """Interpolate one segment onto the given times (kept within range)."""
    q = np.asarray(times, dtype=float)
    states = _hermite_interp(seg.t, seg.states, seg.derivs, q)
    derivs = _hermite_interp(seg.t, seg.derivs, np.zeros_like(seg.derivs), q)
    V = np.interp(q, seg.t, seg.V)
    return PhaseSegment(kind=seg.kind, t=q, states=states, derivs=derivs, V=V,
                        start_event=seg.start_event, end_event=seg.end_event,
                        foot_x=seg.foot_x)


def resample(traj: Trajectory, dt: float) -> Trajectory:
    """Resample a trajectory onto a uniform grid.

    Grid points are ``t_start + k*dt``; every segment keeps its exact
    boundary samples, so phase boundaries appear as duplicated times
    (one sample per adjacent segment).
    """
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    if not traj.segments or any(len(s.t) < 2 for s in traj.segments):
        raise ValueError("cannot resample an empty trajectory")

    t0 = traj.t_start
    new_segments = []
    for seg in traj.segments:
        a, b = float(seg.t[0]), float(seg.t[-1])
        k0 = math.ceil((a - t0) / dt - 1e-12)
        ticks = t0 + dt * np.arange(k0, math.floor((b - t0) / dt + 1e-12) + 1)
        ticks = ticks[(ticks > a) & (ticks < b)]
        q = np.concatenate(([a], ticks, [b]))
        new_segments.append(resample_segment(seg, q))
    return Trajectory(segments=new_segments, termination=traj.termination,
                      n_cycles=traj.n_cycles)
