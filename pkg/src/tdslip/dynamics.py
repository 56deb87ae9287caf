"""Hybrid hopper dynamics: stance and flight right-hand sides, phase
transition events, and the coordinate transforms between them.

Stance uses polar leg coordinates (theta, zeta) anchored at the planted
foot; flight uses Cartesian center-of-mass coordinates plus the freely
rotating leg. theta is measured counterclockwise from the ground plane,
with the body at ``(foot_x - zeta*cos(theta), zeta*sin(theta))``: at
touchdown the foot is ahead of the body (theta < pi/2), forward travel
drives theta up through pi/2, and positive hip torque is propulsive in
+x. The leg angle accumulates without wrapping in flight so the total
flight rotation can be read off directly.

The geared DC motor is modeled to second order (terminal inductance and
shaft inertia). During stance the shaft is kinematically locked to the
leg (omega = R * theta_dot); in flight the motor spins the unloaded leg.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .model import SystemParams

__all__ = [
    "StanceState",
    "FlightState",
    "StanceDerivative",
    "FlightDerivative",
    "IntegrationAbort",
    "InvalidTouchdown",
    "stance_rhs",
    "flight_rhs",
    "liftoff_event",
    "touchdown_event",
    "stance_height",
    "stance_y_accel",
    "liftoff_guard",
    "liftoff_transform",
    "touchdown_transform",
    "pack_params",
]

# Layout of the packed parameter vector used by the compiled kernels.
PP_M, PP_K0, PP_L0, PP_BL, PP_G, PP_R, PP_J, PP_KT, PP_KB, PP_RA, PP_LA, PP_C = range(12)

# State layouts. Stance uses the first 5 slots of a 7-vector so both
# phases share one array shape inside the integrator.
STANCE_DIM = 5  # [theta, theta_dot, zeta, zeta_dot, i_a]
FLIGHT_DIM = 7  # [x, y, x_dot, y_dot, theta_leg, omega, i_a]


class IntegrationAbort(RuntimeError):
    """Dynamics produced a non-finite derivative; carries the state."""

    def __init__(self, message: str, state=None):
        super().__init__(message)
        self.state = state


class InvalidTouchdown(RuntimeError):
    """Touchdown occurred with the leg not pointing below the body."""


@dataclass(frozen=True)
class StanceState:
    theta: float  # leg angle from ground [rad]
    theta_dot: float  # [rad/s]
    zeta: float  # leg length [m]
    zeta_dot: float  # [m/s]
    i_a: float  # motor current [A]
    foot_x: float = 0.0  # stance foot anchor [m], constant within a stance

    def as_array(self) -> np.ndarray:
        return np.array([self.theta, self.theta_dot, self.zeta, self.zeta_dot, self.i_a])

    @classmethod
    def from_array(cls, y, foot_x: float = 0.0) -> "StanceState":
        return cls(float(y[0]), float(y[1]), float(y[2]), float(y[3]), float(y[4]), foot_x)

    @property
    def x(self) -> float:
        return self.foot_x - self.zeta * math.cos(self.theta)

    @property
    def y(self) -> float:
        return self.zeta * math.sin(self.theta)

    @property
    def x_dot(self) -> float:
        return -self.zeta_dot * math.cos(self.theta) + self.zeta * self.theta_dot * math.sin(self.theta)

    @property
    def y_dot(self) -> float:
        return self.zeta_dot * math.sin(self.theta) + self.zeta * self.theta_dot * math.cos(self.theta)


@dataclass(frozen=True)
class FlightState:
    x: float
    y: float
    x_dot: float
    y_dot: float
    theta_leg: float  # accumulated leg angle [rad], not wrapped
    omega: float  # motor shaft speed [rad/s]
    i_a: float

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.x_dot, self.y_dot, self.theta_leg, self.omega, self.i_a])

    @classmethod
    def from_array(cls, y) -> "FlightState":
        return cls(*(float(v) for v in y[:7]))

    @property
    def theta_eff(self) -> float:
        """Leg angle wrapped into [0, 2*pi)."""
        return self.theta_leg % (2.0 * math.pi)


@dataclass(frozen=True)
class StanceDerivative:
    theta_dot: float
    theta_ddot: float
    zeta_dot: float
    zeta_ddot: float
    di_a: float


@dataclass(frozen=True)
class FlightDerivative:
    x_dot: float
    x_ddot: float
    y_dot: float
    y_ddot: float
    theta_leg_dot: float
    omega_dot: float
    di_a: float


def pack_params(p: SystemParams) -> np.ndarray:
    """Pack SystemParams into the flat vector the kernels consume."""
    pp = np.empty(12)
    pp[PP_M] = p.m
    pp[PP_K0] = p.k_0
    pp[PP_L0] = p.l_0
    pp[PP_BL] = p.b_l
    pp[PP_G] = p.g
    pp[PP_R] = p.motor.R
    pp[PP_J] = p.J
    pp[PP_KT] = p.motor.k_t
    pp[PP_KB] = p.motor.k_b
    pp[PP_RA] = p.motor.R_a
    pp[PP_LA] = p.motor.L_a
    pp[PP_C] = p.motor.c
    return pp


@njit(cache=True)
def stance_rhs_arr(y, pp, V, out):
    """Stance derivatives into out[:5].

    theta_ddot * (1 + R^2 J / (m zeta^2)) =
        -2 zeta_dot theta_dot / zeta - g cos(theta) / zeta
        - c R^2 theta_dot / (m zeta^2) + k_t i_a R / (m zeta^2)
    zeta_ddot = zeta theta_dot^2 - g sin(theta)
        - (k_0/m)(zeta - l_0) - (b_l/m) zeta_dot
    L_a di_a/dt = V - R_a i_a - k_b R theta_dot
    """
    th = y[0]
    thd = y[1]
    ze = y[2]
    zed = y[3]
    ia = y[4]
    m = pp[0]
    mz2 = m * ze * ze
    R = pp[5]
    num = (-2.0 * zed * thd / ze
           - pp[4] * math.cos(th) / ze
           - pp[11] * R * R * thd / mz2
           + pp[7] * ia * R / mz2)
    out[0] = thd
    out[1] = num / (1.0 + R * R * pp[6] / mz2)
    out[2] = zed
    out[3] = ze * thd * thd - pp[4] * math.sin(th) - (pp[1] / m) * (ze - pp[2]) - (pp[3] / m) * zed
    out[4] = (V - pp[9] * ia - pp[8] * R * thd) / pp[10]


@njit(cache=True)
def flight_rhs_arr(y, pp, V, out):
    """Ballistic flight with the motor spinning the unloaded leg."""
    out[0] = y[2]
    out[1] = y[3]
    out[2] = 0.0
    out[3] = -pp[4]
    out[4] = y[5] / pp[5]  # theta_leg_dot = omega / R
    out[5] = (pp[7] * y[6] - pp[11] * y[5]) / pp[6]
    out[6] = (V - pp[9] * y[6] - pp[8] * y[5]) / pp[10]


def stance_rhs(s: StanceState, p: SystemParams, V_a: float) -> StanceDerivative:
    """Time derivatives of the stance state under applied voltage V_a."""
    if s.zeta <= 0:
        raise ValueError(f"stance requires zeta > 0, got {s.zeta}")
    out = np.empty(STANCE_DIM)
    stance_rhs_arr(s.as_array(), pack_params(p), float(V_a), out)
    if not np.all(np.isfinite(out)):
        raise IntegrationAbort(f"non-finite stance derivative: {out}", state=s)
    return StanceDerivative(*out)


def flight_rhs(s: FlightState, p: SystemParams, V_a: float) -> FlightDerivative:
    """Time derivatives of the flight state under applied voltage V_a."""
    out = np.empty(FLIGHT_DIM)
    flight_rhs_arr(s.as_array(), pack_params(p), float(V_a), out)
    if not np.all(np.isfinite(out)):
        raise IntegrationAbort(f"non-finite flight derivative: {out}", state=s)
    return FlightDerivative(x_dot=out[0], y_dot=out[1], x_ddot=out[2], y_ddot=out[3],
                            theta_leg_dot=out[4], omega_dot=out[5], di_a=out[6])


def liftoff_event(s: StanceState, p: SystemParams) -> float:
    """Liftoff indicator: zeta - l_0.

    Liftoff candidates are upward zero crossings (spring back at natural
    length while extending); the crossing is only accepted if the body's
    vertical acceleration exceeds free fall (see liftoff_guard).
    """
    return s.zeta - p.l_0


def touchdown_event(s: FlightState, p: SystemParams) -> float:
    """Touchdown indicator: height of the foot above the ground.

    The foot sits at ``y - l_0 * sin(theta_leg)``; sin is periodic so the
    accumulated leg angle can be used directly. Only downward crossings
    with the body descending count as touchdown.
    """
    return s.y - p.l_0 * math.sin(s.theta_leg)


def stance_height(s: StanceState) -> float:
    """Body height during stance: zeta * sin(theta)."""
    return s.zeta * math.sin(s.theta)


def stance_y_accel(s: StanceState, p: SystemParams, V_a: float) -> float:
    """Vertical body acceleration implied by the stance dynamics.

    From y = zeta sin(theta):
    y_ddot = zeta_ddot sin(theta) + 2 zeta_dot theta_dot cos(theta)
             + zeta theta_ddot cos(theta) - zeta theta_dot^2 sin(theta)
    """
    d = stance_rhs(s, p, V_a)
    st = math.sin(s.theta)
    ct = math.cos(s.theta)
    return (d.zeta_ddot * st
            + 2.0 * s.zeta_dot * s.theta_dot * ct
            + s.zeta * d.theta_ddot * ct
            - s.zeta * s.theta_dot**2 * st)


def contact_force_y(s: StanceState, p: SystemParams, V_a: float) -> float:
    """Vertical ground reaction implied by keeping the foot planted.

    ``N_y = m * (y_ddot + g)``. At the natural-length crossing the
    spring force is zero and the polar terms cancel, so N_y reduces to
    the vertical component of the hip-torque transmission: positive
    means the ground is still pushing, negative means holding stance
    would need the ground to pull the foot down.
    """
    return p.m * (stance_y_accel(s, p, V_a) + p.g)


def liftoff_guard(s: StanceState, p: SystemParams, V_a: float) -> bool:
    """True when the body clears free fall at a liftoff candidate.

    Equivalent to a non-negative vertical ground reaction. The contact
    is unilateral, so a failed guard means separation is already
    overdue, never that the foot can stay glued: the simulator releases
    at the natural-length crossing either way and uses this only as a
    diagnostic.
    """
    return stance_y_accel(s, p, V_a) > -p.g


def liftoff_transform(s: StanceState, p: SystemParams) -> FlightState:
    """Map a stance state at liftoff to the flight coordinates.

    Position and velocity of the center of mass are preserved exactly;
    the leg angle seeds the flight rotation and the shaft keeps its
    kinematically locked speed omega = R * theta_dot. Motor current is
    continuous across the transition.
    """
    return FlightState(
        x=s.x,
        y=s.y,
        x_dot=s.x_dot,
        y_dot=s.y_dot,
        theta_leg=s.theta,
        omega=p.motor.R * s.theta_dot,
        i_a=s.i_a,
    )


def touchdown_transform(s: FlightState, p: SystemParams) -> StanceState:
    """Map a flight state at touchdown to the stance coordinates.

    The leg angle is the wrapped flight angle; the leg length comes from
    the contact height (clipped to the natural length), and the polar
    rates invert the velocity map. The shaft re-engages the leg, so any
    mismatch between omega/R and the kinematic theta_dot is resolved in
    favor of the rigid-contact kinematics.
    """
    theta = s.theta_eff
    st = math.sin(theta)
    if st <= 0.0:
        raise InvalidTouchdown(f"touchdown with leg angle {theta:.4f} rad not pointing below the body")
    zeta = min(s.y / st, p.l_0)
    if zeta <= 0.0:
        raise InvalidTouchdown(f"touchdown with non-positive leg length {zeta:.4g} m")
    ct = math.cos(theta)
    zeta_dot = -s.x_dot * ct + s.y_dot * st
    theta_dot = (s.x_dot * st + s.y_dot * ct) / zeta
    return StanceState(
        theta=theta,
        theta_dot=theta_dot,
        zeta=zeta,
        zeta_dot=zeta_dot,
        i_a=s.i_a,
        foot_x=s.x + zeta * ct,
    )
