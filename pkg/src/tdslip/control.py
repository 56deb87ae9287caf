"""Open-loop voltage controller.

The motor is driven by time-based profiles that restart at each phase
transition: a fifth-order polynomial of time since touchdown during
stance, and a bang-on/bang-off profile during flight that applies the
rated voltage for ``T_FC`` seconds to reposition the leg, then shorts
the terminals so the shaft brakes to rest before the next touchdown.

The stance polynomial is clamped to the motor's rated voltage so no
candidate controller can command more than the hardware allows.
"""

from __future__ import annotations

from dataclasses import dataclass

__all__ = ["StanceVoltageProfile", "FlightVoltageProfile", "stance_voltage", "flight_voltage"]


@dataclass(frozen=True)
class StanceVoltageProfile:
    """Polynomial stance voltage V(t) = a0 + a1 t + ... + a5 t^5, clamped to +-V_max."""

    a: tuple[float, float, float, float, float, float]
    V_max: float = 3.0


@dataclass(frozen=True)
class FlightVoltageProfile:
    """Bang-on/bang-off flight voltage: V_max for t < T_FC, then 0."""

    T_FC: float
    V_max: float = 3.0


def stance_voltage(t: float, profile: StanceVoltageProfile) -> float:
    """Stance voltage at time ``t`` since the last touchdown."""
    a = profile.a
    v = a[0] + t * (a[1] + t * (a[2] + t * (a[3] + t * (a[4] + t * a[5]))))
    return min(max(v, -profile.V_max), profile.V_max)


def flight_voltage(t: float, profile: FlightVoltageProfile) -> float:
    """Flight voltage at time ``t`` since the last liftoff."""
    return profile.V_max if t < profile.T_FC else 0.0
