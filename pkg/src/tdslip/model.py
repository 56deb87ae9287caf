"""Design vector and derived physical parameters.

A candidate robot is described by 17 decision variables: one discrete
motor label and 16 continuous quantities covering added mass, leg
geometry/material, leg damping, initial conditions, the six stance
voltage polynomial coefficients, and the flight voltage on-time.

The design vector stores the two non-SI fields in their catalog units
(touchdown angle in degrees, leg rotation rate in revolutions per
second); :func:`build_system` converts them to radians exactly once, so
everything downstream of it works in SI units and radians.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

from .catalog import MotorSpec, lookup

__all__ = [
    "DesignVector",
    "SystemParams",
    "BoundsError",
    "BOUNDS",
    "GRAVITY",
    "leg_stiffness",
    "system_mass",
    "relative_stiffness",
    "build_system",
]

GRAVITY = 9.81  # m/s^2

# Fixed masses in the minimum-mass estimate: battery and microcontroller.
BATTERY_MASS_KG = 0.003
MCU_MASS_KG = 0.005

# Search bounds per variable. Angles in degrees, rotation rate in rev/s,
# everything else SI. motor_label is the single integer variable.
BOUNDS: dict[str, tuple[float, float]] = {
    "motor_label": (1, 18),
    "m_add": (0.01, 0.5),
    "E": (10e3, 130e9),
    "rho": (0.001, 0.03),
    "b": (0.0005, 0.01),
    "h": (0.0005, 0.01),
    "b_l": (0.0005, 0.01),
    "zeta_dot_0": (-5.0, -0.1),
    "theta_0": (25.0, 85.0),
    "theta_dot_0": (0.8, 1.6),
    "a_0": (-2.0, 2.0),
    "a_1": (-2.0, 2.0),
    "a_2": (-2.0, 2.0),
    "a_3": (-2.0, 2.0),
    "a_4": (-2.0, 2.0),
    "a_5": (-2.0, 2.0),
    "T_FC": (0.0, 0.1),
}

# Optimizer ordering of the flat vector form.
VARIABLE_ORDER = list(BOUNDS.keys())


class BoundsError(ValueError):
    """A design variable lies outside its search bounds."""


@dataclass(frozen=True)
class DesignVector:
    """One point in the mixed-discrete design space.

    ``theta_0`` is stored in degrees and ``theta_dot_0`` in rev/s;
    ``a`` holds the stance voltage polynomial coefficients a0..a5.
    """

    motor_label: int
    m_add: float  # mass added on top of the structural minimum [kg]
    E: float  # leg elastic modulus [Pa]
    rho: float  # leg radius [m]; natural leg length is 2*rho
    b: float  # leg cross-section thickness [m]
    h: float  # leg cross-section width [m]
    b_l: float  # linear leg damping [N*s/m]
    zeta_dot_0: float  # initial radial velocity [m/s], negative
    theta_0: float  # prescribed touchdown angle [deg]
    theta_dot_0: float  # initial leg rotation rate [rev/s]
    a: tuple[float, float, float, float, float, float] = field(default=(0.0,) * 6)
    T_FC: float = 0.0  # flight voltage on-time [s]

    def to_dict(self) -> dict:
        d = {
            "motor_label": int(self.motor_label),
            "m_add": self.m_add,
            "E": self.E,
            "rho": self.rho,
            "b": self.b,
            "h": self.h,
            "b_l": self.b_l,
            "zeta_dot_0": self.zeta_dot_0,
            "theta_0": self.theta_0,
            "theta_dot_0": self.theta_dot_0,
        }
        for i, ai in enumerate(self.a):
            d[f"a_{i}"] = ai
        d["T_FC"] = self.T_FC
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "DesignVector":
        missing = [k for k in VARIABLE_ORDER if k not in d]
        if missing:
            raise ValueError(f"design is missing variables: {missing}")
        return cls(
            motor_label=int(round(float(d["motor_label"]))),
            m_add=float(d["m_add"]),
            E=float(d["E"]),
            rho=float(d["rho"]),
            b=float(d["b"]),
            h=float(d["h"]),
            b_l=float(d["b_l"]),
            zeta_dot_0=float(d["zeta_dot_0"]),
            theta_0=float(d["theta_0"]),
            theta_dot_0=float(d["theta_dot_0"]),
            a=tuple(float(d[f"a_{i}"]) for i in range(6)),
            T_FC=float(d["T_FC"]),
        )

    def to_array(self) -> list[float]:
        d = self.to_dict()
        return [float(d[k]) for k in VARIABLE_ORDER]

    @classmethod
    def from_array(cls, x) -> "DesignVector":
        if len(x) != len(VARIABLE_ORDER):
            raise ValueError(f"expected {len(VARIABLE_ORDER)} variables, got {len(x)}")
        return cls.from_dict(dict(zip(VARIABLE_ORDER, (float(v) for v in x))))

    def to_json(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n", encoding="utf-8")

    @classmethod
    def from_json(cls, path: str | Path) -> "DesignVector":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))

    def validate(self) -> None:
        """Raise BoundsError if any variable is outside its bounds."""
        for name, value in self.to_dict().items():
            lo, hi = BOUNDS[name]
            if not lo <= value <= hi:
                raise BoundsError(f"{name} = {value} outside bounds [{lo}, {hi}]")

    def clamped(self) -> "DesignVector":
        """Return a copy with every variable clamped into bounds."""
        d = self.to_dict()
        for name in d:
            lo, hi = BOUNDS[name]
            d[name] = min(max(d[name], lo), hi)
        d["motor_label"] = int(round(d["motor_label"]))
        return DesignVector.from_dict(d)


@dataclass(frozen=True)
class SystemParams:
    """Physical parameters of one candidate robot, all SI and radians.

    ``theta_0``/``theta_dot_0``/``zeta_dot_0`` are the converted initial
    conditions; the controller coefficients stay on the design vector.
    """

    m: float  # total mass [kg]
    k_0: float  # leg stiffness [N/m]
    l_0: float  # natural leg length [m]
    b_l: float  # leg damping [N*s/m]
    g: float  # gravity [m/s^2]
    motor: MotorSpec
    J: float  # reflected shaft + gearbox inertia [kg*m^2]
    theta_0: float  # prescribed touchdown angle [rad]
    theta_dot_0: float  # initial leg rotation rate [rad/s]
    zeta_dot_0: float  # initial radial velocity [m/s]


def leg_stiffness(b: float, h: float, E: float, rho: float) -> float:
    """Stiffness of the C-shaped leg as a linear spring.

    Castigliano approximation for a semicircular beam of radius ``rho``
    with rectangular cross-section ``b`` x ``h``:
    ``k_0 = b * h^3 * E / (6 * rho^3 * pi)``.
    """
    if b <= 0 or h <= 0 or E <= 0 or rho <= 0:
        raise ValueError(f"leg_stiffness requires positive inputs, got b={b}, h={h}, E={E}, rho={rho}")
    return b * h**3 * E / (6.0 * rho**3 * math.pi)


def system_mass(motor: MotorSpec, m_add: float) -> float:
    """Total system mass: structural minimum plus added mass.

    The minimum is two motors, a 5 g microcontroller board, and a 3 g
    battery, doubled to account for supporting structure:
    ``m_min = 2 * (m_B + m_mcu + 2 * m_motor)``. The catalog mass is the
    motor + gearbox combination, both of which the robot carries.
    """
    m_min = 2.0 * (BATTERY_MASS_KG + MCU_MASS_KG + 2.0 * motor.mass_kg)
    return m_min + m_add


def relative_stiffness(k_0: float, l_0: float, m: float) -> float:
    """Dimensionless leg stiffness ``k_0 * l_0 / (m * g)``.

    Biological and robotic runners cluster in roughly [7, 30].
    """
    return k_0 * l_0 / (m * GRAVITY)


def build_system(design: DesignVector, catalog: tuple[MotorSpec, ...]) -> SystemParams:
    """Assemble physical parameters for a design, converting units once.

    Validates the design against the search bounds, resolves the motor
    label, and converts the touchdown angle (deg -> rad) and rotation
    rate (rev/s -> rad/s).
    """
    design.validate()
    motor = lookup(catalog, design.motor_label)
    return SystemParams(
        m=system_mass(motor, design.m_add),
        k_0=leg_stiffness(design.b, design.h, design.E, design.rho),
        l_0=2.0 * design.rho,
        b_l=design.b_l,
        g=GRAVITY,
        motor=motor,
        J=motor.J,
        theta_0=math.radians(design.theta_0),
        theta_dot_0=2.0 * math.pi * design.theta_dot_0,
        zeta_dot_0=design.zeta_dot_0,
    )
