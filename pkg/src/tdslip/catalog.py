"""Discrete motor/gearbox catalog.

The hopper is actuated by one of 18 small brushed DC motor + gearbox
combinations (3 V, 6/8/10 mm diameter class). The optimizer selects a
combination through an integer label; everything else about the actuator
is fixed data loaded from a CSV file. The catalog shipped with the
package (``data/motors.csv``) was populated from public datasheet values
for this motor class.

The catalog is immutable after loading and safe to share across worker
processes.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

__all__ = ["MotorSpec", "CatalogError", "load_catalog", "load_default_catalog", "lookup"]

N_MOTOR_OPTIONS = 18

CSV_FIELDS = [
    "label",
    "part_name",
    "diameter_mm",
    "R_a",
    "L_a",
    "k_t",
    "c",
    "J_m",
    "J_gb",
    "R",
    "mass_kg",
    "V_max",
    "i_max",
]

# Fields that must be strictly positive for the physics to be well posed.
_POSITIVE_FIELDS = [
    "diameter_mm",
    "R_a",
    "L_a",
    "k_t",
    "c",
    "J_m",
    "J_gb",
    "mass_kg",
    "V_max",
    "i_max",
]


class CatalogError(ValueError):
    """Raised when a catalog file is missing, malformed, or inconsistent."""


@dataclass(frozen=True)
class MotorSpec:
    """One motor + gearbox option.

    Electrical parameters are at the motor terminals; ``J_gb`` is the
    gearbox inertia reflected to the motor shaft, so the total reflected
    inertia is ``J_m + J_gb``. The torque constant equals the back-EMF
    constant for these motors (``k_t == k_b``). ``mass_kg`` is the
    combined motor + gearbox mass.
    """

    label: int
    part_name: str
    diameter_mm: float
    R_a: float  # terminal resistance [ohm]
    L_a: float  # terminal inductance [H]
    k_t: float  # torque constant [N*m/A]
    c: float  # viscous damping at the motor shaft [N*m/(rad/s)]
    J_m: float  # rotor inertia [kg*m^2]
    J_gb: float  # gearbox inertia at the motor shaft [kg*m^2]
    R: float  # gear ratio (output = shaft speed / R)
    mass_kg: float
    V_max: float  # rated voltage [V]
    i_max: float  # max continuous current [A]

    @property
    def k_b(self) -> float:
        """Back-EMF constant [V*s/rad], numerically equal to k_t."""
        return self.k_t

    @property
    def J(self) -> float:
        """Total reflected inertia at the motor shaft: J_m + J_gb."""
        return self.J_m + self.J_gb


def _parse_row(row: dict, line_no: int) -> MotorSpec:
    try:
        label = int(row["label"])
    except (KeyError, TypeError, ValueError):
        raise CatalogError(f"row {line_no}: label must be an integer, got {row.get('label')!r}")

    values = {}
    for field in CSV_FIELDS[2:]:
        raw = row.get(field)
        if raw is None or raw == "":
            raise CatalogError(f"row {line_no} (label {label}): missing field '{field}'")
        try:
            values[field] = float(raw)
        except ValueError:
            raise CatalogError(f"row {line_no} (label {label}): field '{field}' is not numeric: {raw!r}")

    for field in _POSITIVE_FIELDS:
        if not values[field] > 0.0:
            raise CatalogError(f"row {line_no} (label {label}): field '{field}' must be > 0, got {values[field]}")
    if values["R"] < 1.0:
        raise CatalogError(f"row {line_no} (label {label}): gear ratio R must be >= 1, got {values['R']}")

    return MotorSpec(label=label, part_name=str(row.get("part_name", "")).strip(), **values)


def load_catalog(path: str | Path) -> tuple[MotorSpec, ...]:
    """Load and validate a motor catalog CSV.

    The file must contain exactly one row per label 1..18 under the
    documented header. Returns the entries sorted by label.
    """
    path = Path(path)
    if not path.exists():
        raise CatalogError(f"catalog file not found: {path}")

    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise CatalogError(f"catalog file is empty: {path}")
        missing = [f for f in CSV_FIELDS if f not in reader.fieldnames]
        if missing:
            raise CatalogError(f"catalog header is missing columns: {missing}")
        entries = [_parse_row(row, i) for i, row in enumerate(reader, start=2)]

    if len(entries) != N_MOTOR_OPTIONS:
        raise CatalogError(f"expected {N_MOTOR_OPTIONS} catalog rows, found {len(entries)}")
    labels = sorted(e.label for e in entries)
    if labels != list(range(1, N_MOTOR_OPTIONS + 1)):
        seen: set[int] = set()
        dupes = sorted({e.label for e in entries if e.label in seen or seen.add(e.label)})
        if dupes:
            raise CatalogError(f"duplicate motor labels: {dupes}")
        raise CatalogError(f"labels must be exactly 1..{N_MOTOR_OPTIONS}, got {labels}")

    return tuple(sorted(entries, key=lambda e: e.label))


def default_catalog_path() -> Path:
    """Path of the catalog CSV shipped with the package."""
    return Path(resources.files("tdslip").joinpath("data/motors.csv"))


def load_default_catalog() -> tuple[MotorSpec, ...]:
    return load_catalog(default_catalog_path())


def lookup(catalog: tuple[MotorSpec, ...], label: int) -> MotorSpec:
    """Return the catalog entry with the given integer label (1..18)."""
    if not 1 <= int(label) <= len(catalog):
        raise CatalogError(f"motor label out of range 1..{len(catalog)}: {label}")
    entry = catalog[int(label) - 1]
    if entry.label != int(label):
        # load_catalog sorts by label, so this only fires on hand-built lists
        for e in catalog:
            if e.label == int(label):
                return e
        raise CatalogError(f"no catalog entry with label {label}")
    return entry


def save_catalog(catalog: tuple[MotorSpec, ...], path: str | Path) -> None:
    """Write a catalog back to CSV (inverse of load_catalog)."""
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_FIELDS)
        for e in catalog:
            writer.writerow([e.label, e.part_name, e.diameter_mm, e.R_a, e.L_a, e.k_t, e.c,
                             e.J_m, e.J_gb, e.R, e.mass_kg, e.V_max, e.i_max])
