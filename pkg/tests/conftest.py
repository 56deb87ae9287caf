import dataclasses

import pytest

from tdslip.catalog import load_default_catalog
from tdslip.model import DesignVector, build_system


@pytest.fixture(scope="session")
def catalog():
    return load_default_catalog()


@pytest.fixture(scope="session")
def hopper_design():
    """A hand-tuned forward-hopping design used across simulation tests.

    Completes 12+ cycles of forward running with a full leg revolution
    per flight; not feasible on every constraint, but healthy enough to
    exercise every phase of the machinery.
    """
    return DesignVector(
        motor_label=15, m_add=0.1248, E=1.734e8, rho=0.03, b=0.01, h=0.00425,
        b_l=0.0005, zeta_dot_0=-0.6, theta_0=66.0, theta_dot_0=0.8,
        a=(0.35, 0.8, 0.0, 0.0, 0.0, 0.0), T_FC=0.07,
    )


@pytest.fixture(scope="session")
def hopper_params(hopper_design, catalog):
    return build_system(hopper_design, catalog)


@pytest.fixture(scope="session")
def conservative_params(hopper_params):
    """Same system with every dissipation and actuation path removed."""
    motor = dataclasses.replace(hopper_params.motor, c=0.0, k_t=0.0)
    return dataclasses.replace(hopper_params, b_l=0.0, motor=motor)
