import math

import pytest
from hypothesis import given, strategies as st

from tdslip.catalog import lookup
from tdslip.model import (
    BOUNDS,
    BoundsError,
    DesignVector,
    GRAVITY,
    build_system,
    leg_stiffness,
    relative_stiffness,
    system_mass,
)

# Leg geometry/material of the two optimized reference designs.
CASE1_LEG = dict(b=0.0100, h=0.00425, E=1.173e9, rho=0.0300)
CASE2_LEG = dict(b=0.00301, h=0.00717, E=3.133e8, rho=0.0176)


class TestLegStiffness:
    def test_case1_reference_value(self):
        assert leg_stiffness(**CASE1_LEG) == pytest.approx(1769.0, rel=5e-3)

    def test_case2_reference_value(self):
        assert leg_stiffness(**CASE2_LEG) == pytest.approx(3382.0, rel=5e-3)

    def test_doubling_width_multiplies_by_eight(self):
        base = leg_stiffness(0.004, 0.003, 2e8, 0.02)
        assert leg_stiffness(0.004, 0.006, 2e8, 0.02) == pytest.approx(8 * base, rel=1e-14)

    @given(
        b=st.floats(1e-4, 1e-1), h=st.floats(1e-4, 1e-1), E=st.floats(1e4, 1e11),
        rho=st.floats(1e-3, 1e-1), alpha=st.floats(0.1, 10), beta=st.floats(0.1, 10),
        gamma=st.floats(0.5, 2),
    )
    def test_homogeneity(self, b, h, E, rho, alpha, beta, gamma):
        k = leg_stiffness(b, h, E, rho)
        assert leg_stiffness(alpha * b, h, beta * E, rho) == pytest.approx(alpha * beta * k, rel=1e-12)
        assert leg_stiffness(b, h, E, gamma * rho) == pytest.approx(k / gamma**3, rel=1e-12)

    @pytest.mark.parametrize("bad", [dict(b=0.0), dict(h=-1e-3), dict(E=0.0), dict(rho=-0.01)])
    def test_non_positive_inputs_rejected(self, bad):
        args = dict(CASE1_LEG)
        args.update(bad)
        with pytest.raises(ValueError):
            leg_stiffness(**args)


class TestSystemMass:
    def test_minimum_mass_formula(self, catalog):
        import dataclasses

        motor = dataclasses.replace(catalog[0], mass_kg=0.010)
        assert system_mass(motor, 0.0) == pytest.approx(0.056, abs=1e-12)

    def test_added_mass(self, catalog):
        import dataclasses

        motor = dataclasses.replace(catalog[0], mass_kg=0.010)
        assert system_mass(motor, 0.400) == pytest.approx(0.456, abs=1e-12)

    def test_degenerate_zero_motor_mass(self, catalog):
        import dataclasses

        motor = dataclasses.replace(catalog[0], mass_kg=1e-300)
        assert system_mass(motor, 0.2) == pytest.approx(0.016 + 0.2, abs=1e-9)


class TestRelativeStiffness:
    # Masses recovered by inverting k_rel = k_0 l_0 / (m g) at the
    # reported values, then checked forward.
    def test_case1_band(self):
        k0 = leg_stiffness(**CASE1_LEG)
        m = k0 * 0.0600 / (12.0 * GRAVITY)
        assert m == pytest.approx(0.902, rel=1e-2)
        assert relative_stiffness(k0, 0.0600, m) == pytest.approx(12.0, rel=5e-2)

    def test_case2_band(self):
        k0 = leg_stiffness(**CASE2_LEG)
        m = k0 * 0.0352 / (16.0 * GRAVITY)
        assert m == pytest.approx(0.758, rel=1e-2)
        assert relative_stiffness(k0, 0.0352, m) == pytest.approx(16.0, rel=5e-2)

    def test_unit_ratio(self):
        assert relative_stiffness(100.0, 0.05, 100.0 * 0.05 / GRAVITY) == pytest.approx(1.0)

    def test_reference_designs_inside_biological_band(self):
        for leg, l0, krel in ((CASE1_LEG, 0.06, 12.0), (CASE2_LEG, 0.0352, 16.0)):
            k0 = leg_stiffness(**leg)
            m = k0 * l0 / (krel * GRAVITY)
            assert 7.0 <= relative_stiffness(k0, l0, m) <= 30.0


class TestBuildSystem:
    def test_derived_quantities(self, hopper_design, catalog):
        p = build_system(hopper_design, catalog)
        assert p.l_0 == pytest.approx(2 * hopper_design.rho)
        assert p.k_0 == pytest.approx(leg_stiffness(hopper_design.b, hopper_design.h,
                                                    hopper_design.E, hopper_design.rho))
        motor = lookup(catalog, hopper_design.motor_label)
        assert p.J == motor.J_m + motor.J_gb
        assert p.m == pytest.approx(system_mass(motor, hopper_design.m_add))

    def test_unit_conversions(self, hopper_design, catalog):
        p = build_system(hopper_design, catalog)
        assert p.theta_0 == pytest.approx(math.radians(hopper_design.theta_0))
        assert p.theta_dot_0 == pytest.approx(2 * math.pi * hopper_design.theta_dot_0)
        assert p.zeta_dot_0 == hopper_design.zeta_dot_0

    def test_out_of_bounds_touchdown_angle_rejected(self, hopper_design, catalog):
        import dataclasses

        bad = dataclasses.replace(hopper_design, theta_0=90.0)
        with pytest.raises(BoundsError, match="theta_0"):
            build_system(bad, catalog)


class TestDesignVector:
    def test_json_round_trip(self, hopper_design, tmp_path):
        p = tmp_path / "d.json"
        hopper_design.to_json(p)
        assert DesignVector.from_json(p) == hopper_design

    def test_array_round_trip(self, hopper_design):
        assert DesignVector.from_array(hopper_design.to_array()) == hopper_design

    def test_clamped_pulls_into_bounds(self, hopper_design):
        import dataclasses

        wild = dataclasses.replace(hopper_design, theta_0=120.0, m_add=-3.0, motor_label=25)
        c = wild.clamped()
        c.validate()
        assert c.theta_0 == BOUNDS["theta_0"][1]
        assert c.m_add == BOUNDS["m_add"][0]
        assert c.motor_label == 18

    def test_missing_key_rejected(self):
        with pytest.raises(ValueError, match="missing"):
            DesignVector.from_dict({"motor_label": 1})
