import math

import numpy as np
import pytest

from tdslip.dynamics import (
    FlightState,
    InvalidTouchdown,
    StanceState,
    contact_force_y,
    flight_rhs,
    liftoff_event,
    liftoff_transform,
    stance_height,
    stance_rhs,
    touchdown_event,
    touchdown_transform,
)


def kinetic_energy_polar(s: StanceState, m: float) -> float:
    return 0.5 * m * (s.zeta_dot**2 + s.zeta**2 * s.theta_dot**2)


class TestStanceRhs:
    def test_uncompressed_vertical_rest(self, hopper_params):
        s = StanceState(theta=math.pi / 2, theta_dot=0.0, zeta=hopper_params.l_0,
                        zeta_dot=0.0, i_a=0.0)
        d = stance_rhs(s, hopper_params, 0.0)
        assert d.theta_ddot == pytest.approx(0.0, abs=1e-12)
        assert d.zeta_ddot == pytest.approx(-hopper_params.g, rel=1e-12)
        assert d.di_a == 0.0

    def test_pure_torque_response(self, hopper_params):
        p = hopper_params
        s = StanceState(theta=math.pi / 2, theta_dot=0.0, zeta=p.l_0, zeta_dot=0.0, i_a=0.5)
        d = stance_rhs(s, p, 0.0)
        R, kt = p.motor.R, p.motor.k_t
        expected = kt * 0.5 * R / (p.m * p.l_0**2 + R**2 * p.J)
        assert d.theta_ddot == pytest.approx(expected, rel=1e-12)
        assert expected > 0  # positive current advances the body

    def test_against_independent_symbolic_form(self, hopper_params):
        """Full equations re-derived with sympy and compared pointwise."""
        import sympy as sp

        th, thd, ze, zed, ia, V = sp.symbols("theta theta_dot zeta zeta_dot i_a V")
        m, k0, l0, bl, g, R, J, kt, kb, Ra, La, c = sp.symbols(
            "m k0 l0 bl g R J kt kb Ra La c", positive=True)

        thdd = sp.Symbol("theta_ddot")
        eq = sp.Eq(thdd * (1 + R**2 * J / (m * ze**2)),
                   -2 * zed * thd / ze - g * sp.cos(th) / ze
                   - c * R**2 * thd / (m * ze**2) + kt * ia * R / (m * ze**2))
        thdd_expr = sp.solve(eq, thdd)[0]
        zedd_expr = ze * thd**2 - g * sp.sin(th) - (k0 / m) * (ze - l0) - (bl / m) * zed
        didt_expr = (V - Ra * ia - kb * R * thd) / La

        p = hopper_params
        subs_params = {m: p.m, k0: p.k_0, l0: p.l_0, bl: p.b_l, g: p.g,
                       R: p.motor.R, J: p.J, kt: p.motor.k_t, kb: p.motor.k_b,
                       Ra: p.motor.R_a, La: p.motor.L_a, c: p.motor.c}
        f = sp.lambdify((th, thd, ze, zed, ia, V),
                        [thdd_expr.subs(subs_params), zedd_expr.subs(subs_params),
                         didt_expr.subs(subs_params)], "math")

        rng = np.random.default_rng(12)
        for _ in range(50):
            s = StanceState(
                theta=rng.uniform(0.3, 2.8), theta_dot=rng.uniform(-30, 30),
                zeta=rng.uniform(0.2, 1.5) * p.l_0, zeta_dot=rng.uniform(-3, 3),
                i_a=rng.uniform(-2, 2))
            Va = rng.uniform(-3, 3)
            got = stance_rhs(s, p, Va)
            want = f(s.theta, s.theta_dot, s.zeta, s.zeta_dot, s.i_a, Va)
            assert got.theta_ddot == pytest.approx(want[0], rel=1e-12, abs=1e-12)
            assert got.zeta_ddot == pytest.approx(want[1], rel=1e-12, abs=1e-12)
            assert got.di_a == pytest.approx(want[2], rel=1e-12, abs=1e-12)

    def test_reduces_to_motorless_form_as_coupling_vanishes(self, hopper_params):
        """With R^2 J and c negligible the angular equation collapses to
        theta_ddot = -2 zd td / z - g cos/z + tau/(m z^2), tau = kt ia R."""
        import dataclasses

        p = hopper_params
        motor = dataclasses.replace(p.motor, J_m=1e-300, J_gb=0.0, c=0.0)
        tiny = dataclasses.replace(p, motor=motor, J=motor.J)
        s = StanceState(theta=1.1, theta_dot=7.0, zeta=0.05, zeta_dot=-0.4, i_a=0.8)
        d = stance_rhs(s, tiny, 1.0)
        tau = tiny.motor.k_t * s.i_a * tiny.motor.R
        expected = (-2 * s.zeta_dot * s.theta_dot / s.zeta
                    - tiny.g * math.cos(s.theta) / s.zeta
                    + tau / (tiny.m * s.zeta**2))
        assert d.theta_ddot == pytest.approx(expected, rel=1e-12)

    def test_nonpositive_leg_length_rejected(self, hopper_params):
        s = StanceState(theta=1.0, theta_dot=0.0, zeta=0.0, zeta_dot=0.0, i_a=0.0)
        with pytest.raises(ValueError):
            stance_rhs(s, hopper_params, 0.0)


class TestFlightRhs:
    def test_pure_projectile(self, hopper_params):
        s = FlightState(x=0.0, y=1.0, x_dot=0.5, y_dot=2.0, theta_leg=1.0, omega=0.0, i_a=0.0)
        d = flight_rhs(s, hopper_params, 0.0)
        assert (d.x_dot, d.x_ddot, d.y_dot, d.y_ddot) == (0.5, 0.0, 2.0, -hopper_params.g)
        assert d.theta_leg_dot == 0.0
        assert d.omega_dot == 0.0
        assert d.di_a == 0.0

    def test_locked_rotor_current_rise(self, hopper_params):
        p = hopper_params
        s = FlightState(0, 1, 0, 0, 0.0, omega=0.0, i_a=0.0)
        d = flight_rhs(s, p, 3.0)
        assert d.di_a == pytest.approx(3.0 / p.motor.L_a, rel=1e-12)

    def test_motor_steady_state(self, hopper_params):
        # solve di/dt = 0, domega/dt = 0 with V = 3 analytically
        p = hopper_params
        den = p.motor.R_a * p.motor.c + p.motor.k_t * p.motor.k_b
        omega_ss = 3.0 * p.motor.k_t / den
        i_ss = 3.0 * p.motor.c / den
        s = FlightState(0, 1, 0, 0, 0.0, omega=omega_ss, i_a=i_ss)
        d = flight_rhs(s, p, 3.0)
        assert d.omega_dot == pytest.approx(0.0, abs=1e-10)
        assert d.di_a == pytest.approx(0.0, abs=1e-10)
        assert d.theta_leg_dot == pytest.approx(omega_ss / p.motor.R, rel=1e-12)


class TestEvents:
    def test_liftoff_value_below_natural_length(self, hopper_params):
        s = StanceState(theta=1.0, theta_dot=1.0, zeta=hopper_params.l_0 - 1e-3,
                        zeta_dot=0.5, i_a=0.0)
        assert liftoff_event(s, hopper_params) == pytest.approx(-1e-3)

    def test_touchdown_value_hand_arithmetic(self, hopper_params):
        import dataclasses

        p = dataclasses.replace(hopper_params, l_0=0.06)
        s = FlightState(x=0.0, y=0.10, x_dot=0.0, y_dot=-1.0,
                        theta_leg=math.radians(60), omega=0.0, i_a=0.0)
        assert touchdown_event(s, p) == pytest.approx(0.10 - 0.06 * math.sin(math.radians(60)), abs=1e-12)
        assert touchdown_event(s, p) == pytest.approx(0.048, abs=5e-4)

    def test_touchdown_uses_wrapped_angle(self, hopper_params):
        s1 = FlightState(0, 0.1, 0, -1, theta_leg=1.0, omega=0, i_a=0)
        s2 = FlightState(0, 0.1, 0, -1, theta_leg=1.0 + 4 * math.pi, omega=0, i_a=0)
        assert touchdown_event(s1, hopper_params) == pytest.approx(
            touchdown_event(s2, hopper_params), rel=1e-12)


class TestTransforms:
    def test_vertical_liftoff(self, hopper_params):
        p = hopper_params
        s = StanceState(theta=math.pi / 2, theta_dot=0.0, zeta=p.l_0, zeta_dot=1.0,
                        i_a=0.2, foot_x=0.3)
        f = liftoff_transform(s, p)
        assert f.x_dot == pytest.approx(0.0, abs=1e-15)
        assert f.y_dot == pytest.approx(1.0)
        assert f.y == pytest.approx(p.l_0)
        assert f.omega == 0.0
        assert f.i_a == 0.2

    def test_positive_rotation_moves_body_forward(self, hopper_params):
        p = hopper_params
        w = 8.0
        s = StanceState(theta=math.pi / 2, theta_dot=w, zeta=p.l_0, zeta_dot=0.0, i_a=0.0)
        f = liftoff_transform(s, p)
        assert f.x_dot == pytest.approx(p.l_0 * w, rel=1e-12)
        assert f.x_dot > 0

    def test_kinetic_energy_continuity(self, hopper_params):
        p = hopper_params
        rng = np.random.default_rng(5)
        for _ in range(25):
            s = StanceState(theta=rng.uniform(0.4, 2.6), theta_dot=rng.uniform(-20, 20),
                            zeta=p.l_0, zeta_dot=rng.uniform(-2, 2), i_a=0.0,
                            foot_x=rng.uniform(-1, 1))
            f = liftoff_transform(s, p)
            ke_polar = kinetic_energy_polar(s, p.m)
            ke_cart = 0.5 * p.m * (f.x_dot**2 + f.y_dot**2)
            assert ke_cart == pytest.approx(ke_polar, rel=1e-10)

    def test_com_position_and_velocity_preserved(self, hopper_params):
        p = hopper_params
        s = StanceState(theta=1.9, theta_dot=6.0, zeta=p.l_0, zeta_dot=0.8, i_a=0.1, foot_x=0.5)
        f = liftoff_transform(s, p)
        assert f.x == pytest.approx(s.x, abs=1e-15)
        assert f.y == pytest.approx(s.y, abs=1e-15)
        assert f.x_dot == pytest.approx(s.x_dot, abs=1e-14)
        assert f.y_dot == pytest.approx(s.y_dot, abs=1e-14)

    def test_touchdown_transform_algebra(self, hopper_params):
        p = hopper_params
        theta = math.radians(63.0)
        f = FlightState(x=0.4, y=p.l_0 * math.sin(theta), x_dot=0.9, y_dot=-0.7,
                        theta_leg=theta + 2 * math.pi, omega=50.0, i_a=0.15)
        s = touchdown_transform(f, p)
        assert s.theta == pytest.approx(theta, rel=1e-12)
        assert s.zeta == pytest.approx(p.l_0, rel=1e-12)
        assert s.zeta_dot == pytest.approx(-f.x_dot * math.cos(theta) + f.y_dot * math.sin(theta), rel=1e-12)
        assert s.i_a == 0.15
        # body position preserved exactly
        assert s.x == pytest.approx(f.x, abs=1e-15)
        assert s.y == pytest.approx(f.y, abs=1e-12)
        assert s.x_dot == pytest.approx(f.x_dot, abs=1e-13)
        assert s.y_dot == pytest.approx(f.y_dot, abs=1e-13)

    def test_round_trip_through_both_transforms(self, hopper_params):
        p = hopper_params
        s0 = StanceState(theta=1.95, theta_dot=7.5, zeta=p.l_0, zeta_dot=0.6, i_a=0.05, foot_x=0.2)
        f = liftoff_transform(s0, p)
        s1 = touchdown_transform(f, p)
        assert s1.theta == pytest.approx(s0.theta, rel=1e-12)
        assert s1.zeta == pytest.approx(s0.zeta, rel=1e-9)
        assert s1.zeta_dot == pytest.approx(s0.zeta_dot, rel=1e-10)
        assert s1.theta_dot == pytest.approx(s0.theta_dot, rel=1e-10)
        assert s1.foot_x == pytest.approx(s0.foot_x, abs=1e-12)

    def test_touchdown_with_leg_above_body_rejected(self, hopper_params):
        f = FlightState(x=0, y=0.05, x_dot=0, y_dot=-1, theta_leg=math.pi + 0.3, omega=0, i_a=0)
        with pytest.raises(InvalidTouchdown):
            touchdown_transform(f, hopper_params)

    def test_touchdown_outside_angle_window_still_transforms(self, hopper_params):
        # feasibility is judged by constraints, not by the transform
        p = hopper_params
        theta = math.radians(15.0)
        f = FlightState(x=0, y=p.l_0 * math.sin(theta), x_dot=0.5, y_dot=-0.5,
                        theta_leg=theta, omega=0, i_a=0)
        s = touchdown_transform(f, p)
        assert s.theta == pytest.approx(theta, rel=1e-12)


def test_stance_height_and_contact_force(hopper_params):
    p = hopper_params
    s = StanceState(theta=math.pi / 2, theta_dot=0.0, zeta=p.l_0 * 0.9, zeta_dot=0.0, i_a=0.0)
    assert stance_height(s) == pytest.approx(0.9 * p.l_0)
    # compressed spring pushes: positive vertical ground reaction
    assert contact_force_y(s, p, 0.0) > 0
