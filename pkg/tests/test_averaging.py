import math

import numpy as np
import pytest

from avgorbit.averaging import (
    AveragedSystem,
    average_over_period,
    averaged_forcing,
    averaged_matrix,
    build_averaged_system,
    constant_coefficient_det,
    existence_check,
    find_averaged_zero,
    first_order_field,
)
from avgorbit.newton import MaxIterationsError, NewtonError, SingularJacobianError
from avgorbit.pendulum import (
    InconsistentPeriodsError,
    PendulumParams,
    RationalPeriod,
    build_profile,
)

PI = math.pi


def constant_profile(a, c1, c2, g0=None):
    """Profile with constant small-angle coefficients f1 = c1, f2 = c2."""
    gfun = g0 if g0 is not None else (lambda t: 0.0)
    return build_profile(
        lambda t, th, td: c1 * th + c2 * td,
        lambda t, th, td: gfun(t),
        RationalPeriod.for_frequency(1, 1, a),
        RationalPeriod.for_frequency(1, 1, a),
        f1=lambda t: c1,
        f2=lambda t: c2,
        g0=gfun,
    )


def closed_form_constant_matrix(a, b_bar, c1, c2):
    """Averaged matrix for constant coefficients over one base period."""
    w = math.sqrt(a)
    return np.array((
        ((c2 - b_bar) * PI / w, -c1 * PI / a ** 1.5),
        (c1 * PI / w, (c2 - b_bar) * PI / w),
    ))


class TestAveragedMatrix:
    def test_constant_coefficients_match_closed_form(self):
        a, b_bar, c1, c2 = 2.3, 1.1, 2.5, 0.7
        params = PendulumParams(a, b_bar, 0.1)
        matrix = averaged_matrix(params, constant_profile(a, c1, c2))
        expected = closed_form_constant_matrix(a, b_bar, c1, c2)
        assert np.abs(matrix - expected).max() < 1e-9

    def test_damping_only(self):
        # f1 = f2 = 0, b_bar = 1, a = 1: the matrix is -pi times the identity
        params = PendulumParams(1.0, 1.0, 0.1)
        matrix = averaged_matrix(params, constant_profile(1.0, 0.0, 0.0))
        assert np.abs(matrix - (-PI) * np.eye(2)).max() < 1e-10

    def test_zero_everything(self):
        params = PendulumParams(1.0, 0.0, 0.0)
        matrix = averaged_matrix(params, constant_profile(1.0, 0.0, 0.0))
        assert np.abs(matrix).max() < 1e-12

    def test_base_period_mismatch_rejected(self):
        params = PendulumParams(4.0, 1.0, 0.1)  # base period pi
        with pytest.raises(InconsistentPeriodsError):
            averaged_matrix(params, constant_profile(1.0, 0.0, 0.0))


class TestAveragedForcing:
    def test_resonant_sine(self):
        params = PendulumParams(1.0, 1.0, 0.1)
        profile = constant_profile(1.0, 0.0, 0.0, g0=math.sin)
        v = averaged_forcing(params, profile)
        assert v[0] == pytest.approx(PI, abs=1e-10)
        assert v[1] == pytest.approx(0.0, abs=1e-10)

    def test_zero_forcing(self):
        params = PendulumParams(1.0, 1.0, 0.1)
        v = averaged_forcing(params, constant_profile(1.0, 0.0, 0.0))
        assert np.abs(v).max() < 1e-12

    def test_resonant_cosine(self):
        params = PendulumParams(1.0, 1.0, 0.1)
        profile = constant_profile(1.0, 0.0, 0.0, g0=math.cos)
        v = averaged_forcing(params, profile)
        assert v[0] == pytest.approx(0.0, abs=1e-10)
        assert v[1] == pytest.approx(-PI, abs=1e-10)


class TestAveragedSystem:
    def make(self):
        return AveragedSystem(
            matrix=np.array(((-PI, 0.0), (0.0, -PI))),
            forcing=np.array((PI, 0.0)),
            period=2.0 * PI,
        )

    def test_determinant_recomputed(self):
        assert self.make().det == pytest.approx(PI * PI)

    def test_zero_solves_system(self):
        system = self.make()
        z = system.zero
        assert z is not None
        residual = np.linalg.norm(system.matrix @ z - system.forcing)
        assert residual <= 1e-10 * (1.0 + np.linalg.norm(system.forcing))
        assert np.abs(z - np.array((-1.0, 0.0))).max() < 1e-14

    def test_zero_absent_when_singular(self):
        system = AveragedSystem(np.zeros((2, 2)), np.array((1.0, 0.0)), 2.0 * PI)
        assert system.zero is None
        assert not system.is_invertible

    def test_field_values(self):
        system = self.make()
        assert np.abs(system.field((0.0, 0.0)) - np.array((-PI, 0.0))).max() < 1e-15
        assert np.abs(system.field((-1.0, 0.0))).max() < 1e-15
        assert np.abs(system.field(system.zero)).max() < 1e-10

    def test_matrix_action_is_additive(self):
        rng = np.random.default_rng(5)
        system = AveragedSystem(rng.normal(size=(2, 2)), rng.normal(size=2), 2.0 * PI)
        for _ in range(20):
            z1 = rng.uniform(-2.0, 2.0, size=2)
            z2 = rng.uniform(-2.0, 2.0, size=2)
            lhs = system.field(z1 + z2) + system.forcing
            rhs = (system.field(z1) + system.forcing) + (system.field(z2) + system.forcing)
            assert np.abs(lhs - rhs).max() < 1e-12

    def test_json_dict(self):
        doc = self.make().to_json_dict()
        assert doc["M"] == [-PI, 0.0, 0.0, -PI]
        assert doc["v"] == [PI, 0.0]
        assert doc["detM"] == pytest.approx(PI * PI)
        assert doc["z0"] == pytest.approx([-1.0, 0.0])


class TestExistenceCheck:
    def test_reference_simulation(self, sim_params, sim_profile):
        system = build_averaged_system(sim_params, sim_profile)
        verdict = existence_check(system, sim_profile)
        assert verdict.conditions_hold
        assert verdict.hypothesis_ok
        assert verdict.det == pytest.approx(PI * PI, abs=1e-8)
        assert np.abs(verdict.zero - np.array((-1.0, 0.0))).max() < 1e-8
        assert verdict.diagnostics == ()

    def test_zero_second_order_forcing_fails(self):
        params = PendulumParams(1.0, 1.0, 0.1)
        system = build_averaged_system(params, constant_profile(1.0, 0.0, 0.0))
        verdict = existence_check(system, constant_profile(1.0, 0.0, 0.0))
        assert not verdict.conditions_hold
        assert verdict.zero is None or np.linalg.norm(verdict.zero) < 1e-9
        assert any("forcing" in note for note in verdict.diagnostics)

    def test_damping_matched_coefficient_is_singular(self):
        # f2 equal to b_bar makes the averaged matrix vanish identically
        params = PendulumParams(1.0, 1.0, 0.1)
        profile = constant_profile(1.0, 0.0, params.b_bar, g0=math.sin)
        system = build_averaged_system(params, profile)
        assert np.abs(system.matrix).max() < 1e-10
        verdict = existence_check(system, profile)
        assert not verdict.conditions_hold
        assert any("singular" in note for note in verdict.diagnostics)

    def test_nonvanishing_first_order_forcing_flagged(self):
        params = PendulumParams(1.0, 1.0, 0.1)
        profile = build_profile(
            lambda t, th, td: 1.0,  # violates the zero-amplitude hypothesis
            lambda t, th, td: math.sin(t),
            RationalPeriod.for_frequency(1, 1, 1.0),
            RationalPeriod.for_frequency(1, 1, 1.0),
        )
        system = build_averaged_system(params, profile)
        verdict = existence_check(system, profile)
        assert not verdict.hypothesis_ok
        assert verdict.conditions_hold  # algebraic conditions alone still hold
        assert any("vanish" in note for note in verdict.diagnostics)


class TestConstantCoefficientDet:
    def test_reference_value(self):
        assert constant_coefficient_det(0.0, 0.0, 1.0, 1.0) == pytest.approx(PI * PI)

    def test_degenerate_pair(self):
        assert constant_coefficient_det(0.0, 1.7, 1.0, 1.7) == 0.0

    def test_scaling(self):
        assert constant_coefficient_det(2.0, 0.0, 4.0, 1.0) == pytest.approx(PI * PI / 2.0)

    def test_agrees_with_quadrature(self):
        rng = np.random.default_rng(17)
        for _ in range(20):
            c1 = rng.uniform(-5.0, 5.0)
            c2 = rng.uniform(-5.0, 5.0)
            a = rng.uniform(0.5, 4.0)
            b_bar = rng.uniform(0.1, 3.0)
            params = PendulumParams(a, b_bar, 0.0)
            matrix = averaged_matrix(params, constant_profile(a, c1, c2))
            det = float(matrix[0, 0] * matrix[1, 1] - matrix[0, 1] * matrix[1, 0])
            expected = constant_coefficient_det(c1, c2, a, b_bar)
            assert abs(det - expected) <= 1e-8 * abs(expected)


class TestGeneralEngine:
    def test_constant_in_time_field(self):
        field = lambda s, z: np.asarray(z, dtype=float)
        out = average_over_period(field, 2.0 * PI, np.array((0.5, -2.0)))
        assert np.abs(out - 2.0 * PI * np.array((0.5, -2.0))).max() < 1e-10

    def test_mean_zero_trig(self):
        field = lambda s, z: np.array((math.sin(s), math.cos(s)))
        out = average_over_period(field, 2.0 * PI, np.zeros(2))
        assert np.abs(out).max() < 1e-10

    def test_two_averaging_routes_agree(self, trig_profile_factory):
        rng = np.random.default_rng(23)
        for _ in range(10):
            params, profile = trig_profile_factory(rng)
            system = build_averaged_system(params, profile)
            field = first_order_field(params, profile)
            for _ in range(5):
                z = rng.uniform(-1.0, 1.0, size=2)
                direct = average_over_period(field, profile.T, z)
                affine = system.field(z)
                assert np.abs(direct - affine).max() < 2e-9

    def test_newton_zero_matches_prediction(self, sim_params, sim_profile):
        system = build_averaged_system(sim_params, sim_profile)
        field = first_order_field(sim_params, sim_profile)
        zero, jacobian = find_averaged_zero(field, sim_profile.T, np.zeros(2))
        assert np.abs(zero - system.zero).max() < 1e-8
        assert np.abs(jacobian - system.matrix).max() < 1e-6
        assert abs(np.linalg.det(jacobian)) > 1e-8

    def test_affine_field_converges_in_one_step(self):
        c = np.array((1.5, -0.25))
        field = lambda s, z: np.asarray(z, dtype=float) - c
        zero, _ = find_averaged_zero(field, 1.0, np.zeros(2))
        assert np.abs(zero - c).max() < 1e-10

    def test_constant_nonzero_field_has_no_zero(self):
        field = lambda s, z: np.array((1.0, 0.0))
        with pytest.raises((MaxIterationsError, SingularJacobianError)):
            find_averaged_zero(field, 1.0, np.zeros(2))

    def test_newton_zero_random_profiles(self, trig_profile_factory):
        # general engine and direct solve coincide whenever the averaged
        # matrix is comfortably invertible
        rng = np.random.default_rng(29)
        found = 0
        for _ in range(5):
            params, profile = trig_profile_factory(rng)
            system = build_averaged_system(params, profile)
            if abs(system.det) < 1e-8:
                continue
            field = first_order_field(params, profile)
            try:
                zero, _ = find_averaged_zero(field, profile.T, system.zero + 0.1)
            except NewtonError:
                continue
            assert np.abs(zero - system.zero).max() < 1e-8
            found += 1
        assert found >= 3
