import math

import numpy as np
import pytest

from avgorbit.quadrature import _NODES, QuadratureError, adaptive_quad


def test_weights_sum_to_two():
    gauss = sum(wg for _, wg, _ in _NODES)
    kronrod = sum(wk for _, _, wk in _NODES)
    assert gauss == pytest.approx(2.0, abs=1e-13)
    assert kronrod == pytest.approx(2.0, abs=1e-13)


@pytest.mark.parametrize("k", range(11))
def test_exact_on_monomials(k):
    value, _ = adaptive_quad(lambda x: x ** k, 0.0, 1.0)
    assert value == pytest.approx(1.0 / (k + 1), abs=1e-13)


def test_sine_squared_over_full_period():
    value, err = adaptive_quad(lambda t: math.sin(t) ** 2, 0.0, 2.0 * math.pi)
    assert value == pytest.approx(math.pi, abs=1e-12)
    assert err <= 1e-10


def test_exponential():
    value, _ = adaptive_quad(math.exp, 0.0, 1.0)
    assert value == pytest.approx(math.e - 1.0, abs=1e-12)


def test_high_harmonic_needs_subdivision():
    value, err = adaptive_quad(lambda t: math.sin(51.0 * t) ** 2, 0.0, 2.0 * math.pi)
    assert value == pytest.approx(math.pi, abs=1e-10)
    assert err <= 1e-10


def test_sharp_kernel():
    value, _ = adaptive_quad(lambda x: 1.0 / (1.0 + 100.0 * x * x), 0.0, 1.0)
    assert value == pytest.approx(math.atan(10.0) / 10.0, abs=1e-12)


def test_tolerance_respected_against_known_value():
    for tol in (1e-6, 1e-9, 1e-12):
        value, err = adaptive_quad(lambda t: math.cos(3.0 * t), 0.0, 1.0, abs_tol=tol)
        assert err <= tol
        assert abs(value - math.sin(3.0) / 3.0) <= tol


def test_non_convergence_reports_achieved_error():
    with pytest.raises(QuadratureError) as err:
        adaptive_quad(lambda t: math.sin(1000.0 * t), 0.0, 2.0 * math.pi,
                      abs_tol=1e-14, max_panels=4)
    assert err.value.achieved_error > 0.0


def test_input_validation():
    with pytest.raises(ValueError):
        adaptive_quad(math.sin, 1.0, 1.0)
    with pytest.raises(ValueError):
        adaptive_quad(math.sin, 0.0, 1.0, abs_tol=0.0)


def test_deterministic():
    runs = [adaptive_quad(lambda t: math.sin(7.0 * t) * math.exp(-t), 0.0, 5.0)
            for _ in range(3)]
    assert runs[0] == runs[1] == runs[2]
