import math

import pytest

import oracles


@pytest.mark.parametrize("p", [1.5, 2.0, 3.0, 4.0])
def test_shooting_matches_generalized_pi(p):
    assert oracles.shooting_eigenvalue(p) == pytest.approx((p - 1) * oracles.pi_p(p) ** p,
                                                           rel=1e-9)


def test_shooting_p2_is_pi_squared():
    assert oracles.shooting_eigenvalue(2.0) == pytest.approx(math.pi ** 2, rel=1e-10)


def test_shooting_scales_with_length():
    # lam(L) = lam(1) L^-p
    assert oracles.shooting_eigenvalue(3.0, 0.5) == pytest.approx(
        oracles.shooting_eigenvalue(3.0) * 8.0, rel=1e-8)


def test_frozen_values_regenerate():
    assert oracles.shooting_eigenvalue(3.0) == pytest.approx(oracles.SHOOTING_P3, rel=1e-9)
    assert oracles.shooting_eigenvalue(1.5) == pytest.approx(oracles.SHOOTING_P15, rel=1e-9)


def test_torsion_solves_flux_ode():
    # integrate the flux once: |u'|^(p-2) u' = L/2 - x
    p, x, h = 3.0, 0.3, 1e-6
    du = (oracles.torsion_1d(x + h, p) - oracles.torsion_1d(x - h, p)) / (2 * h)
    assert abs(du) ** (p - 2) * du == pytest.approx(0.5 - x, rel=1e-6)
    assert oracles.torsion_max_1d(2.0) == pytest.approx(0.125)


def test_logspace_bounds_hand_values():
    assert oracles.lb1_logspace(1, 2, 2, 1, 1, 1.0, 1.0, 1.0, 1.0) == pytest.approx(4.0)
    assert oracles.lb1_logspace(1, 2, 2, 1, 1, 0.5, 0.5, 1.0, 1.0) == pytest.approx(64.0)
    assert oracles.eta_logspace(1, 1, 1, 2, 2, 1, 1, 1.0, 1.0, 1.0, 1.0) == pytest.approx(2.0)
    assert oracles.eta_logspace(4, 4, 1, 2, 2, 1, 1, 1.0, 1.0, 1.0, 1.0) == pytest.approx(0.5)
