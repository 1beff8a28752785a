import numpy as np
import pytest

import oracles
from plapmp import (ConfigError, ConvergenceError, SolveOptions, apply_p_laplacian, energy,
                    interval, rectangle, solve_dirichlet, solve_weighted_rhs)
from plapmp.pde_core import SolveInfo, signed_power


def sine(d):
    return d.restrict(d.sample(lambda x: np.sin(np.pi * x)))


def test_operator_of_zero_is_zero():
    d = interval(1.0, 32)
    assert np.all(apply_p_laplacian(d.zeros(), 3.0, d) == 0.0)


def test_operator_rejects_p_le_1():
    d = interval(1.0, 8)
    with pytest.raises(ConfigError):
        apply_p_laplacian(d.zeros(), 1.0, d)


def test_laplacian_of_sine():
    d = interval(1.0, 256)
    u = sine(d)
    lap = apply_p_laplacian(u, 2.0, d)
    idx = d.interior
    np.testing.assert_allclose(lap[idx], np.pi ** 2 * u[idx], rtol=1e-3)


def test_p3_operator_on_torsion():
    d = interval(1.0, 256)
    u = d.restrict(oracles.torsion_1d(d.coords[:, 0], 3.0))
    lap = apply_p_laplacian(u, 3.0, d)
    idx = d.interior
    x = d.coords[idx, 0]
    # the interpolant is only C^(1,1/2) where u' = 0; the three nearest nodes
    # carry an O(1) consistency error that does not shrink with h
    away = np.abs(x - 0.5) > 1.5 * d.spacing[0]
    np.testing.assert_allclose(lap[idx][away], 1.0, rtol=1e-2)
    l1 = np.sum(d.mesh.mass[idx] * np.abs(lap[idx] - 1.0))
    assert l1 < 1e-2


@pytest.mark.parametrize("p", [1.5, 2.0, 3.0, 4.0])
def test_operator_homogeneity(p):
    d = rectangle(1.0, 1.0, 12)
    u = d.restrict(d.sample(lambda x, y: np.sin(np.pi * x) * y * (1 - y) + 0.1 * x * y))
    base = apply_p_laplacian(u, p, d)
    for t in (0.5, 3.0):
        np.testing.assert_allclose(apply_p_laplacian(t * u, p, d), t ** (p - 1) * base,
                                   rtol=1e-12, atol=1e-12 * np.abs(base).max())


def test_zero_data_gives_zero():
    d = interval(1.0, 64)
    for p in (1.5, 3.0):
        assert np.all(solve_dirichlet(d, p, d.zeros()) == 0.0)


def test_p2_manufactured_solution():
    d = interval(1.0, 256)
    u = solve_dirichlet(d, 2.0, np.pi ** 2 * sine(d))
    assert np.max(np.abs(u - sine(d))) < 1e-3


def test_p2_grid_convergence():
    errs = []
    for n in (32, 64, 128):
        d = interval(1.0, n)
        errs.append(np.max(np.abs(solve_dirichlet(d, 2.0, np.pi ** 2 * sine(d)) - sine(d))))
    assert errs[0] / errs[1] >= 3 and errs[1] / errs[2] >= 3


@pytest.mark.parametrize("p", [1.5, 2.0, 3.0, 4.0])
def test_torsion_closed_form(p):
    d = interval(1.0, 256)
    f = d.restrict(np.ones(d.n_nodes))
    info = SolveInfo()
    u = solve_dirichlet(d, p, f, info=info)
    assert u.max() == pytest.approx(oracles.torsion_max_1d(p), rel=1e-2)
    assert info.residual <= 1e-10 * (1 + 1)
    e = np.asarray(info.energies)
    assert p == 2.0 or np.all(np.diff(e) <= 1e-12 * np.abs(e).max())


def test_p3_torsion_value():
    d = interval(1.0, 256)
    u = solve_dirichlet(d, 3.0, d.restrict(np.ones(d.n_nodes)))
    assert u.max() == pytest.approx(0.23570, rel=1e-2)


@pytest.mark.parametrize("p", [1.5, 3.0])
def test_residual_contract(p):
    d = rectangle(1.0, 1.0, 16)
    f = d.restrict(d.sample(lambda x, y: 1 + x * y))
    u = solve_dirichlet(d, p, f)
    res = np.max(np.abs(apply_p_laplacian(u, p, d) - f)[d.interior])
    assert res <= 1e-10 * (1 + f.max())


def test_newton_agrees_with_direct_solve_at_p2():
    d = rectangle(1.0, 1.0, 16)
    f = d.restrict(d.sample(lambda x, y: np.exp(x) * (1 + y)))
    direct = solve_dirichlet(d, 2.0, f)
    newton = solve_dirichlet(d, 2.0, f, SolveOptions(direct_linear=False))
    assert np.max(np.abs(newton - direct)) <= 1e-10 * np.max(np.abs(direct))


def test_energy_examples():
    d = interval(1.0, 512)
    assert energy(d.zeros(), np.ones(d.n_nodes), 3.0, d) == 0.0
    assert energy(sine(d), d.zeros(), 2.0, d) == pytest.approx(np.pi ** 2 / 4, rel=5e-3)
    for p in (1.5, 3.0):
        assert energy(2 * sine(d), d.zeros(), p, d) == pytest.approx(
            2 ** p * energy(sine(d), d.zeros(), p, d), rel=1e-14)


def test_weighted_rhs_examples():
    d = interval(1.0, 256)
    assert np.all(solve_weighted_rhs(d, 2.0, d.zeros(), 1.0, sine(d)) == 0.0)
    u = solve_weighted_rhs(d, 2.0, np.ones(d.n_nodes), 1.0, sine(d))
    assert np.max(np.abs(u - sine(d) / np.pi ** 2)) < 1e-3


def test_weighted_rhs_signed_power_at_zero():
    assert signed_power(np.array([0.0, -4.0, 9.0]), 0.5).tolist() == [0.0, -2.0, 3.0]


def test_weighted_rhs_nonnegative():
    d = interval(1.0, 64)
    u = solve_weighted_rhs(d, 1.5, np.ones(d.n_nodes), 0.5, sine(d), 0.2 * sine(d))
    assert u.min() >= 0.0


@pytest.mark.parametrize("p", [1.5, 2.0, 3.0])
def test_scalar_comparison(p, rng):
    d = interval(1.0, 64)
    f = d.restrict(rng.uniform(0, 1, d.n_nodes))
    g = f + d.restrict(rng.uniform(0, 1, d.n_nodes))
    uf, ug = solve_dirichlet(d, p, f), solve_dirichlet(d, p, g)
    assert uf.min() >= -1e-8 * uf.max()
    assert np.all(uf <= ug + 1e-8 * ug.max())


def test_warm_start_matches_cold():
    d = interval(1.0, 128)
    f = d.restrict(np.ones(d.n_nodes))
    cold = solve_dirichlet(d, 3.0, f)
    warm = solve_dirichlet(d, 3.0, f, u0=0.9 * cold)
    assert np.max(np.abs(cold - warm)) < 1e-9 * cold.max()


def test_nonconvergence_reports_residual():
    d = interval(1.0, 64)
    f = d.restrict(np.ones(d.n_nodes))
    with pytest.raises(ConvergenceError) as err:
        solve_dirichlet(d, 4.0, f, SolveOptions(max_newton_iters=1, eps_schedule=(0.0,)))
    assert err.value.residual > 0


@pytest.mark.parametrize("kw", [dict(eps_schedule=(1e-2, 1e-2)), dict(eps_schedule=(-1.0,)),
                                dict(newton_tol=0.0), dict(backtrack=1.5)])
def test_bad_options(kw):
    with pytest.raises(ConfigError):
        SolveOptions(**kw)
