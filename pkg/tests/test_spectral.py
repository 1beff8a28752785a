import math

import numpy as np
import pytest
import sympy as sp

import oracles
from plapmp import (ConfigError, ConvergenceError, ExponentConfig, WeightPair, composed_map,
                    cone_membership, curve_point, eigen_residuals, eigenpair_at, interval,
                    principal_curve, rectangle)
from plapmp.spectral import curve_point_mu, curve_value, ray_point

PI4 = math.pi ** 4


def test_exponent_config_derived():
    cfg = ExponentConfig(3.0, 1.5, 2.0, 0.5)
    assert cfg.r * cfg.s == pytest.approx((cfg.p - 1) * (cfg.q - 1), rel=1e-12)
    assert cfg.omega == pytest.approx(cfg.beta2 / (cfg.q - 1), rel=1e-12)
    assert ExponentConfig.symmetric(2.0).as_dict() == {"p": 2.0, "q": 2.0, "beta1": 1.0,
                                                       "beta2": 1.0}


@pytest.mark.parametrize("args", [(2, 2, 1, 2), (1.0, 2, 1, 1), (2, 2, -1, -1), (2, 3, 0, 2)])
def test_exponent_config_rejects(args):
    with pytest.raises(ConfigError):
        ExponentConfig(*args)


def test_kappa_identity_symbolic():
    # S(phi) = kappa phi with psi = mu1^(1/(q-1)) w gives kappa = (lam1 mu1^(r/s))^(-1/(p-1));
    # on the curve lam1^(1/r) mu1^(1/s) = Lambda' this equals Lambda'^(-r/(p-1)).
    lam, mu, lp = sp.symbols("lam mu Lp", positive=True)
    p = q = 2
    b1 = b2 = 1
    r = sp.sqrt(b1 * (p - 1))
    s = sp.sqrt(b2 * (q - 1))
    # -Delta phi = lam psi = lam mu w, so z = S(phi) = phi / (lam mu) and kappa = 1/(lam mu)
    kappa = 1 / (lam * mu ** sp.Rational(b1, q - 1))
    assert sp.simplify(kappa - (lam * mu ** (r / s)) ** (-sp.Rational(1, p - 1))) == 0
    mu_curve = (lp / lam ** (1 / r)) ** s
    assert sp.simplify(kappa.subs(mu, mu_curve) - lp ** (-r / (p - 1))) == 0


def test_kappa_identity_general_exponents():
    # r/s = beta1/(q-1) follows from beta1 beta2 = (p-1)(q-1)
    for cfg in (ExponentConfig(3.0, 1.5, 2.0, 0.5), ExponentConfig(1.5, 3.0, 0.25, 4.0)):
        assert cfg.r / cfg.s == pytest.approx(cfg.beta1 / (cfg.q - 1), rel=1e-12)


def test_weight_pair_validation():
    d = interval(1.0, 16)
    with pytest.raises(ConfigError):
        WeightPair(np.zeros(d.n_nodes), np.ones(d.n_nodes), d)
    with pytest.raises(ConfigError):
        WeightPair(np.ones(3), np.ones(d.n_nodes), d)
    w = WeightPair(d.sample(lambda x: 1 + x), np.ones(d.n_nodes), d)
    assert w.sup_a == pytest.approx(2.0) and w.min_a > 1.0


def test_continuity_proxy_rejects_jump():
    d = interval(1.0, 16)
    a = np.where(d.coords[:, 0] < 0.5, 1.0, 3.0)
    with pytest.raises(ConfigError):
        WeightPair(a, np.ones(d.n_nodes), d).check_continuity()
    WeightPair(d.sample(lambda x: 1 + x), np.ones(d.n_nodes), d).check_continuity()


def test_composed_map_on_sine():
    d = interval(1.0, 256)
    cfg = ExponentConfig.symmetric(2.0)
    u = d.restrict(d.sample(lambda x: np.sin(np.pi * x)))
    z, w = composed_map(u, cfg, WeightPair.constant(d), d)
    assert np.max(np.abs(w - u / math.pi ** 2)) < 1e-3
    assert np.max(np.abs(z - u / PI4)) < 1e-3


def test_curve_point_examples():
    cfg = ExponentConfig.symmetric(2.0)
    assert curve_point(PI4, cfg, math.pi ** 2)[1] == pytest.approx(math.pi ** 2, rel=1e-12)
    assert curve_point(PI4, cfg, 1.0)[1] == pytest.approx(PI4, rel=1e-12)
    with pytest.raises(ConfigError):
        curve_point(PI4, cfg, 0.0)


@pytest.mark.parametrize("cfg", [ExponentConfig.symmetric(2.0), ExponentConfig(3.0, 1.5, 2.0, 0.5),
                                 ExponentConfig(1.5, 3.0, 0.25, 4.0)])
def test_curve_round_trips(cfg):
    lp = 123.4
    for lam in (0.1, 2.0, 50.0):
        assert curve_value(*curve_point(lp, cfg, lam), cfg) == pytest.approx(lp, rel=1e-12)
        assert curve_value(*curve_point_mu(lp, cfg, lam), cfg) == pytest.approx(lp, rel=1e-12)
    lam1, mu1 = ray_point(lp, cfg, 3.0, 7.0)
    assert mu1 / lam1 == pytest.approx(7.0 / 3.0, rel=1e-12)
    assert curve_value(lam1, mu1, cfg) == pytest.approx(lp, rel=1e-12)


def test_interval_p2_lambda_prime(eig_p2):
    assert eig_p2.lambda_prime == pytest.approx(PI4, rel=5e-3)
    assert eig_p2.lam1 == pytest.approx(eig_p2.mu1)


def test_eigenfunction_is_sine(eig_p2, unit_interval):
    d = unit_interval
    s = d.restrict(d.sample(lambda x: np.sin(np.pi * x)))
    assert np.max(np.abs(eig_p2.phi - s)) < 1e-3
    assert np.max(np.abs(eig_p2.psi / eig_p2.psi.max() - s)) < 1e-3


def test_square_lambda_prime():
    d = rectangle(1.0, 1.0, 32)
    eig = principal_curve(d, ExponentConfig.symmetric(2.0), WeightPair.constant(d))
    assert eig.lambda_prime == pytest.approx(4 * PI4, rel=1e-2)


def test_p3_lambda_prime_matches_shooting(eig_p3):
    _, _, eig = eig_p3
    assert eig.lambda_prime == pytest.approx(oracles.SHOOTING_P3, rel=1e-2)


def test_p15_lambda_prime_matches_shooting():
    # beta = 1/2 gives r = s = 1/2 and Lambda' = lam^4 for the scalar eigenvalue lam
    d = interval(1.0, 256)
    eig = principal_curve(d, ExponentConfig.symmetric(1.5), WeightPair.constant(d))
    assert eig.lambda_prime == pytest.approx(oracles.SHOOTING_P15 ** 4, rel=2e-2)


@pytest.mark.parametrize("cfg", [ExponentConfig.symmetric(2.0), ExponentConfig.symmetric(3.0),
                                 ExponentConfig(3.0, 1.5, 2.0, 0.5),
                                 ExponentConfig(1.5, 3.0, 0.25, 4.0)])
def test_eigenpair_residuals_and_cone(cfg):
    d = interval(1.0, 128)
    w = WeightPair(d.sample(lambda x: 1 + 0.5 * np.sin(np.pi * x)), np.ones(d.n_nodes), d)
    eig = principal_curve(d, cfg, w)
    assert np.max(eig.phi) == pytest.approx(1.0)
    for lam1 in (eig.lam1, 0.3 * eig.lam1, 4.0 * eig.lam1):
        lam1, mu1 = curve_point(eig.lambda_prime, cfg, lam1)
        phi, psi = eigenpair_at(eig, cfg, lam1)
        assert max(eigen_residuals(phi, psi, lam1, mu1, cfg, w, d)) < 1e-6
        assert cone_membership(phi, psi, d)
    assert curve_value(eig.lam1, eig.mu1, cfg) == pytest.approx(eig.lambda_prime, rel=1e-12)


def test_kappa_history_cauchy(eig_p3):
    _, _, eig = eig_p3
    k = np.asarray(eig.kappa_history)
    assert abs(k[-1] - k[-2]) < 1e-8 * k[-1]


def test_grid_stability():
    cfg = ExponentConfig.symmetric(3.0)
    vals = []
    for n in (128, 256):
        d = interval(1.0, n)
        vals.append(principal_curve(d, cfg, WeightPair.constant(d)).lambda_prime)
    assert abs(vals[0] - vals[1]) < 1e-2 * vals[1]


def test_domain_monotonicity():
    cfg = ExponentConfig(3.0, 1.5, 2.0, 0.5)
    lps = []
    for L in (1.0, 0.5):
        d = interval(L, 128)
        lps.append(principal_curve(d, cfg, WeightPair.constant(d)).lambda_prime)
    assert lps[1] > lps[0]


def test_bad_start_rejected():
    d = interval(1.0, 16)
    with pytest.raises(ConfigError):
        principal_curve(d, ExponentConfig.symmetric(2.0), WeightPair.constant(d), start=d.zeros())


def test_iteration_budget_reported():
    d = interval(1.0, 32)
    with pytest.raises(ConvergenceError) as err:
        principal_curve(d, ExponentConfig.symmetric(2.0), WeightPair.constant(d), max_iter=2)
    assert len(err.value.history) == 2
