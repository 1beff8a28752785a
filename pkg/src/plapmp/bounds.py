"""Explicit ABP constants, the lower bound on Lambda' and the small-measure threshold.

With r, s as in ``ExponentConfig`` and

    K = c(n,p)^(beta2/s) c(n,q)^(beta1/r) d^(beta2/s + beta1/r) |a|^(1/r) |b|^(1/s),

the curve constant satisfies ``Lambda' >= lb1 = |Omega|^-(1/(ns) + 1/(nr)) / K``.
For lam, mu > 0 the threshold ``eta = [lam^(1/r) mu^(1/s) K]^-(nrs/(r+s))`` is
exactly the measure below which ``lam^(1/r) mu^(1/s) < lb1``, so a domain with
``|Omega| < eta`` puts (lam, mu) strictly under the curve.

Formulas are evaluated with mpmath at 50 digits and rounded once at the end.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from typing import Callable, Sequence

import mpmath
import numpy as np

from .errors import ConfigError, InconsistencyError
from .geometry import Domain
from .spectral import EigenData, ExponentConfig, WeightPair

PRECISION = 50
ABP_SLACK = 0.01


def _mp(x):
    return mpmath.mpf(repr(float(x))) if not isinstance(x, mpmath.mpf) else x


def _ball_volume_mp(n):
    return mpmath.pi ** (mpmath.mpf(n) / 2) / mpmath.gamma(mpmath.mpf(n) / 2 + 1)


def _abp_constant_mp(n, p):
    p = _mp(p)
    base = n * min(mpmath.mpf(1), p - 1) * _ball_volume_mp(n) ** (mpmath.mpf(1) / n)
    return base ** (-1 / (p - 1))


def ball_volume(n: int) -> float:
    """|B_1| in R^n."""
    if n < 1:
        raise ConfigError("dimension must be at least 1")
    with mpmath.workdps(PRECISION):
        return float(_ball_volume_mp(n))


def abp_constant(n: int, p: float) -> float:
    """c(n,p) = (n min{1, p-1} |B_1|^(1/n))^(-1/(p-1))."""
    if n < 1:
        raise ConfigError("dimension must be at least 1")
    if not p > 1:
        raise ConfigError("p must exceed 1")
    with mpmath.workdps(PRECISION):
        return float(_abp_constant_mp(n, p))


@dataclass(frozen=True)
class ABPCheck:
    holds: bool
    sup_u: float
    bound: float

    @property
    def margin(self) -> float:
        """bound / sup|u| (inf when u vanishes)."""
        return self.bound / self.sup_u if self.sup_u > 0 else math.inf


def abp_check_scalar(u, f, domain: Domain, p: float, slack: float = ABP_SLACK) -> ABPCheck:
    """sup|u| <= c(n,p) d |f|^(1/(p-1)) |Omega|^(1/(n(p-1))), with relative ``slack``."""
    n = domain.dim
    sup_u = float(np.max(np.abs(np.asarray(u, dtype=float))))
    fnorm = float(np.max(np.abs(np.asarray(f, dtype=float))))
    with mpmath.workdps(PRECISION):
        pe = _mp(p)
        rhs = (_abp_constant_mp(n, p) * _mp(domain.diameter()) * _mp(fnorm) ** (1 / (pe - 1))
               * _mp(domain.measure()) ** (1 / (n * (pe - 1))))
        bound = float(rhs)
    return ABPCheck(sup_u <= bound * (1 + slack), sup_u, bound)


def _k_factor_mp(domain: Domain, cfg: ExponentConfig, weights: WeightPair):
    n = domain.dim
    r, s = _mp(cfg.r), _mp(cfg.s)
    b1, b2 = _mp(cfg.beta1), _mp(cfg.beta2)
    return (_abp_constant_mp(n, cfg.p) ** (b2 / s) * _abp_constant_mp(n, cfg.q) ** (b1 / r)
            * _mp(domain.diameter()) ** (b2 / s + b1 / r)
            * _mp(weights.sup_a) ** (1 / r) * _mp(weights.sup_b) ** (1 / s))


def lower_bound(domain: Domain, cfg: ExponentConfig, weights: WeightPair) -> float:
    """lb1 <= Lambda'. Weights must pass the continuity proxy."""
    weights.check_continuity()
    n = domain.dim
    with mpmath.workdps(PRECISION):
        r, s = _mp(cfg.r), _mp(cfg.s)
        num = _mp(domain.measure()) ** (-(1 / (n * s) + 1 / (n * r)))
        return float(num / _k_factor_mp(domain, cfg, weights))


def eta(lam: float, mu: float, domain: Domain, cfg: ExponentConfig, weights: WeightPair) -> float:
    """Measure threshold below which (lam, mu) lies under the curve."""
    if not (lam > 0 and mu > 0):
        raise ConfigError("eta needs lam > 0 and mu > 0; axis couples need no threshold")
    weights.check_continuity()
    n = domain.dim
    with mpmath.workdps(PRECISION):
        r, s = _mp(cfg.r), _mp(cfg.s)
        inner = _mp(lam) ** (1 / r) * _mp(mu) ** (1 / s) * _k_factor_mp(domain, cfg, weights)
        return float(inner ** (-(n * r * s) / (r + s)))


@dataclass
class BoundsReport:
    lam: float
    mu: float
    c_p: float
    c_q: float
    lb1: float
    eta: float | None              # None on the axes
    measure: float
    diameter: float
    lambda_prime: float
    region: str
    lb1_ok: bool                   # lb1 <= Lambda'_computed
    small_measure: bool            # |Omega| < eta (always true on the axes)
    consistent: bool               # small_measure implies InteriorRegion, and lb1_ok

    def to_dict(self) -> dict:
        d = asdict(self)
        d["lb1_margin"] = self.lambda_prime - self.lb1
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)

    def require(self) -> "BoundsReport":
        if not self.consistent:
            raise InconsistencyError(f"bounds cross-check failed: {self.to_dict()}")
        return self


def small_measure_guarantee(lam: float, mu: float, domain: Domain, cfg: ExponentConfig,
                            weights: WeightPair, eig: EigenData | float,
                            delta: float = 1e-3) -> BoundsReport:
    """Evaluate lb1 and eta and cross-check them against the computed curve constant."""
    from .principles import INTERIOR, classify

    if lam < 0 or mu < 0:
        raise ConfigError("small-measure guarantee needs lam, mu >= 0")
    lp = float(eig.lambda_prime if isinstance(eig, EigenData) else eig)
    lb = lower_bound(domain, cfg, weights)
    axis = lam == 0 or mu == 0
    th = None if axis else eta(lam, mu, domain, cfg, weights)
    small = axis or domain.measure() < th
    region = classify(lam, mu, lp, cfg, delta).label
    lb_ok = lb <= lp
    consistent = lb_ok and (not small or region == INTERIOR)
    return BoundsReport(
        lam=float(lam), mu=float(mu),
        c_p=abp_constant(domain.dim, cfg.p), c_q=abp_constant(domain.dim, cfg.q),
        lb1=lb, eta=th, measure=domain.measure(), diameter=domain.diameter(),
        lambda_prime=lp, region=region, lb1_ok=lb_ok, small_measure=small,
        consistent=consistent,
    )


@dataclass(frozen=True)
class ShrinkRow:
    L: float
    measure: float
    diameter: float
    lb1: float
    lambda_prime: float
    eta: float


SHRINK_COLUMNS = ("L", "measure", "d", "lb1", "lambda_prime", "eta")


def shrink_study(lengths: Sequence[float],
                 make_case: Callable[[float], tuple],
                 cfg: ExponentConfig,
                 curve: Callable[[Domain, WeightPair], EigenData],
                 lam: float = 1.0, mu: float = 1.0) -> list:
    """lb1, Lambda' and eta(lam, mu) over domains indexed by a length.

    ``make_case(L)`` returns the (domain, weights) pair for length L.
    """
    rows = []
    for L in lengths:
        dom, wts = make_case(L)
        eig = curve(dom, wts)
        rows.append(ShrinkRow(float(L), dom.measure(), dom.diameter(),
                              lower_bound(dom, cfg, wts), eig.lambda_prime,
                              eta(lam, mu, dom, cfg, wts)))
    return rows
