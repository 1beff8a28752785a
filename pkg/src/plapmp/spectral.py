"""Principal curve constant and positive eigenpair of the coupled system.

The eigenvalue problem

    -Delta_p phi = lam a psi^beta1,   -Delta_q psi = mu b phi^beta2

is reduced to a fixed point of the composed map ``S``: solve
``-Delta_q w = b u^beta2`` then ``-Delta_p z = a w^beta1``. Because
``beta1 * beta2 = (p-1)(q-1)`` the map is positively homogeneous of degree 1,
so normalized power iteration ``u <- S(u) / |S(u)|_inf`` converges to the
positive eigenfunction with growth factor ``kappa``. Substituting
``psi = mu^(1/(q-1)) w`` into the first equation gives

    kappa = (lam * mu^(r/s))^(-1/(p-1)) = Lambda'^(-r/(p-1)),

which fixes the curve constant as ``Lambda' = kappa^(-(p-1)/r)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, ConvergenceError
from .geometry import Domain
from .pde_core import SolveOptions, apply_p_laplacian, solve_dirichlet

COMPAT_TOL = 1e-12


@dataclass(frozen=True)
class ExponentConfig:
    p: float
    q: float
    beta1: float
    beta2: float

    def __post_init__(self):
        for name in ("p", "q"):
            if not getattr(self, name) > 1:
                raise ConfigError(f"{name} must exceed 1")
        for name in ("beta1", "beta2"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive")
        target = (self.p - 1) * (self.q - 1)
        if abs(self.beta1 * self.beta2 - target) > COMPAT_TOL * max(1.0, target):
            raise ConfigError(f"beta1*beta2 = {self.beta1 * self.beta2} but (p-1)(q-1) = {target}")

    @property
    def r(self) -> float:
        return math.sqrt(self.beta1 * (self.p - 1))

    @property
    def s(self) -> float:
        return math.sqrt(self.beta2 * (self.q - 1))

    @property
    def omega(self) -> float:
        """Cross-scaling exponent: (t u, t^omega v) keeps both equations homogeneous."""
        return (self.p - 1) / self.beta1

    @classmethod
    def symmetric(cls, p: float, q: float | None = None) -> "ExponentConfig":
        """beta1 = p - 1, beta2 = q - 1."""
        q = p if q is None else q
        return cls(p, q, p - 1.0, q - 1.0)

    def as_dict(self) -> dict:
        return {"p": self.p, "q": self.q, "beta1": self.beta1, "beta2": self.beta2}


@dataclass(frozen=True, eq=False)
class WeightPair:
    a: np.ndarray
    b: np.ndarray
    domain: Domain

    def __post_init__(self):
        for name in ("a", "b"):
            arr = np.asarray(getattr(self, name), dtype=float)
            if arr.shape != (self.domain.n_nodes,):
                raise ConfigError(f"weight {name} has shape {arr.shape}")
            if not np.all(np.isfinite(arr)):
                raise ConfigError(f"weight {name} must be finite")
            if arr[self.domain.interior].min() <= 0:
                raise ConfigError(f"weight {name} must be strictly positive in the interior")
            object.__setattr__(self, name, arr)

    @classmethod
    def constant(cls, domain: Domain, a: float = 1.0, b: float = 1.0) -> "WeightPair":
        return cls(np.full(domain.n_nodes, float(a)), np.full(domain.n_nodes, float(b)), domain)

    @property
    def sup_a(self) -> float:
        return float(np.abs(self.a[self.domain.closure_mask]).max())

    @property
    def sup_b(self) -> float:
        return float(np.abs(self.b[self.domain.closure_mask]).max())

    @property
    def min_a(self) -> float:
        return float(self.a[self.domain.interior].min())

    @property
    def min_b(self) -> float:
        return float(self.b[self.domain.interior].min())

    def check_continuity(self, max_jump: float = 0.25) -> None:
        """Continuity proxy: neighbouring closure nodes differ by at most max_jump * sup."""
        shape = self.domain.shape
        closure = self.domain.closure_mask.reshape(shape)
        for name, arr, sup in (("a", self.a, self.sup_a), ("b", self.b, self.sup_b)):
            grid = arr.reshape(shape)
            for axis in range(len(shape)):
                diff = np.abs(np.diff(grid, axis=axis))
                both = np.logical_and(*_pairs(closure, axis))
                if diff[both].size and diff[both].max() > max_jump * sup:
                    raise ConfigError(f"weight {name} jumps by {diff[both].max():.3g} "
                                      f"between neighbours (limit {max_jump} * sup)")


def _pairs(mask, axis):
    sl_lo = [slice(None)] * mask.ndim
    sl_hi = [slice(None)] * mask.ndim
    sl_lo[axis] = slice(None, -1)
    sl_hi[axis] = slice(1, None)
    return mask[tuple(sl_lo)], mask[tuple(sl_hi)]


@dataclass
class EigenData:
    """Converged power-iteration output.

    ``phi`` is the normalized fixed point (sup-norm 1) and ``w`` the q-half-step
    that produced it, so ``-Delta_p phi = kappa^(1-p) a w^beta1`` holds up to the
    scalar solver tolerance.
    """

    lambda_prime: float
    kappa: float
    lam1: float
    mu1: float
    phi: np.ndarray
    psi: np.ndarray
    w: np.ndarray
    iterations: int
    kappa_history: list = field(default_factory=list)
    step_history: list = field(default_factory=list)

    def summary(self) -> dict:
        return {
            "lambda_prime": self.lambda_prime,
            "kappa": self.kappa,
            "curve_point": [self.lam1, self.mu1],
            "iterations": self.iterations,
        }


def _positive_power(x, beta):
    return np.clip(x, 0.0, None) ** beta


def composed_map(u, cfg: ExponentConfig, weights: WeightPair, domain: Domain,
                 opts: SolveOptions | None = None, guess=None):
    """(z, w) with -Delta_q w = b u_+^beta2 and -Delta_p z = a w_+^beta1.

    ``guess`` is an optional (z0, w0) warm start for the two solves.
    """
    z0, w0 = guess if guess is not None else (None, None)
    w = solve_dirichlet(domain, cfg.q, weights.b * _positive_power(u, cfg.beta2), opts, u0=w0)
    z = solve_dirichlet(domain, cfg.p, weights.a * _positive_power(w, cfg.beta1), opts, u0=z0)
    return z, w


def curve_point(lambda_prime: float, cfg: ExponentConfig, lam: float) -> tuple:
    """The point (lam, mu) on the principal curve with first coordinate lam."""
    if not lam > 0:
        raise ConfigError("lam must be positive")
    mu = (lambda_prime / lam ** (1.0 / cfg.r)) ** cfg.s
    return lam, mu


def curve_point_mu(lambda_prime: float, cfg: ExponentConfig, mu: float) -> tuple:
    """The point (lam, mu) on the principal curve with second coordinate mu."""
    if not mu > 0:
        raise ConfigError("mu must be positive")
    lam = (lambda_prime / mu ** (1.0 / cfg.s)) ** cfg.r
    return lam, mu


def curve_value(lam: float, mu: float, cfg: ExponentConfig) -> float:
    """lam^(1/r) mu^(1/s); equals Lambda' exactly on the principal curve."""
    return lam ** (1.0 / cfg.r) * mu ** (1.0 / cfg.s)


def ray_point(lambda_prime: float, cfg: ExponentConfig, lam: float, mu: float) -> tuple:
    """Curve point (lam1, mu1) on the ray through (lam, mu), i.e. mu1/lam1 = mu/lam."""
    if not (lam > 0 and mu > 0):
        raise ConfigError("ray_point needs lam, mu > 0")
    r, s = cfg.r, cfg.s
    lam1 = (lambda_prime * (lam / mu) ** (1.0 / s)) ** (r * s / (r + s))
    return lam1, lam1 * (mu / lam)


def principal_curve(domain: Domain, cfg: ExponentConfig, weights: WeightPair,
                    opts: SolveOptions | None = None, start=None, max_iter: int = 500,
                    kappa_tol: float = 1e-8, step_tol: float = 1e-11) -> EigenData:
    """Power iteration for Lambda' and the positive eigenpair.

    Stops once both the relative change of kappa is below ``kappa_tol`` and the
    normalized iterate moves by less than ``step_tol`` in sup-norm.
    """
    u = domain.distance_product() if start is None else domain.restrict(start)
    if np.any(u < 0) or not np.any(u > 0):
        raise ConfigError("start field must be nonnegative and nonzero")
    u = u / u.max()
    kappas, steps = [], []
    guess = None
    for k in range(1, max_iter + 1):
        z, w = composed_map(u, cfg, weights, domain, opts, guess=guess)
        kappa = float(z.max())
        if not kappa > 0:
            raise ConvergenceError("composed map collapsed to zero", history=kappas)
        u_new = z / kappa
        step = float(np.max(np.abs(u_new - u)))
        kappas.append(kappa)
        steps.append(step)
        guess = (z, w)
        done = (len(kappas) > 1 and abs(kappas[-1] - kappas[-2]) < kappa_tol * kappa
                and step < step_tol)
        u = u_new
        if done:
            lp = kappa ** (-(cfg.p - 1) / cfg.r)
            lam1 = lp ** (cfg.r * cfg.s / (cfg.r + cfg.s))
            lam1, mu1 = curve_point(lp, cfg, lam1)
            psi = mu1 ** (1.0 / (cfg.q - 1)) * w
            return EigenData(lp, kappa, lam1, mu1, u, psi, w, k, kappas, steps)
    raise ConvergenceError(f"power iteration did not settle in {max_iter} steps",
                           residual=steps[-1] if steps else float("nan"), history=kappas)


def eigenpair_at(eig: EigenData, cfg: ExponentConfig, lam1: float) -> tuple:
    """Positive eigenpair (phi, psi) for the curve point with first coordinate lam1."""
    lam1, mu1 = curve_point(eig.lambda_prime, cfg, lam1)
    return eig.phi.copy(), mu1 ** (1.0 / (cfg.q - 1)) * eig.w


def eigen_residuals(phi, psi, lam1: float, mu1: float, cfg: ExponentConfig,
                    weights: WeightPair, domain: Domain) -> tuple:
    """Relative sup-norm residuals of both eigen-equations at interior nodes."""
    idx = domain.interior
    lhs1 = apply_p_laplacian(phi, cfg.p, domain)[idx]
    rhs1 = lam1 * weights.a[idx] * _positive_power(psi[idx], cfg.beta1)
    lhs2 = apply_p_laplacian(psi, cfg.q, domain)[idx]
    rhs2 = mu1 * weights.b[idx] * _positive_power(phi[idx], cfg.beta2)
    r1 = np.max(np.abs(lhs1 - rhs1)) / max(np.max(np.abs(rhs1)), 1e-300)
    r2 = np.max(np.abs(lhs2 - rhs2)) / max(np.max(np.abs(rhs2)), 1e-300)
    return float(r1), float(r2)
