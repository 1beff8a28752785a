"""Discrete p-Laplacian and the scalar Dirichlet solver.

The discrete problem -Delta_p u = f, u = 0 on the boundary, is the Euler-Lagrange
equation of the convex energy

    J(u) = (1/p) sum_e |T_e| |grad u_e|^p  -  sum_i m_i f_i u_i

over piecewise-linear fields (``m_i`` are lumped nodal masses). Its unique
minimizer is found by damped Newton on the regularized energy in which
``|g|^p`` is replaced by ``(eps^2 + |g|^2)^(p/2)``, continuing eps down a
schedule that ends at 0 (p >= 2) or at a tiny floor (p < 2, where the flux
|g|^(p-2) g is not Lipschitz at the origin and roundoff alone would stall Newton).

Residual fields are the energy gradient divided by the lumped mass, so
``apply_p_laplacian(u, p) - f`` is the pointwise discrete residual.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import ConfigError, ConvergenceError
from .geometry import Domain

# final regularization: exact operator for p >= 2, a floor where |g|^(p-2) is singular
SINGULAR_EPS = 1e-8
ROUNDOFF_FACTOR = 8.0


def default_schedule(p: float) -> tuple:
    return (1e-2, 1e-4, 1e-6, 0.0 if p >= 2 else SINGULAR_EPS)


def operator_eps(p: float, opts: "SolveOptions | None" = None) -> float:
    """Regularization of the discrete operator whose residual a solve drives to zero."""
    if opts is not None and opts.eps_schedule is not None:
        return opts.eps_schedule[-1]
    return default_schedule(p)[-1]


@dataclass(frozen=True)
class SolveOptions:
    eps_schedule: tuple | None = None   # None: default_schedule(p)
    newton_tol: float = 1e-10
    stage_tol: float = 1e-6       # residual target for the intermediate eps stages
    max_newton_iters: int = 200
    armijo: float = 1e-4
    backtrack: float = 0.5
    max_backtracks: int = 50
    direct_linear: bool = True    # p == 2: one cached sparse factorization instead of Newton

    def __post_init__(self):
        if self.eps_schedule is None:
            eps = None
        else:
            eps = tuple(float(e) for e in self.eps_schedule)
        if eps is not None:
            self._check_schedule(eps)
        if self.newton_tol <= 0 or self.stage_tol <= 0:
            raise ConfigError("tolerances must be positive")
        if not (0 < self.backtrack < 1) or not (0 < self.armijo < 1):
            raise ConfigError("line-search parameters must lie in (0, 1)")
        object.__setattr__(self, "eps_schedule", eps)

    @staticmethod
    def _check_schedule(eps):
        if not eps or any(e < 0 for e in eps):
            raise ConfigError("eps_schedule must be non-empty and nonnegative")
        if any(b >= a for a, b in zip(eps, eps[1:])):
            raise ConfigError("eps_schedule must be strictly decreasing")

    def schedule(self, p: float) -> tuple:
        return self.eps_schedule if self.eps_schedule is not None else default_schedule(p)


@dataclass
class SolveInfo:
    residual: float = np.nan
    newton_iters: int = 0
    energies: list = field(default_factory=list)


def signed_power(x, beta: float) -> np.ndarray:
    """sgn(x)|x|^beta, defined as 0 at x = 0 for every beta > 0."""
    x = np.asarray(x, dtype=float)
    return np.sign(x) * np.abs(x) ** beta


def _check_p(p: float) -> None:
    if not p > 1:
        raise ConfigError(f"exponent must exceed 1, got {p}")


def _gradients(domain: Domain, u):
    return [G @ u for G in domain.mesh.grads]


def _flux_weight(gsq, p, eps):
    """(eps^2 + |g|^2)^((p-2)/2), with the limit 0 used where both vanish."""
    s = eps * eps + gsq
    with np.errstate(divide="ignore", invalid="ignore"):
        w = np.where(s > 0, s ** (0.5 * (p - 2.0)), 0.0)
    return w


def _energy_gradient(domain: Domain, u, p, eps):
    """Full-length gradient of (1/p) sum |T| (eps^2+|g|^2)^(p/2) with respect to u."""
    mesh = domain.mesh
    g = _gradients(domain, u)
    gsq = sum(gk * gk for gk in g)
    w = mesh.areas * _flux_weight(gsq, p, eps)
    return sum(G.T @ (w * gk) for G, gk in zip(mesh.grads, g))


def gradient_scale(u, domain: Domain) -> float:
    """max_e |grad u_e|; the unit in which the regularization eps is measured."""
    g = _gradients(domain, np.asarray(u, dtype=float))
    gsq = sum(gk * gk for gk in g)
    return float(np.sqrt(gsq.max())) if gsq.size else 0.0


def apply_p_laplacian(u, p: float, domain: Domain, eps: float | None = None) -> np.ndarray:
    """Discrete -Delta_p u at interior nodes (zero elsewhere).

    Flux form: in 1D the cell fluxes |Du|^(p-2) Du are differenced; in 2D the
    piecewise-linear stiffness form is divided by the lumped mass.

    ``eps`` is relative: the flux uses (eps^2 S^2 + |g|^2)^((p-2)/2) g with
    S = gradient_scale(u), which keeps the operator exactly (p-1)-homogeneous.
    ``eps=None`` uses the value the solver converges to (0 for p >= 2).
    """
    _check_p(p)
    eps = operator_eps(p) if eps is None else eps
    u = np.asarray(u, dtype=float)
    out = np.zeros(domain.n_nodes)
    idx = domain.interior
    eps_abs = eps * gradient_scale(u, domain) if eps > 0 else 0.0
    out[idx] = _energy_gradient(domain, u, p, eps_abs)[idx] / domain.mesh.mass[idx]
    return out


def energy(u, f, p: float, domain: Domain, eps: float = 0.0) -> float:
    """J(u) = (1/p) int |grad u|^p - int f u (element / lumped quadrature).

    ``eps`` here is absolute; it is the regularized energy Newton descends on.
    """
    _check_p(p)
    u = np.asarray(u, dtype=float)
    f = np.asarray(f, dtype=float)
    mesh = domain.mesh
    g = _gradients(domain, u)
    gsq = sum(gk * gk for gk in g)
    idx = domain.interior
    return float(np.dot(mesh.areas, (eps * eps + gsq) ** (0.5 * p)) / p
                 - np.dot(mesh.mass[idx] * f[idx], u[idx]))


def _hessian(domain: Domain, u, p, eps):
    mesh = domain.mesh
    idx = domain.interior
    g = _gradients(domain, u)
    gsq = sum(gk * gk for gk in g)
    s = eps * eps + gsq
    # floor keeps the Newton matrix finite (p < 2) and nonsingular (p > 2) where grad u = 0
    smax = float(s.max()) if s.size else 0.0
    s = np.maximum(s, max(smax * 1e-24, 1e-300))
    sig = s ** (0.5 * (p - 2.0))
    tau = (p - 2.0) * s ** (0.5 * (p - 4.0))
    Gs = [G[:, idx] for G in mesh.grads]
    H = None
    for k, Gk in enumerate(Gs):
        for l, Gl in enumerate(Gs):
            d = tau * g[k] * g[l]
            if k == l:
                d = d + sig
            term = Gk.T @ sp.diags(mesh.areas * d) @ Gl
            H = term if H is None else H + term
    return H.tocsc()


def _laplace_factor(domain: Domain):
    lu = domain._cache.get("laplace_lu")
    if lu is None:
        idx = domain.interior
        K = None
        for G in domain.mesh.grads:
            Gi = G[:, idx]
            term = Gi.T @ sp.diags(domain.mesh.areas) @ Gi
            K = term if K is None else K + term
        lu = spla.splu(K.tocsc())
        domain._cache["laplace_lu"] = lu
    return lu


def _residual_norm(domain, u, f, p, eps):
    idx = domain.interior
    r = _energy_gradient(domain, u, p, eps)[idx] / domain.mesh.mass[idx] - f[idx]
    return float(np.max(np.abs(r))) if r.size else 0.0


def solve_dirichlet(domain: Domain, p: float, f, opts: SolveOptions | None = None,
                    u0=None, info: SolveInfo | None = None) -> np.ndarray:
    """Unique solution of -Delta_p u = f with u = 0 on the boundary.

    ``u0`` is an optional warm start; with one, only the final eps stage runs
    (falling back to the full schedule if that stage fails).
    Raises ConvergenceError carrying the last residual when Newton stalls.
    """
    _check_p(p)
    opts = opts or SolveOptions()
    f = np.asarray(f, dtype=float)
    if f.shape != (domain.n_nodes,):
        raise ConfigError(f"source has shape {f.shape}, expected ({domain.n_nodes},)")
    if not np.all(np.isfinite(f)):
        raise ConfigError("source must be finite")
    info = info if info is not None else SolveInfo()
    idx = domain.interior
    fnorm = float(np.max(np.abs(f[idx]))) if idx.size else 0.0
    u = domain.zeros()
    if fnorm == 0.0:
        info.residual = 0.0
        return u
    target = opts.newton_tol * fnorm

    if p == 2.0 and opts.direct_linear:
        u[idx] = _laplace_factor(domain).solve(domain.mesh.mass[idx] * f[idx])
        info.residual = _residual_norm(domain, u, f, p, 0.0)
        if info.residual > target:
            raise ConvergenceError("linear solve missed tolerance", info.residual)
        return u

    stages = list(opts.schedule(p))
    # a priori gradient bound: |flux| <= |f|_inf * diam in 1D
    prior = (fnorm * domain.diameter()) ** (1.0 / (p - 1.0))
    if u0 is not None and np.any(np.asarray(u0)[idx] != 0):
        u[idx] = np.asarray(u0, dtype=float)[idx]
        try:
            return _final_stage(domain, p, f, u, stages[-1], target, opts, info, prior)
        except ConvergenceError:
            u = domain.zeros()
    for eps in stages[:-1]:
        scale = gradient_scale(u, domain) or prior
        u = _newton(domain, p, f, u, eps * scale, max(target, opts.stage_tol * fnorm), opts, info)
    return _final_stage(domain, p, f, u, stages[-1], target, opts, info, prior)


def _final_stage(domain, p, f, u, eps, target, opts, info, prior, max_refresh=20):
    """Newton at the final eps, refreshing the gradient scale until it is self-consistent."""
    if eps == 0:
        return _newton(domain, p, f, u, 0.0, target, opts, info)
    scale = gradient_scale(u, domain) or prior
    for _ in range(max_refresh):
        u = _newton(domain, p, f, u, eps * scale, target, opts, info)
        new_scale = gradient_scale(u, domain)
        if abs(new_scale - scale) <= 1e-14 * new_scale:
            return u
        scale = new_scale
    raise ConvergenceError("gradient scale did not settle", info.residual, info.energies)


def _newton(domain, p, f, u, eps, tol, opts, info):
    idx = domain.interior
    m = domain.mesh.mass[idx]
    rhs = m * f[idx]
    u = u.copy()
    E = energy(u, f, p, domain, eps)
    for it in range(opts.max_newton_iters):
        grad = _energy_gradient(domain, u, p, eps)[idx] - rhs
        res = float(np.max(np.abs(grad / m)))
        info.residual = res
        if res <= tol:
            return u
        H = _hessian(domain, u, p, eps)
        # below this the residual is dominated by roundoff in u and cannot be reduced
        floor = ROUNDOFF_FACTOR * np.finfo(float).eps * float(
            np.max((abs(H) @ np.abs(u[idx]) + np.abs(rhs)) / m))
        if res <= floor:
            return u
        try:
            d = spla.spsolve(H, -grad)
        except RuntimeError as exc:  # singular factorization
            raise ConvergenceError(f"Newton matrix singular: {exc}", res, info.energies) from None
        slope = float(np.dot(grad, d))
        if not np.isfinite(slope) or slope >= 0:
            d = -grad / m
            slope = float(np.dot(grad, d))
        t = 1.0
        noise = 64 * np.finfo(float).eps * (abs(E) + float(np.dot(np.abs(rhs), np.abs(u[idx]))) + 1e-300)
        for _ in range(opts.max_backtracks):
            trial = u.copy()
            trial[idx] += t * d
            E_new = energy(trial, f, p, domain, eps)
            if E_new <= E + opts.armijo * t * slope:
                break
            # at roundoff level the energy stops resolving progress; fall back to the residual
            if abs(E_new - E) <= noise and _residual_norm(domain, trial, f, p, eps) < res:
                break
            t *= opts.backtrack
        else:
            raise ConvergenceError("line search failed", res, info.energies)
        u = trial
        E = E_new
        info.energies.append(E)
        info.newton_iters += 1
    raise ConvergenceError(f"Newton did not converge in {opts.max_newton_iters} iterations "
                           f"(eps={eps})", info.residual, info.energies)


def solve_weighted_rhs(domain: Domain, p: float, coeff, power: float, arg, source=None,
                       opts: SolveOptions | None = None, u0=None) -> np.ndarray:
    """Solve -Delta_p u = coeff * sgn(arg)|arg|^power + source."""
    if not power > 0:
        raise ConfigError("power must be positive")
    rhs = np.asarray(coeff, dtype=float) * signed_power(arg, power)
    if source is not None:
        rhs = rhs + np.asarray(source, dtype=float)
    return solve_dirichlet(domain, p, rhs, opts, u0=u0)
