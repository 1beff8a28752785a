"""Region classification, monotone solver and maximum/comparison principle checks.

The couples (lam, mu) for which the weak and strong maximum and comparison
principles hold are exactly

    R1 ∪ {(lam, 0): lam >= 0} ∪ {(0, mu): mu >= 0},
    R1 = {lam, mu > 0 : lam^(1/r) mu^(1/s) < Lambda'}.

Inside that set the inhomogeneous system is solved by monotone iteration
from (0, 0) and the principles are checked on random nonnegative data.
Outside it (and on the curve) an explicit counterexample is built from the
positive eigenpair and certified by its discrete residual.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import CertificationError, ConfigError, ConvergenceError
from .geometry import Domain, boundary_normal_quotient
from .pde_core import SolveOptions, apply_p_laplacian, signed_power, solve_weighted_rhs
from .spectral import (EigenData, ExponentConfig, WeightPair, curve_point, curve_point_mu,
                       curve_value, eigenpair_at, ray_point)

INTERIOR = "InteriorRegion"
ON_CURVE = "OnCurve"
OUTSIDE = "Outside"

RESIDUAL_TOL = 1e-6
MIN_TOL = 1e-8
GROWTH_CAP = 1e6


@dataclass(frozen=True)
class RegionClass:
    label: str
    curve_gap: float | None = None  # lam^(1/r) mu^(1/s) - Lambda' when lam, mu > 0

    @property
    def interior(self) -> bool:
        return self.label == INTERIOR


def _lambda_prime(eig) -> float:
    return float(eig.lambda_prime if isinstance(eig, EigenData) else eig)


def classify(lam: float, mu: float, eig, cfg: ExponentConfig, delta: float = 1e-3) -> RegionClass:
    """Place (lam, mu) relative to the principal curve with a relative band ``delta``.

    ``eig`` is an EigenData or the curve constant itself.
    """
    lp = _lambda_prime(eig)
    if lam < 0 or mu < 0:
        return RegionClass(OUTSIDE)
    if lam == 0 or mu == 0:
        return RegionClass(INTERIOR)
    val = curve_value(lam, mu, cfg)
    gap = val - lp
    if val < lp * (1 - delta):
        return RegionClass(INTERIOR, gap)
    if val > lp * (1 + delta):
        return RegionClass(OUTSIDE, gap)
    return RegionClass(ON_CURVE, gap)


# -- residuals ---------------------------------------------------------------

def system_residual(u, v, f, g, lam, mu, cfg: ExponentConfig, weights: WeightPair,
                    domain: Domain) -> dict:
    """Residuals of -Delta_p u = lam a|v|^(b1-1)v + f, -Delta_q v = mu b|u|^(b2-1)u + g.

    Returns absolute sup-norms, the per-equation scales and their ratio.
    """
    idx = domain.interior
    lhs1 = apply_p_laplacian(u, cfg.p, domain)[idx]
    lhs2 = apply_p_laplacian(v, cfg.q, domain)[idx]
    c1 = lam * weights.a[idx] * signed_power(v[idx], cfg.beta1)
    c2 = mu * weights.b[idx] * signed_power(u[idx], cfg.beta2)
    r1 = float(np.max(np.abs(lhs1 - c1 - f[idx])))
    r2 = float(np.max(np.abs(lhs2 - c2 - g[idx])))
    s1 = max(float(np.max(np.abs(a))) for a in (lhs1, c1, f[idx]))
    s2 = max(float(np.max(np.abs(a))) for a in (lhs2, c2, g[idx]))
    rel = max(r1 / s1 if s1 > 0 else r1, r2 / s2 if s2 > 0 else r2)
    return {"r1": r1, "r2": r2, "scale1": s1, "scale2": s2, "relative": rel}


# -- monotone iteration ------------------------------------------------------

@dataclass
class CoupledSolution:
    u: np.ndarray
    v: np.ndarray
    iterations: int
    residual: dict
    increments: list = field(default_factory=list)
    monotone_defect: float = 0.0   # largest drop u_k - u_{k+1} seen, relative to scale

    def __iter__(self):
        return iter((self.u, self.v))


def solve_coupled(lam, mu, f, g, cfg: ExponentConfig, weights: WeightPair, domain: Domain,
                  opts: SolveOptions | None = None, eig=None, tol: float = 1e-10,
                  max_iter: int = 20000, schedule: str = "gauss-seidel",
                  growth_cap: float = GROWTH_CAP) -> CoupledSolution:
    """Minimal nonnegative solution of the inhomogeneous system by monotone iteration.

    From (u, v) = (0, 0):
      u_{k+1} solves -Delta_p u = lam a v_k^beta1 + f,
      v_{k+1} solves -Delta_q v = mu b u_{k+1}^beta2 + g   ("gauss-seidel")
                  or -Delta_q v = mu b u_k^beta2 + g       ("jacobi").
    If ``eig`` is given, (lam, mu) must classify as InteriorRegion.
    """
    if schedule not in ("gauss-seidel", "jacobi"):
        raise ConfigError(f"unknown schedule {schedule!r}")
    if lam < 0 or mu < 0:
        raise ConfigError("monotone iteration needs lam, mu >= 0")
    if eig is not None and not classify(lam, mu, eig, cfg).interior:
        raise ConfigError(f"({lam}, {mu}) is not in the maximum-principle region")
    f = domain.restrict(f)
    g = domain.restrict(g)
    if f.min() < 0 or g.min() < 0:
        raise ConfigError("data f, g must be nonnegative")
    data_scale = max(float(f.max()), float(g.max()))
    u = domain.zeros()
    v = domain.zeros()
    if data_scale == 0.0:
        res = system_residual(u, v, f, g, lam, mu, cfg, weights, domain)
        return CoupledSolution(u, v, 0, res)
    cap = growth_cap * max(1.0, data_scale)
    increments = []
    defect = 0.0
    for k in range(1, max_iter + 1):
        u_new = solve_weighted_rhs(domain, cfg.p, lam * weights.a, cfg.beta1, v, f, opts, u0=u)
        src = u_new if schedule == "gauss-seidel" else u
        v_new = solve_weighted_rhs(domain, cfg.q, mu * weights.b, cfg.beta2, src, g, opts, u0=v)
        scale = max(float(np.abs(u_new).max()), float(np.abs(v_new).max()), 1e-300)
        if not np.isfinite(scale) or scale > cap:
            raise ConvergenceError("monotone iteration exceeded growth cap: "
                                   "outside region or cap too small", history=increments)
        defect = max(defect, float(np.max(u - u_new)) / scale, float(np.max(v - v_new)) / scale)
        inc = max(float(np.max(np.abs(u_new - u))), float(np.max(np.abs(v_new - v)))) / scale
        increments.append(inc)
        u, v = u_new, v_new
        if inc <= tol:
            res = system_residual(u, v, f, g, lam, mu, cfg, weights, domain)
            return CoupledSolution(u, v, k, res, increments, defect)
    raise ConvergenceError(f"monotone iteration did not converge in {max_iter} steps",
                           residual=increments[-1], history=increments)


# -- reports -----------------------------------------------------------------

@dataclass
class PrincipleReport:
    principle: str
    lam: float
    mu: float
    verdict: str                      # "holds" or "fails"
    witnesses: dict = field(default_factory=dict)
    inputs: dict = field(default_factory=dict)

    @property
    def holds(self) -> bool:
        return self.verdict == "holds"

    def to_dict(self) -> dict:
        return _jsonable(asdict(self))

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    return obj


def _digest(*arrays) -> str:
    h = hashlib.sha256()
    for a in arrays:
        h.update(np.ascontiguousarray(a, dtype=float).tobytes())
    return h.hexdigest()[:16]


def random_data(domain: Domain, rng: np.random.Generator) -> np.ndarray:
    """Nodewise i.i.d. uniform[0, 1] samples after one neighbour-averaging pass."""
    raw = rng.uniform(0.0, 1.0, size=domain.shape)
    sm = raw.copy()
    count = np.ones_like(raw)
    for axis in range(raw.ndim):
        for shift in (1, -1):
            rolled = np.roll(raw, shift, axis=axis)
            valid = np.ones_like(raw)
            edge = [slice(None)] * raw.ndim
            edge[axis] = 0 if shift == 1 else -1
            valid[tuple(edge)] = 0.0
            sm += valid * rolled
            count += valid
    return domain.restrict((sm / count).ravel())


def cone_membership(u, v, domain: Domain) -> bool:
    """Discrete interior-of-positive-cone test: positive inside, negative normal quotients."""
    idx = domain.interior
    if not (np.all(u[idx] > 0) and np.all(v[idx] > 0)):
        return False
    return bool(np.all(boundary_normal_quotient(domain, u) < 0)
                and np.all(boundary_normal_quotient(domain, v) < 0))


def check_wmp_smp(lam, mu, cfg: ExponentConfig, weights: WeightPair, domain: Domain,
                  eig=None, n_samples: int = 10, seed: int = 0, data=None,
                  opts: SolveOptions | None = None, tol: float = MIN_TOL) -> PrincipleReport:
    """Solve the system for nonnegative data and check the weak and strong maximum principles.

    ``data`` overrides the random (f, g) samples with an explicit list of pairs.
    WMP: min u, min v >= -tol * scale. SMP (only when f + g is not identically
    0): for lam, mu > 0 both components lie in the discrete positive cone,
    otherwise at least one is positive inside.
    """
    if eig is not None and not classify(lam, mu, eig, cfg).interior:
        raise ConfigError(f"({lam}, {mu}) is not in the maximum-principle region")
    rng = np.random.default_rng(seed)
    if data is None:
        data = [(random_data(domain, rng), random_data(domain, rng)) for _ in range(n_samples)]
    idx = domain.interior
    samples = []
    ok = True
    for f, g in data:
        f = domain.restrict(f)
        g = domain.restrict(g)
        sol = solve_coupled(lam, mu, f, g, cfg, weights, domain, opts)
        u, v = sol.u, sol.v
        scale = max(float(np.abs(u).max()), float(np.abs(v).max()), 1e-300)
        min_u, min_v = float(u[idx].min()), float(v[idx].min())
        wmp = min_u >= -tol * scale and min_v >= -tol * scale
        nontrivial = bool(np.any(f[idx] + g[idx] > 0))
        if not nontrivial:
            smp = None
        elif lam > 0 and mu > 0:
            smp = cone_membership(u, v, domain)
        else:
            smp = bool(min_u > 0 or min_v > 0)
        rec = {"min_u": min_u, "min_v": min_v, "wmp": wmp, "smp": smp,
               "residual": sol.residual["relative"], "iterations": sol.iterations,
               "data_digest": _digest(f, g)}
        if nontrivial:
            rec["max_flux_u"] = float(boundary_normal_quotient(domain, u).max())
            rec["max_flux_v"] = float(boundary_normal_quotient(domain, v).max())
        samples.append(rec)
        if not wmp or smp is False or sol.residual["relative"] > RESIDUAL_TOL:
            ok = False
    witnesses = {
        "min_u": min(s["min_u"] for s in samples),
        "min_v": min(s["min_v"] for s in samples),
        "max_residual": max(s["residual"] for s in samples),
        "samples": samples,
    }
    return PrincipleReport("WMP/SMP", lam, mu, "holds" if ok else "fails", witnesses,
                           {"seed": seed, "n_samples": len(data), "data": "uniform+smooth"})


def ordered_data(domain: Domain, rng: np.random.Generator):
    """Random quadruple with 0 <= f1 <= f2 and 0 <= g1 <= g2."""
    f1 = random_data(domain, rng)
    g1 = random_data(domain, rng)
    f2 = f1 + random_data(domain, rng) * rng.uniform(0.0, 1.0)
    g2 = g1 + random_data(domain, rng) * rng.uniform(0.0, 1.0)
    return f1, f2, g1, g2


def check_wcp_scp(lam, mu, cfg: ExponentConfig, weights: WeightPair, domain: Domain,
                  eig=None, n_samples: int = 10, seed: int = 0, data=None,
                  opts: SolveOptions | None = None, tol: float = MIN_TOL) -> PrincipleReport:
    """Check u <= z, v <= w for ordered nonnegative data (f1, f2, g1, g2).

    When the data differ and lam, mu > 0 the strict version is also required:
    interior gaps z - u, w - v above ``tol * scale`` and boundary quotients of
    u, v strictly above those of z, w.
    """
    if eig is not None and not classify(lam, mu, eig, cfg).interior:
        raise ConfigError(f"({lam}, {mu}) is not in the comparison-principle region")
    rng = np.random.default_rng(seed)
    if data is None:
        data = [ordered_data(domain, rng) for _ in range(n_samples)]
    idx = domain.interior
    samples = []
    ok = True
    for f1, f2, g1, g2 in data:
        f1, f2, g1, g2 = (domain.restrict(x) for x in (f1, f2, g1, g2))
        if min(f1.min(), g1.min()) < 0 or np.any(f2 < f1) or np.any(g2 < g1):
            raise ConfigError("comparison data must satisfy 0 <= f1 <= f2, 0 <= g1 <= g2")
        s1 = solve_coupled(lam, mu, f1, g1, cfg, weights, domain, opts)
        s2 = solve_coupled(lam, mu, f2, g2, cfg, weights, domain, opts)
        u, v, z, w = s1.u, s1.v, s2.u, s2.v
        scale = max(float(np.abs(a).max()) for a in (u, v, z, w))
        scale = max(scale, 1e-300)
        gap_u = float((z - u)[idx].min())
        gap_v = float((w - v)[idx].min())
        wcp = gap_u >= -tol * scale and gap_v >= -tol * scale
        differ = bool(np.any((f2 + g2 - f1 - g1)[idx] > 0))
        rec = {"gap_u": gap_u, "gap_v": gap_v, "wcp": wcp, "differ": differ,
               "residual": max(s1.residual["relative"], s2.residual["relative"]),
               "data_digest": _digest(f1, f2, g1, g2)}
        if differ and lam > 0 and mu > 0:
            flux_gap_u = boundary_normal_quotient(domain, u) - boundary_normal_quotient(domain, z)
            flux_gap_v = boundary_normal_quotient(domain, v) - boundary_normal_quotient(domain, w)
            scp = (gap_u > tol * scale and gap_v > tol * scale
                   and bool(np.all(flux_gap_u > 0)) and bool(np.all(flux_gap_v > 0)))
            rec.update(scp=scp, min_flux_gap_u=float(flux_gap_u.min()),
                       min_flux_gap_v=float(flux_gap_v.min()))
        elif not differ:
            rec["equal_within"] = max(float(np.abs(z - u).max()), float(np.abs(w - v).max())) / scale
            scp = None
        else:
            scp = bool(gap_u > tol * scale or gap_v > tol * scale)
            rec["scp"] = scp
        samples.append(rec)
        if not wcp or scp is False or rec["residual"] > RESIDUAL_TOL:
            ok = False
    witnesses = {
        "min_gap_u": min(s["gap_u"] for s in samples),
        "min_gap_v": min(s["gap_v"] for s in samples),
        "max_residual": max(s["residual"] for s in samples),
        "samples": samples,
    }
    return PrincipleReport("WCP/SCP", lam, mu, "holds" if ok else "fails", witnesses,
                           {"seed": seed, "n_samples": len(data), "data": "ordered uniform+smooth"})


# -- counterexamples ---------------------------------------------------------

def _pos(x):
    return np.clip(x, 0.0, None)


@dataclass
class Violation:
    """Nonnegative data (f, g) whose solution (u, v) takes negative values."""

    case: str
    lam: float
    mu: float
    lam1: float
    mu1: float
    f: np.ndarray
    g: np.ndarray
    u: np.ndarray
    v: np.ndarray
    residual: dict
    min_u: float
    min_v: float

    def summary(self) -> dict:
        return {"case": self.case, "lam": self.lam, "mu": self.mu, "lam1": self.lam1,
                "mu1": self.mu1, "min_u": self.min_u, "min_v": self.min_v,
                "residual": self.residual["relative"], "f_min": float(self.f.min()),
                "g_min": float(self.g.min())}


def construct_violation(lam, mu, eig: EigenData, cfg: ExponentConfig, weights: WeightPair,
                        domain: Domain, delta: float = 1e-3,
                        max_halvings: int = 60) -> Violation:
    """Certified failure of the weak maximum principle at (lam, mu).

    Cases: (a) lam, mu > 0 on or above the curve -> (-phi, -psi) from the curve
    point on the same ray; (b) lam < 0 -> (-phi, psi); (c) lam >= 0, mu < 0 ->
    (phi, -psi). Data are explicit nonnegative multiples of a psi^beta1 and
    b phi^beta2. Raises CertificationError if the residual check fails.
    """
    if classify(lam, mu, eig, cfg, delta).interior:
        raise ConfigError(f"({lam}, {mu}) lies in the maximum-principle region")
    lp = eig.lambda_prime
    a, b = weights.a, weights.b
    if lam < 0:
        case = "b"
        lam1 = -lam / 2.0
        for _ in range(max_halvings):
            mu1 = curve_point(lp, cfg, lam1)[1]
            if mu > -mu1:
                break
            lam1 /= 2.0
        else:
            raise CertificationError("no curve point with mu > -mu1 within halving budget")
        phi, psi = eigenpair_at(eig, cfg, lam1)
        u, v = -phi, psi
        f = max(-(lam + lam1), 0.0) * a * _pos(psi) ** cfg.beta1
        g = max(mu + mu1, 0.0) * b * _pos(phi) ** cfg.beta2
    elif mu < 0:
        case = "c"
        mu1 = -mu / 2.0
        for _ in range(max_halvings):
            lam1 = curve_point_mu(lp, cfg, mu1)[0]
            if lam > -lam1:
                break
            mu1 /= 2.0
        else:
            raise CertificationError("no curve point with lam > -lam1 within halving budget")
        phi, psi = eigenpair_at(eig, cfg, lam1)
        u, v = phi, -psi
        f = max(lam + lam1, 0.0) * a * _pos(psi) ** cfg.beta1
        g = max(-(mu + mu1), 0.0) * b * _pos(phi) ** cfg.beta2
    else:
        lam1, mu1 = ray_point(lp, cfg, lam, mu)
        case = "a" if classify(lam, mu, eig, cfg, delta).label == OUTSIDE else "d"
        phi, psi = eigenpair_at(eig, cfg, lam1)
        u, v = -phi, -psi
        f = max(lam - lam1, 0.0) * a * _pos(psi) ** cfg.beta1
        g = max(mu - mu1, 0.0) * b * _pos(phi) ** cfg.beta2
    f = domain.restrict(f)
    g = domain.restrict(g)
    res = system_residual(u, v, f, g, lam, mu, cfg, weights, domain)
    idx = domain.interior
    min_u, min_v = float(u[idx].min()), float(v[idx].min())
    viol = Violation(case, lam, mu, lam1, mu1, f, g, u, v, res, min_u, min_v)
    if res["relative"] >= RESIDUAL_TOL:
        raise CertificationError(f"case ({case}) residual {res['relative']:.3g} "
                                 f"exceeds {RESIDUAL_TOL}")
    if not (min_u < 0 or min_v < 0):
        raise CertificationError("constructed pair is not negative anywhere")
    return viol
