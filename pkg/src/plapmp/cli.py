"""Command line interface.

    plapmp <command> --config run.json [--out DIR] [--seed N] [--threads N]

Every command prints a JSON envelope (command, version, config digest, seed,
result) on stdout and, with ``--out``, writes it to ``<command>.json`` next to
any CSV tables. Exit codes: 0 success, 1 solver failure, 2 failed invariant or
cross-check, 3 configuration error. Errors go to stderr as one JSON object.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import bounds as B
from . import principles as P
from . import serialize as io
from .config import RunConfig
from .errors import (CertificationError, ConfigError, ConvergenceError, InconsistencyError,
                     PlapError)
from .pde_core import solve_dirichlet
from .spectral import eigen_residuals, principal_curve

EXIT_OK, EXIT_SOLVER, EXIT_INCONSISTENT, EXIT_CONFIG = 0, 1, 2, 3

COMMANDS = ("eigencurve", "solve", "classify", "verify-mp", "verify-cp", "violate",
            "bounds", "sweep", "shrink")
SWEEP_COLUMNS = ("lam", "mu", "class", "verdict", "min_u", "min_v", "residual")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        _fail(EXIT_CONFIG, "UsageError", message)


def _fail(code, kind, message, **extra):
    sys.stderr.write(json.dumps({"error": kind, "message": message, "exit_code": code,
                                 **extra}, sort_keys=True) + "\n")
    raise SystemExit(code)


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="plapmp", description="Principal curve, maximum principles and ABP "
                 "bounds for coupled p-Laplacian systems.")
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--config", required=True, help="run configuration (JSON)")
    ap.add_argument("--out", default=None, help="directory for JSON/CSV artifacts")
    ap.add_argument("--seed", type=int, default=None, help="overrides the config seed")
    ap.add_argument("--threads", type=int, default=1, help="worker threads for sweep")
    return ap


# -- helpers -----------------------------------------------------------------

def _curve(cfg: RunConfig, domain=None, weights=None):
    return principal_curve(domain or cfg.domain, cfg.exponents, weights or cfg.weights,
                           cfg.solver, **cfg.eigen)


def _lambda_prime(cfg: RunConfig):
    """Curve constant from the config if given, else computed (then EigenData is returned too)."""
    if cfg.get("lambda_prime") is not None:
        return cfg.number("lambda_prime"), None
    eig = _curve(cfg)
    return eig.lambda_prime, eig


def _lam_mu(cfg: RunConfig, default=None):
    if default is None and (cfg.get("lam") is None or cfg.get("mu") is None):
        raise ConfigError("config needs 'lam' and 'mu'")
    return cfg.number("lam", default), cfg.number("mu", default)


class _Run:
    def __init__(self, cfg: RunConfig, seed, out, threads):
        self.cfg, self.seed, self.out, self.threads = cfg, seed, out, threads
        self.tables = {}
        self.failed = None       # message for exit 2

    def table(self, name, text):
        self.tables[name] = text


# -- commands ----------------------------------------------------------------

def cmd_eigencurve(run: _Run) -> dict:
    cfg = run.cfg
    eig = _curve(cfg)
    r1, r2 = eigen_residuals(eig.phi, eig.psi, eig.lam1, eig.mu1, cfg.exponents,
                             cfg.weights, cfg.domain)
    cone = P.cone_membership(eig.phi, eig.psi, cfg.domain)
    if max(r1, r2) >= P.RESIDUAL_TOL or not cone:
        run.failed = "eigenpair residual or cone check failed"
    run.table("eigenpair.csv", io.fields_csv(cfg.domain, phi=eig.phi, psi=eig.psi))
    return {**eig.summary(), "residuals": [r1, r2], "in_cone": cone,
            "exponents": cfg.exponents.as_dict(), "r": cfg.exponents.r, "s": cfg.exponents.s,
            "omega": cfg.exponents.omega, "kappa_history": eig.kappa_history}


def cmd_classify(run: _Run) -> dict:
    cfg = run.cfg
    lam, mu = _lam_mu(cfg)
    lp, _ = _lambda_prime(cfg)
    rc = P.classify(lam, mu, lp, cfg.exponents, cfg.number("delta", 1e-3))
    return {"lam": lam, "mu": mu, "lambda_prime": lp, "class": rc.label, "curve_gap": rc.curve_gap}


def cmd_solve(run: _Run) -> dict:
    cfg = run.cfg
    lam, mu = _lam_mu(cfg)
    lp, _ = _lambda_prime(cfg)
    rc = P.classify(lam, mu, lp, cfg.exponents, cfg.number("delta", 1e-3))
    if not rc.interior:
        raise ConfigError(f"({lam}, {mu}) classifies as {rc.label}; solve needs InteriorRegion")
    f, g = cfg.field("f", 1.0), cfg.field("g", 1.0)
    sol = P.solve_coupled(lam, mu, f, g, cfg.exponents, cfg.weights, cfg.domain, cfg.solver)
    if sol.residual["relative"] >= P.RESIDUAL_TOL:
        run.failed = "coupled residual above tolerance"
    run.table("solution.csv", io.fields_csv(cfg.domain, f=f, g=g, u=sol.u, v=sol.v))
    idx = cfg.domain.interior
    return {"lam": lam, "mu": mu, "lambda_prime": lp, "iterations": sol.iterations,
            "residual": sol.residual, "min_u": float(sol.u[idx].min()),
            "min_v": float(sol.v[idx].min()), "max_u": float(sol.u.max()),
            "max_v": float(sol.v.max()), "monotone_defect": sol.monotone_defect}


def _principle(run: _Run, checker) -> dict:
    cfg = run.cfg
    lam, mu = _lam_mu(cfg)
    lp, _ = _lambda_prime(cfg)
    rc = P.classify(lam, mu, lp, cfg.exponents, cfg.number("delta", 1e-3))
    if not rc.interior:
        raise ConfigError(f"({lam}, {mu}) classifies as {rc.label}; principle checks need "
                          "InteriorRegion (use 'violate' instead)")
    rep = checker(lam, mu, cfg.exponents, cfg.weights, cfg.domain,
                  n_samples=int(cfg.number("n_samples", 10)), seed=run.seed, opts=cfg.solver)
    if not rep.holds:
        run.failed = f"{rep.principle} failed inside the region"
    return {"lambda_prime": lp, "class": rc.label, **rep.to_dict()}


def cmd_verify_mp(run: _Run) -> dict:
    return _principle(run, P.check_wmp_smp)


def cmd_verify_cp(run: _Run) -> dict:
    return _principle(run, P.check_wcp_scp)


def cmd_violate(run: _Run) -> dict:
    cfg = run.cfg
    lam, mu = _lam_mu(cfg)
    eig = _curve(cfg)
    viol = P.construct_violation(lam, mu, eig, cfg.exponents, cfg.weights, cfg.domain,
                                 delta=cfg.number("delta", 1e-3))
    run.table("violation.csv", io.fields_csv(cfg.domain, f=viol.f, g=viol.g, u=viol.u, v=viol.v))
    return {"lambda_prime": eig.lambda_prime, **viol.summary(), "residual_detail": viol.residual}


def cmd_bounds(run: _Run) -> dict:
    cfg = run.cfg
    lam, mu = _lam_mu(cfg, default=1.0)
    lp, _ = _lambda_prime(cfg)
    rep = B.small_measure_guarantee(lam, mu, cfg.domain, cfg.exponents, cfg.weights, lp,
                                    cfg.number("delta", 1e-3))
    abp = {}
    for name, p in (("p", cfg.exponents.p), ("q", cfg.exponents.q)):
        f = cfg.domain.restrict(np.ones(cfg.domain.n_nodes))
        u = solve_dirichlet(cfg.domain, p, f, cfg.solver)
        chk = B.abp_check_scalar(u, f, cfg.domain, p)
        abp[name] = {"exponent": p, "sup_u": chk.sup_u, "bound": chk.bound, "holds": chk.holds}
    if not rep.consistent or not all(v["holds"] for v in abp.values()):
        run.failed = "bounds cross-check failed"
    return {**rep.to_dict(), "abp_torsion": abp}


def _grid(spec, lp, key):
    lo, hi = spec.get(key, [0.0, 2.0])
    n = int(spec.get(f"n_{key}", spec.get("n", 20)))
    if n < 1:
        raise ConfigError("sweep grid needs at least one point per axis")
    scale = lp if spec.get("units", "lambda_prime") == "lambda_prime" else 1.0
    return np.linspace(lo * scale, hi * scale, n)


def _sweep_point(cfg: RunConfig, eig, lam, mu, seed, verify, n_samples):
    rc = P.classify(lam, mu, eig, cfg.exponents, cfg.number("delta", 1e-3))
    row = [lam, mu, rc.label, "unchecked", None, None, None]
    if not verify:
        return row
    try:
        if rc.interior:
            rep = P.check_wmp_smp(lam, mu, cfg.exponents, cfg.weights, cfg.domain,
                                  n_samples=n_samples, seed=seed, opts=cfg.solver)
            w = rep.witnesses
            row[3:] = [rep.verdict, w["min_u"], w["min_v"], w["max_residual"]]
        else:
            v = P.construct_violation(lam, mu, eig, cfg.exponents, cfg.weights, cfg.domain,
                                      delta=cfg.number("delta", 1e-3))
            row[3:] = ["violated", v.min_u, v.min_v, v.residual["relative"]]
    except (ConvergenceError, CertificationError):
        row[3] = "unresolved"
    return row


def cmd_sweep(run: _Run) -> dict:
    cfg = run.cfg
    spec = dict(cfg.get("sweep", {}))
    eig = _curve(cfg)
    lams = _grid(spec, eig.lambda_prime, "lam")
    mus = _grid(spec, eig.lambda_prime, "mu")
    verify = bool(spec.get("verify", True))
    n_samples = int(spec.get("n_samples", 1))
    points = [(i * len(mus) + j, lam, mu) for i, lam in enumerate(lams) for j, mu in enumerate(mus)]

    def job(pt):
        k, lam, mu = pt
        return _sweep_point(cfg, eig, float(lam), float(mu), run.seed + k, verify, n_samples)

    with ThreadPoolExecutor(max_workers=max(1, run.threads)) as pool:
        rows = list(pool.map(job, points))          # map keeps grid order
    run.table("sweep.csv", io.table_csv(SWEEP_COLUMNS, rows))
    counts = {}
    for row in rows:
        counts[row[2]] = counts.get(row[2], 0) + 1
    bad = [r for r in rows if r[3] == "fails" or (r[2] != P.INTERIOR and r[3] == "unchecked"
                                                  and verify)]
    if bad:
        run.failed = f"{len(bad)} sweep points contradict their classification"
    return {"lambda_prime": eig.lambda_prime, "rows": len(rows), "classes": counts,
            "verdicts": {v: sum(r[3] == v for r in rows) for v in sorted({r[3] for r in rows})}}


def cmd_shrink(run: _Run) -> dict:
    cfg = run.cfg
    spec = dict(cfg.get("shrink", {}))
    lengths = [float(x) for x in spec.get("lengths", [1.0, 0.5, 0.25, 0.125])]
    lam, mu = float(spec.get("lam", 1.0)), float(spec.get("mu", 1.0))
    base = dict(cfg.raw["domain"])
    keys = {"interval": ("length",), "rectangle": ("lx", "ly"), "disk": ("radius",)}
    if base.get("kind") not in keys:
        raise ConfigError(f"cannot shrink domain kind {base.get('kind')!r}")

    def make_case(L):
        spec_L = dict(base)
        for k in keys[base["kind"]]:
            spec_L[k] = float(base.get(k, 1.0)) * L
        c = cfg.with_domain(spec_L)
        return c.domain, c.weights

    def curve(dom, w):
        return principal_curve(dom, cfg.exponents, w, cfg.solver, **cfg.eigen)

    rows = B.shrink_study(lengths, make_case, cfg.exponents, curve, lam, mu)
    run.table("shrink.csv", io.table_csv(B.SHRINK_COLUMNS,
                                         [(r.L, r.measure, r.diameter, r.lb1, r.lambda_prime,
                                           r.eta) for r in rows]))
    order = sorted(rows, key=lambda r: -r.measure)
    lb_increasing = all(b.lb1 > a.lb1 for a, b in zip(order, order[1:]))
    lp_increasing = all(b.lambda_prime > a.lambda_prime for a, b in zip(order, order[1:]))
    lb_below = all(r.lb1 <= r.lambda_prime for r in rows)
    if not (lb_increasing and lp_increasing and lb_below):
        run.failed = "shrink study trend or lower-bound check failed"
    return {"rows": [r.__dict__ for r in rows], "lb1_increasing": lb_increasing,
            "lambda_prime_increasing": lp_increasing, "lb1_below_lambda_prime": lb_below,
            "lam": lam, "mu": mu}


HANDLERS = {
    "eigencurve": cmd_eigencurve, "solve": cmd_solve, "classify": cmd_classify,
    "verify-mp": cmd_verify_mp, "verify-cp": cmd_verify_cp, "violate": cmd_violate,
    "bounds": cmd_bounds, "sweep": cmd_sweep, "shrink": cmd_shrink,
}


def run(command: str, cfg: RunConfig, seed: int = 0, out=None, threads: int = 1):
    """Execute one command; returns (exit_code, envelope, tables)."""
    r = _Run(cfg, seed, out, threads)
    result = HANDLERS[command](r)
    env = io.envelope(command, cfg.digest(seed), seed, result)
    if r.failed:
        env["failure"] = r.failed
    if out is not None:
        io.write_text(out, f"{command}.json", io.dumps(env))
        for name, text in sorted(r.tables.items()):
            io.write_text(out, name, text)
    return (EXIT_INCONSISTENT if r.failed else EXIT_OK), env, r.tables


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = RunConfig.load(args.config)
        seed = args.seed if args.seed is not None else int(cfg.number("seed", 0))
        if seed < 0:
            raise ConfigError("seed must be nonnegative")
        if args.threads < 1:
            raise ConfigError("--threads must be at least 1")
        code, env, _ = run(args.command, cfg, seed, args.out, args.threads)
    except ConfigError as exc:
        _fail(EXIT_CONFIG, type(exc).__name__, str(exc))
    except InconsistencyError as exc:
        _fail(EXIT_INCONSISTENT, type(exc).__name__, str(exc))
    except (ConvergenceError, CertificationError) as exc:
        extra = {}
        if isinstance(exc, ConvergenceError):
            extra["residual"] = exc.residual
        _fail(EXIT_SOLVER, type(exc).__name__, str(exc), **io.jsonable(extra))
    except PlapError as exc:
        _fail(EXIT_SOLVER, type(exc).__name__, str(exc))
    sys.stdout.write(io.dumps(env))
    if code:
        sys.stderr.write(json.dumps({"error": "InconsistencyError", "message": env["failure"],
                                     "exit_code": code}, sort_keys=True) + "\n")
    return code


if __name__ == "__main__":
    sys.exit(main())
