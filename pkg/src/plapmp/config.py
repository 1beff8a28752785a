"""Run configuration: one JSON document describing domain, exponents, weights and options.

Example::

    {
      "domain": {"kind": "interval", "length": 1.0, "resolution": 512},
      "exponents": {"p": 2, "q": 2, "beta1": 1, "beta2": 1},
      "weights": {"a": 1.0, "b": "1 + 0.5*sin(pi*x)"},
      "lam": 10.0, "mu": 10.0, "f": 1.0, "g": "x*(1-x)"
    }

Weights and data are numbers or arithmetic expressions in the node
coordinates ``x`` and ``y``. Expressions are parsed with ``ast`` and only
arithmetic, the constants ``pi``/``e`` and a fixed set of numpy functions are
accepted.
"""

from __future__ import annotations

import ast
import hashlib
import json
import operator
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError
from .geometry import Domain, from_spec
from .pde_core import SolveOptions
from .spectral import ExponentConfig, WeightPair

_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
           ast.Div: operator.truediv, ast.Pow: operator.pow}
_UNOPS = {ast.UAdd: operator.pos, ast.USub: operator.neg}
_FUNCS = {name: getattr(np, name) for name in
          ("sin", "cos", "tan", "exp", "log", "sqrt", "abs", "tanh", "cosh", "sinh",
           "arctan", "minimum", "maximum")}
_CONSTS = {"pi": np.pi, "e": np.e}

KNOWN_KEYS = {"domain", "exponents", "weights", "solver", "eigen", "lam", "mu", "f", "g",
              "delta", "n_samples", "seed", "lambda_prime", "sweep", "shrink"}


def _eval_node(node, env):
    if isinstance(node, ast.Expression):
        return _eval_node(node.body, env)
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)) \
            and not isinstance(node.value, bool):
        return float(node.value)
    if isinstance(node, ast.Name):
        if node.id in env:
            return env[node.id]
        if node.id in _CONSTS:
            return _CONSTS[node.id]
        raise ConfigError(f"unknown name {node.id!r} in expression")
    if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
        return _BINOPS[type(node.op)](_eval_node(node.left, env), _eval_node(node.right, env))
    if isinstance(node, ast.UnaryOp) and type(node.op) in _UNOPS:
        return _UNOPS[type(node.op)](_eval_node(node.operand, env))
    if (isinstance(node, ast.Call) and isinstance(node.func, ast.Name)
            and node.func.id in _FUNCS and not node.keywords):
        return _FUNCS[node.func.id](*(_eval_node(a, env) for a in node.args))
    raise ConfigError(f"unsupported expression element {ast.dump(node)[:60]}")


def evaluate_field(expr, domain: Domain) -> np.ndarray:
    """Sample a number or coordinate expression at every node."""
    if isinstance(expr, bool) or expr is None:
        raise ConfigError(f"field value must be a number or expression, got {expr!r}")
    if isinstance(expr, (int, float)):
        return np.full(domain.n_nodes, float(expr))
    if not isinstance(expr, str):
        raise ConfigError(f"field value must be a number or expression, got {expr!r}")
    try:
        tree = ast.parse(expr, mode="eval")
    except SyntaxError as exc:
        raise ConfigError(f"cannot parse expression {expr!r}: {exc.msg}") from None
    c = domain.coords
    env = {"x": c[:, 0], "y": c[:, 1] if domain.dim == 2 else np.zeros(domain.n_nodes)}
    try:
        with np.errstate(all="ignore"):
            val = _eval_node(tree, env)
            out = np.broadcast_to(np.asarray(val, dtype=float), (domain.n_nodes,))
    except (ArithmeticError, TypeError, ValueError) as exc:
        raise ConfigError(f"cannot evaluate expression {expr!r}: {exc}") from None
    if not np.all(np.isfinite(out)):
        raise ConfigError(f"expression {expr!r} is not finite on the grid")
    return out.copy()


@dataclass
class RunConfig:
    raw: dict
    domain: Domain
    exponents: ExponentConfig
    weights: WeightPair
    solver: SolveOptions
    eigen: dict = field(default_factory=dict)

    @classmethod
    def from_dict(cls, raw: dict) -> "RunConfig":
        if not isinstance(raw, dict):
            raise ConfigError("config must be a JSON object")
        unknown = set(raw) - KNOWN_KEYS
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        if "domain" not in raw or "exponents" not in raw:
            raise ConfigError("config needs 'domain' and 'exponents'")
        domain = from_spec(raw["domain"])
        exponents = build_exponents(raw["exponents"])
        weights = build_weights(raw.get("weights", {}), domain)
        solver = build_solver(raw.get("solver", {}))
        eigen = dict(raw.get("eigen", {}))
        bad = set(eigen) - {"max_iter", "kappa_tol", "step_tol"}
        if bad:
            raise ConfigError(f"unknown eigen options: {sorted(bad)}")
        return cls(raw, domain, exponents, weights, solver, eigen)

    @classmethod
    def load(cls, path) -> "RunConfig":
        try:
            with open(path, encoding="utf-8") as fh:
                raw = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {path} is not valid JSON: {exc.msg}") from None
        return cls.from_dict(raw)

    def get(self, key, default=None):
        return self.raw.get(key, default)

    def number(self, key, default=None) -> float:
        val = self.raw.get(key, default)
        if isinstance(val, bool) or not isinstance(val, (int, float)):
            raise ConfigError(f"'{key}' must be a number, got {val!r}")
        return float(val)

    def field(self, key, default=0.0) -> np.ndarray:
        return self.domain.restrict(evaluate_field(self.raw.get(key, default), self.domain))

    def digest(self, seed=None) -> str:
        blob = json.dumps({"config": self.raw, "seed": seed}, sort_keys=True,
                          separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()

    def with_domain(self, domain_spec: dict) -> "RunConfig":
        raw = dict(self.raw)
        raw["domain"] = domain_spec
        return RunConfig.from_dict(raw)


def build_exponents(spec) -> ExponentConfig:
    try:
        p = float(spec["p"])
        q = float(spec.get("q", p))
        beta1 = float(spec.get("beta1", p - 1))
        beta2 = float(spec.get("beta2", q - 1))
    except (KeyError, TypeError, ValueError, AttributeError) as exc:
        raise ConfigError(f"bad exponents {spec!r}: {exc}") from None
    return ExponentConfig(p, q, beta1, beta2)


def build_weights(spec, domain: Domain) -> WeightPair:
    if not isinstance(spec, dict):
        raise ConfigError("weights must be an object with keys 'a' and 'b'")
    bad = set(spec) - {"a", "b"}
    if bad:
        raise ConfigError(f"unknown weight keys: {sorted(bad)}")
    return WeightPair(evaluate_field(spec.get("a", 1.0), domain),
                      evaluate_field(spec.get("b", 1.0), domain), domain)


def build_solver(spec) -> SolveOptions:
    if not isinstance(spec, dict):
        raise ConfigError("solver options must be an object")
    spec = dict(spec)
    if spec.get("eps_schedule") is not None:
        spec["eps_schedule"] = tuple(float(e) for e in spec["eps_schedule"])
    try:
        return SolveOptions(**spec)
    except TypeError as exc:
        raise ConfigError(f"bad solver options: {exc}") from None
