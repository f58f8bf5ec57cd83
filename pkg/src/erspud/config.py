"""Experiment configuration as flat ``key = value`` text.

Symbolic entries (``theta = 2/n``, ``p_grid = n + 2, ceil(8*n*log(n))``) are
kept as text and evaluated per grid cell by :func:`evaluate` with a small
whitelist of names and functions.
"""

import ast
import dataclasses
import math
import operator
from dataclasses import dataclass, fields

from .models import DICTIONARY_KINDS, DISTRIBUTIONS
from .recovery import ALL_PAIRS, RANDOM_PAIRING
from .textio import kv_from_text


class ConfigError(ValueError):
    pass


_BINOPS = {
    ast.Add: operator.add,
    ast.Sub: operator.sub,
    ast.Mult: operator.mul,
    ast.Div: operator.truediv,
    ast.Pow: operator.pow,
}
_FUNCS = {"sqrt": math.sqrt, "log": math.log, "ceil": math.ceil, "floor": math.floor, "exp": math.exp}


def evaluate(expr, **names):
    """Evaluate an arithmetic rule such as ``c*log(n)/n`` with the given names."""
    try:
        tree = ast.parse(str(expr).strip(), mode="eval")
    except SyntaxError as exc:
        raise ConfigError(f"cannot parse rule {expr!r}") from exc

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return node.value
        if isinstance(node, ast.Name):
            if node.id in names:
                return names[node.id]
            raise ConfigError(f"unknown name {node.id!r} in rule {expr!r}")
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            return _BINOPS[type(node.op)](ev(node.left), ev(node.right))
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            v = ev(node.operand)
            return -v if isinstance(node.op, ast.USub) else v
        if (isinstance(node, ast.Call) and isinstance(node.func, ast.Name)
                and node.func.id in _FUNCS and len(node.args) == 1 and not node.keywords):
            return _FUNCS[node.func.id](ev(node.args[0]))
        raise ConfigError(f"unsupported construct in rule {expr!r}")

    try:
        return ev(tree)
    except (ZeroDivisionError, ValueError, OverflowError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"rule {expr!r} failed: {exc}") from exc


@dataclass(frozen=True)
class ExperimentConfig:
    n: int = 10
    p: str = "ceil(8*n*log(n))"
    p_grid: tuple = ()
    n_grid: tuple = ()
    theta: str = "2/n"
    dist: str = "gaussian"
    dictionary: str = "random_gaussian_invertible"
    kappa: float = 1e4
    mode: str = ALL_PAIRS
    trials: int = 20
    seed: int = 0
    support_tol: float = 1e-6
    rank_tol: float = 1e-9
    match_tol: float = 1e-6
    c_const: float = 0.0625
    k_const: float = 0.25
    c_prime: float = 3.0
    max_pairs: int = 0
    p0_subsets: int = 2000
    m_grid: tuple = (50, 200, 800)
    n_samples: int = 1000
    workers: int = 1
    timing: str = "off"
    output: str = "out"

    def __post_init__(self):
        if self.dist not in DISTRIBUTIONS:
            raise ConfigError(f"dist must be one of {DISTRIBUTIONS}")
        if self.dictionary not in DICTIONARY_KINDS:
            raise ConfigError(f"dictionary must be one of {DICTIONARY_KINDS}")
        if self.mode not in (ALL_PAIRS, RANDOM_PAIRING):
            raise ConfigError(f"mode must be {ALL_PAIRS} or {RANDOM_PAIRING}")
        if self.timing not in ("off", "wall"):
            raise ConfigError("timing must be 'off' or 'wall'")
        if self.trials < 1 or self.workers < 1 or self.n < 1:
            raise ConfigError("n, trials and workers must be positive")

    def ns(self):
        return [int(v) for v in self.n_grid] or [self.n]

    def ps(self, n):
        """Evaluated p values for ``n`` (the grid if given, else ``p``)."""
        rules = self.p_grid or (self.p,)
        return [int(round(evaluate(r, n=n))) for r in rules]

    def theta_for(self, n):
        th = float(evaluate(self.theta, n=n))
        if not 0.0 < th <= 1.0:
            raise ConfigError(f"theta rule {self.theta!r} gives {th} at n={n}")
        return th

    def to_text(self):
        lines = []
        for f in fields(self):
            v = getattr(self, f.name)
            if isinstance(v, tuple):
                v = ", ".join(str(x) for x in v)
            elif isinstance(v, float):
                v = repr(v)
            lines.append(f"{f.name} = {v}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text):
        try:
            kv = kv_from_text(text)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        types = {f.name: f.type for f in fields(cls)}
        defaults = {f.name: f.default for f in fields(cls)}
        args = {}
        for key, raw in kv.items():
            if key not in types:
                raise ConfigError(f"unknown config key {key!r}")
            kind = type(defaults[key])
            try:
                if kind is tuple:
                    args[key] = tuple(_tuple_item(t.strip()) for t in raw.split(",") if t.strip())
                elif kind is int:
                    args[key] = int(raw)
                elif kind is float:
                    args[key] = float(raw)
                else:
                    args[key] = raw
            except ValueError as exc:
                raise ConfigError(f"bad value for {key}: {raw!r}") from exc
        return cls(**args)

    @classmethod
    def load(cls, path):
        with open(path, encoding="utf-8") as fh:
            return cls.from_text(fh.read())

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)


def _tuple_item(t):
    try:
        return int(t)
    except ValueError:
        return t
