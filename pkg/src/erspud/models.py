"""Seeded generators for ``Y = A X`` with Bernoulli-subgaussian ``X``.

Every entry ``X[i, j]`` is a deterministic function of ``(seed, j, i)``:
column ``j`` owns a Philox stream keyed by ``(seed, j)`` and row ``i`` always
consumes draws ``3i, 3i+1, 3i+2`` of it (mask, magnitude, sign). Growing
``p`` therefore leaves existing columns untouched, and columns can be
generated in any order or in parallel with identical output.
"""

from dataclasses import dataclass

import numpy as np
from scipy.special import ndtri

from .linalg import SINGULAR_COND, as_matrix, condition_estimate, matmul

DISTRIBUTIONS = ("rademacher", "gaussian", "uniform_pm")
DICTIONARY_KINDS = ("identity", "random_orthonormal", "random_gaussian_invertible", "ill_conditioned")

# E|g| for each nonzero distribution
MEAN_ABS = {
    "rademacher": 1.0,
    "gaussian": float(np.sqrt(2.0 / np.pi)),
    "uniform_pm": 0.5,
}

_DICT_STREAM = 0x5D1C7


@dataclass(frozen=True)
class ModelSpec:
    n: int
    p: int
    theta: float
    dist: str = "rademacher"
    seed: int = 0

    def __post_init__(self):
        if self.n < 1 or self.p < 1:
            raise ValueError(f"n and p must be positive, got n={self.n}, p={self.p}")
        if not 0.0 < self.theta <= 1.0:
            raise ValueError(f"theta must lie in (0, 1], got {self.theta}")
        if self.dist not in DISTRIBUTIONS:
            raise ValueError(f"unknown distribution {self.dist!r}; choose from {DISTRIBUTIONS}")


@dataclass(frozen=True)
class DictionarySpec:
    n: int
    kind: str = "random_gaussian_invertible"
    seed: int = 0
    kappa: float = 1e4

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be positive")
        if self.kind not in DICTIONARY_KINDS:
            raise ValueError(f"unknown dictionary kind {self.kind!r}; choose from {DICTIONARY_KINDS}")
        if self.kind == "ill_conditioned" and not 1.0 <= self.kappa < SINGULAR_COND:
            raise ValueError("kappa must lie in [1, 1e12)")


def column_stream(seed, column):
    """Philox generator owning column ``column`` of a matrix seeded by ``seed``."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed) & (2**64 - 1), int(column)])))


def _column(spec, j):
    u = column_stream(spec.seed, j).random((spec.n, 3))
    mask = u[:, 0] < spec.theta
    if spec.dist == "rademacher":
        mag = np.ones(spec.n)
    elif spec.dist == "gaussian":
        mag = ndtri(0.5 + 0.5 * u[:, 1])  # half-normal by inversion
    else:
        mag = u[:, 1]
    sign = np.where(u[:, 2] < 0.5, 1.0, -1.0)
    return np.where(mask, sign * mag, 0.0)


def gen_coefficients(spec):
    """Draw the ``n x p`` coefficient matrix ``X`` described by ``spec``."""
    x = np.empty((spec.n, spec.p))
    for j in range(spec.p):
        x[:, j] = _column(spec, j)
    return x


def bernoulli_rademacher(n, p, theta, seed):
    return gen_coefficients(ModelSpec(n, p, theta, "rademacher", seed))


def gen_dictionary(spec, max_tries=16):
    """Generate a square invertible dictionary ``A``.

    ``random_gaussian_invertible`` is redrawn (up to ``max_tries`` times) while
    its condition estimate exceeds ``1e12``. ``ill_conditioned`` returns
    ``Q diag(d) Q^T`` with ``d`` geometrically spaced from 1 down to ``1/kappa``.
    """
    n = spec.n
    if spec.kind == "identity":
        return np.eye(n)
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([int(spec.seed) & (2**64 - 1), _DICT_STREAM])))
    if spec.kind == "random_orthonormal":
        return _haar_orthogonal(rng, n)
    if spec.kind == "ill_conditioned":
        q = _haar_orthogonal(rng, n)
        d = np.geomspace(1.0, 1.0 / spec.kappa, n)
        return (q * d) @ q.T
    for _ in range(max_tries):
        a = rng.standard_normal((n, n))
        if condition_estimate(a) < SINGULAR_COND:
            return a
    raise np.linalg.LinAlgError(f"no well-conditioned dictionary after {max_tries} draws")


def _haar_orthogonal(rng, n):
    q, r = np.linalg.qr(rng.standard_normal((n, n)))
    s = np.sign(np.diag(r))
    s[s == 0] = 1.0
    return q * s


def observe(a, x):
    """Noise-free observation ``Y = A X``."""
    return matmul(a, x)


def instance(model, dictionary_kind="random_gaussian_invertible", kappa=1e4):
    """Convenience: ``(A, X, Y)`` for a model spec, dictionary seeded alongside it."""
    x = gen_coefficients(model)
    a = gen_dictionary(DictionarySpec(model.n, dictionary_kind, model.seed, kappa))
    return a, x, observe(a, x)


def mean_abs(dist):
    return MEAN_ABS[dist]


def is_ternary(x):
    x = as_matrix(x)
    return bool(np.all((x == 0.0) | (x == 1.0) | (x == -1.0)))


def derive_seed(master, *keys):
    """Independent 64-bit seed for a sub-task (trial, cell, ...) of a master seed."""
    ss = np.random.SeedSequence([int(master) & (2**64 - 1), *[int(k) for k in keys]])
    return int(ss.generate_state(1, np.uint64)[0])
