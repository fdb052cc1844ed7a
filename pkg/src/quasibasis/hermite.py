"""Hermite functions and Gauss-Hermite quadrature.

The orthonormal basis is the set of Hermite functions

    e_n(x) = (2^n n! sqrt(pi))^(-1/2) H_n(x) exp(-x^2/2),

evaluated with the three-term recurrence on the *normalized* functions,

    e_{n+1} = sqrt(2/(n+1)) x e_n - sqrt(n/(n+1)) e_{n-1},

carried in a mantissa/log-scale pair so nothing overflows or underflows
before the final exponentiation.

Weight convention: a :class:`QuadratureRule` stores *total* weights, i.e.
the classical Gauss-Hermite weights already multiplied by exp(x_i^2), so that

    sum_i w_i F(x_i) ~ integral F(x) dx

for integrands ``F`` that carry their own Gaussian decay (products of basis
functions). Total weights grow like exp(x^2) at the outer nodes and are kept
as logarithms; ``rule.weights`` exponentiates them and overflows to ``inf``
beyond order ~360, which is why internal projections go through
:func:`weighted_basis` instead.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.linalg import eigh_tridiagonal
from scipy.special import logsumexp

from .errors import ConfigurationError, NumericError

MAX_ORDER = 1024
_RESCALE = 1e100
_LOG_RESCALE = math.log(_RESCALE)
_LOG_E0 = -0.25 * math.log(math.pi)


def _scaled_table(N, x):
    """Mantissas and log scales of e_0..e_{N-1} at points ``x``.

    Returns ``(mant, logs)`` of shape ``(N, len(x))`` with
    ``e_n(x) = mant[n] * exp(logs[n])``.
    """
    x = np.asarray(x, dtype=float).ravel()
    mant = np.empty((N, x.size))
    logs = np.empty((N, x.size))
    scale = _LOG_E0 - 0.5 * x * x
    prev = np.zeros_like(x)
    cur = np.ones_like(x)
    mant[0] = cur
    logs[0] = scale
    for n in range(N - 1):
        nxt = math.sqrt(2.0 / (n + 1)) * x * cur - math.sqrt(n / (n + 1)) * prev
        big = np.abs(nxt) > _RESCALE
        if big.any():
            nxt[big] /= _RESCALE
            cur[big] /= _RESCALE
            scale = scale + big * _LOG_RESCALE
        mant[n + 1] = nxt
        logs[n + 1] = scale
        prev, cur = cur, nxt
    return mant, logs


def hermite_functions(N, x):
    """Array ``E`` of shape ``(N,) + shape(x)`` with ``E[n] = e_n(x)``."""
    if N < 1:
        raise ConfigurationError(f"need at least one function, got N={N}")
    x = np.asarray(x, dtype=float)
    mant, logs = _scaled_table(N, x)
    with np.errstate(under="ignore"):
        vals = mant * np.exp(logs)
    return vals.reshape((N,) + x.shape)


def eval_hermite_function(n, x):
    """Value of the n-th normalized Hermite function at ``x``.

    >>> round(eval_hermite_function(0, 0.0), 9)
    0.751125544
    """
    if n < 0:
        raise ConfigurationError(f"mode index must be nonnegative, got {n}")
    out = hermite_functions(n + 1, x)[n]
    return float(out) if np.ndim(out) == 0 else out


def _last_two(n, x):
    """(e_{n-1}, e_n) at ``x`` up to a common positive factor per point."""
    prev = np.zeros_like(x)
    cur = np.ones_like(x)
    for k in range(n):
        nxt = math.sqrt(2.0 / (k + 1)) * x * cur - math.sqrt(k / (k + 1)) * prev
        big = np.abs(nxt) > _RESCALE
        if big.any():
            nxt[big] /= _RESCALE
            cur[big] /= _RESCALE
        prev, cur = cur, nxt
    return prev, cur


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    order: int
    nodes: np.ndarray
    log_weights: np.ndarray

    def __post_init__(self):
        if len(self.nodes) != self.order or len(self.log_weights) != self.order:
            raise ConfigurationError("nodes/weights length must equal order")
        if self.order > 1 and not np.all(np.diff(self.nodes) > 0):
            raise ConfigurationError("quadrature nodes must be strictly increasing")
        for arr in (self.nodes, self.log_weights):
            arr.setflags(write=False)

    @property
    def weights(self):
        """Total weights (classical weight times exp(x^2))."""
        with np.errstate(over="ignore"):
            return np.exp(self.log_weights)

    @property
    def gaussian_weights(self):
        """Classical Gauss-Hermite weights for integrals of exp(-x^2) f(x)."""
        with np.errstate(under="ignore"):
            return np.exp(self.log_weights - self.nodes**2)


@lru_cache(maxsize=64)
def gauss_hermite_rule(order):
    """Gauss-Hermite rule of the given order (1 <= order <= 1024).

    Nodes are the eigenvalues of the symmetric tridiagonal Jacobi matrix of
    the Hermite recurrence (Golub-Welsch), polished by two Newton steps on
    e_order. Weights come from the Christoffel form ``1 / sum_k e_k(x_i)^2``,
    which stays accurate at the outer nodes where the eigenvector route
    loses all relative precision.
    """
    if not isinstance(order, (int, np.integer)) or isinstance(order, bool):
        raise ConfigurationError(f"quadrature order must be an integer, got {order!r}")
    if not 1 <= order <= MAX_ORDER:
        raise ConfigurationError(f"quadrature order must be in [1, {MAX_ORDER}], got {order}")
    order = int(order)
    if order == 1:
        nodes = np.zeros(1)
    else:
        off = np.sqrt(np.arange(1, order) / 2.0)
        nodes = eigh_tridiagonal(np.zeros(order), off, eigvals_only=True)
        for _ in range(2):
            em1, e = _last_two(order, nodes)
            deriv = math.sqrt(2.0 * order) * em1 - nodes * e
            nodes = nodes - e / deriv
        nodes = 0.5 * (nodes - nodes[::-1])
    mant, logs = _scaled_table(order, nodes)
    with np.errstate(divide="ignore"):
        terms = 2.0 * np.log(np.abs(mant)) + 2.0 * logs
    log_w = -logsumexp(terms, axis=0)
    log_w = 0.5 * (log_w + log_w[::-1])
    return QuadratureRule(order, nodes, log_w)


def default_order(N):
    """Rule order used for truncation size N: 2N+16, capped at the maximum."""
    return min(2 * N + 16, MAX_ORDER)


@lru_cache(maxsize=64)
def _weighted_basis_cached(N, order):
    rule = gauss_hermite_rule(order)
    mant, logs = _scaled_table(N, rule.nodes)
    with np.errstate(divide="ignore", under="ignore"):
        mag = np.exp(np.log(np.abs(mant)) + logs + 0.5 * rule.log_weights)
    out = np.sign(mant) * mag
    out.setflags(write=False)
    return out


def weighted_basis(N, rule):
    """Matrix ``W[n, i] = e_n(x_i) sqrt(w_i)`` for the first N functions.

    Every entry is bounded by one, so ``W @ diag(f) @ W.T`` projects a
    multiplier ``f`` without ever forming a total weight.
    """
    return _weighted_basis_cached(int(N), rule.order)


def _sample(f, nodes):
    vals = f(nodes) if callable(f) else f
    vals = np.broadcast_to(np.asarray(vals, dtype=complex), nodes.shape)
    bad = ~np.isfinite(vals)
    if bad.any():
        raise NumericError("non-finite sample value", node=float(nodes[np.argmax(bad)]))
    return vals


def project_inner_product(f, g, rule):
    """Quadrature approximation of the integral of f(x) * conj(g(x)).

    ``f`` and ``g`` are vectorized callables or arrays of samples at the
    rule's nodes. They must carry their own decay (see module docstring).
    """
    fv = _sample(f, rule.nodes)
    gv = _sample(g, rule.nodes)
    prod = fv * np.conj(gv)
    nz = prod != 0
    with np.errstate(over="ignore"):
        w = np.exp(rule.log_weights[nz])
    total = np.sum(w * prod[nz])
    if not np.isfinite(total):
        raise NumericError("quadrature sum overflowed")
    return complex(total)


def project_function(f, N, rule):
    """Expansion coefficients ``<f, e_n>`` for n < N of a sampled function.

    ``f`` is evaluated at the nodes and must carry its own Gaussian decay.
    """
    fv = _sample(f, rule.nodes)
    E = hermite_functions(N, rule.nodes)
    nz = fv != 0
    with np.errstate(over="ignore"):
        w = np.exp(rule.log_weights[nz])
    return E[:, nz] @ (w * fv[nz])


def synthesize(coeffs, x):
    """Evaluate ``sum_n coeffs[n] e_n(x)`` (coeffs may be a matrix of columns)."""
    coeffs = np.asarray(coeffs)
    E = hermite_functions(coeffs.shape[0], np.asarray(x, dtype=float).ravel())
    return E.T @ coeffs


@dataclass(frozen=True)
class GridSpec:
    x_min: float
    x_max: float
    count: int

    def __post_init__(self):
        if not self.x_min < self.x_max:
            raise ConfigurationError("grid needs x_min < x_max")
        if self.count < 2:
            raise ConfigurationError("grid needs at least two points")

    def points(self):
        return np.linspace(self.x_min, self.x_max, self.count)

    @property
    def spacing(self):
        return (self.x_max - self.x_min) / (self.count - 1)


def default_grid(N, count=513):
    """Uniform comparison grid; half-width max(8, sqrt(2N)+4) covers the turning point."""
    half = max(8.0, math.sqrt(2.0 * N) + 4.0)
    return GridSpec(-half, half, count)
