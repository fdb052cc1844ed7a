"""The inverse of 1 + p^2 through its Green kernel G(x) = exp(-|x|)/2.

Matrix entries are the double integrals

    G[m, n] = 1/2 ∫∫ e_m(x) exp(-|x - y|) e_n(y) dy dx.

The inner integral I_n(x) = 1/2 ∫ exp(-|x - y|) e_n(y) dy is split at y = x
into a left and a right half. On a uniform grid b_0 < ... < b_J each half
obeys a contracting recursion,

    F_{j+1} = exp(-h) F_j + ∫_{b_j}^{b_{j+1}} exp(-(b_{j+1} - y)) e_n(y) dy,

(and its mirror image run backwards), with the segment integrals done by
Gauss-Legendre. The outer integral uses the trapezoid rule on the same grid:
I_n decays only like exp(-|x|), so a Gauss-Hermite rule would be a poor fit,
while the trapezoid rule converges geometrically for smooth integrands that
decay rapidly along the real line.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.special import erfcx

from . import hermite
from . import operators as ops
from .errors import ConfigurationError

GRID_STEP = 0.05
SEGMENT_NODES = 10


def kernel_window(N, rule=None):
    """Half-width of the integration window: the rule's outermost node plus a margin."""
    rule = rule or hermite.gauss_hermite_rule(hermite.default_order(N))
    return float(np.abs(rule.nodes).max()) + 2.0


def _grid(half, step):
    J = int(math.ceil(2.0 * half / step))
    return np.linspace(-half, half, J + 1)


def inner_integrals(N, b):
    """I_n(b_j) for n < N on a uniform, increasing grid ``b``.

    Contributions from outside [b_0, b_J] are dropped; the caller picks a
    window on which every e_n has decayed to rounding level.
    """
    b = np.asarray(b, dtype=float)
    h = b[1] - b[0]
    t, w = np.polynomial.legendre.leggauss(SEGMENT_NODES)
    s = 0.5 * h * (t + 1.0)
    wq = 0.5 * h * w
    right = wq * np.exp(-(h - s))   # weight towards the segment's right end
    left = wq * np.exp(-s)          # weight towards the segment's left end
    y = (b[:-1, None] + s[None, :]).ravel()
    E = hermite.hermite_functions(N, y).reshape(N, b.size - 1, SEGMENT_NODES)
    seg_r = E @ right               # (N, J)
    seg_l = E @ left
    decay = math.exp(-h)
    J = b.size - 1
    fwd = np.zeros((N, J + 1))
    bwd = np.zeros((N, J + 1))
    for j in range(J):
        fwd[:, j + 1] = decay * fwd[:, j] + seg_r[:, j]
    for j in range(J - 1, -1, -1):
        bwd[:, j] = decay * bwd[:, j + 1] + seg_l[:, j]
    return 0.5 * (fwd + bwd)


def greens_kernel_inverse(N, rule=None, basis=ops.DEFAULT_BASIS, step=GRID_STEP):
    """(1 + p^2)^{-1} projected onto the first N modes by kernel quadrature."""
    rule = rule or hermite.gauss_hermite_rule(hermite.default_order(N))
    if rule.order < min(2 * N + 16, hermite.MAX_ORDER):
        raise ConfigurationError(f"kernel route needs rule order >= 2N+16, got {rule.order}")
    b = _grid(kernel_window(N, rule), step)
    inner = inner_integrals(N, b)
    E = hermite.hermite_functions(N, b)
    h = b[1] - b[0]
    G = h * (E @ inner.T)
    return ops.TruncatedOperator(G, basis, positive=True)


def kernel_values(n, x, step=GRID_STEP):
    """I_n(x) = 1/2 ∫ exp(-|x - y|) e_n(y) dy at arbitrary points ``x``.

    This is psi_n of the model T = 1 + p^2 evaluated pointwise, before any
    projection onto a finite number of modes.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    half = max(kernel_window(n + 1), float(np.abs(x).max()) + 2.0)
    out = np.empty(x.shape)
    for i, xi in enumerate(x):
        # grid that contains xi as a node: extend from xi in steps of ``step``
        left = int(math.ceil((xi + half) / step))
        right = int(math.ceil((half - xi) / step))
        b = xi + step * np.arange(-left, right + 1)
        out[i] = inner_integrals(n + 1, b)[n, left]
    return out


def green_psi0(x):
    """Closed form of 1/2 ∫ exp(-|x - y|) e_0(y) dy."""
    x = np.asarray(x, dtype=float)
    pref = 0.5 * math.pi ** -0.25 * math.sqrt(math.pi / 2.0)
    r2 = math.sqrt(2.0)
    return pref * np.exp(-0.5 * x * x) * (erfcx((1.0 - x) / r2) + erfcx((1.0 + x) / r2))
