"""Truncated operators and state vectors in a labelled orthonormal basis.

Operators are dense N x N complex matrices acting on coefficient vectors in
the first N basis modes. Arithmetic follows "truncate-then-operate": the
inverse of a truncated matrix is *not* the truncation of the inverse
operator, and nothing here pretends otherwise.

Every binary operation checks basis labels strictly.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from . import hermite
from .errors import BasisMismatchError, ContractError, NumericError, SingularityError

DEFAULT_BASIS = "hermite-e"
COND_MAX = 1e12
MAX_DIM = 512


def _frozen(a):
    a = np.array(a, dtype=complex)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class TruncatedOperator:
    entries: np.ndarray
    basis: str = DEFAULT_BASIS
    self_adjoint: bool = False
    positive: bool = False

    def __post_init__(self):
        a = _frozen(self.entries)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
            raise ContractError(f"operator must be a nonempty square matrix, got shape {a.shape}")
        if not np.all(np.isfinite(a)):
            raise NumericError("operator entries must be finite")
        object.__setattr__(self, "entries", a)

    @property
    def dim(self):
        return self.entries.shape[0]

    @property
    def scale(self):
        return float(np.abs(self.entries).max())

    def hermiticity_error(self):
        return float(np.abs(self.entries - self.entries.conj().T).max())

    def verify_flags(self):
        """Check the advisory flags against the entries; returns a list of violations."""
        problems = []
        tol = 1e-10 * max(self.scale, np.finfo(float).tiny)
        if self.self_adjoint and self.hermiticity_error() > tol:
            problems.append("self_adjoint")
        if self.positive:
            herm = 0.5 * (self.entries + self.entries.conj().T)
            if np.linalg.eigvalsh(herm).min() < -tol:
                problems.append("positive")
        return problems

    def cond(self):
        return float(np.linalg.cond(self.entries))

    def column(self, n):
        return StateVector(self.entries[:, n], self.basis)

    def relabel(self, basis):
        return TruncatedOperator(self.entries, basis, self.self_adjoint, self.positive)

    def __add__(self, other):
        return add(self, other)

    def __sub__(self, other):
        return add(self, scale(other, -1.0))

    def __matmul__(self, other):
        if isinstance(other, StateVector):
            return apply(self, other)
        return compose(self, other)

    def __mul__(self, c):
        return scale(self, c)

    __rmul__ = __mul__

    def __repr__(self):
        return f"TruncatedOperator(dim={self.dim}, basis={self.basis!r})"


@dataclass(frozen=True, eq=False)
class StateVector:
    coeffs: np.ndarray
    basis: str = DEFAULT_BASIS

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=complex).ravel()
        if c.size < 1:
            raise ContractError("state vector must be nonempty")
        if not np.all(np.isfinite(c)):
            raise NumericError("state vector coefficients must be finite")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @property
    def dim(self):
        return self.coeffs.size

    def norm(self):
        return float(np.linalg.norm(self.coeffs))

    def inner(self, other):
        """<self, other>, linear in the first slot."""
        _check_basis(self, other)
        if self.dim != other.dim:
            raise ContractError(f"dimension mismatch: {self.dim} vs {other.dim}")
        return complex(np.vdot(other.coeffs, self.coeffs))

    def __repr__(self):
        return f"StateVector(dim={self.dim}, basis={self.basis!r})"


def basis_vector(N, k, basis=DEFAULT_BASIS):
    c = np.zeros(N, dtype=complex)
    c[k] = 1.0
    return StateVector(c, basis)


def _check_basis(a, b):
    if a.basis != b.basis:
        raise BasisMismatchError(a.basis, b.basis)


def _check_dims(a, b):
    if a.dim != b.dim:
        raise ContractError(f"dimension mismatch: {a.dim} vs {b.dim}")


def identity(N, basis=DEFAULT_BASIS):
    return TruncatedOperator(np.eye(N), basis, self_adjoint=True, positive=True)


def diagonal(values, basis=DEFAULT_BASIS):
    values = np.asarray(values, dtype=complex)
    real = bool(np.all(values.imag == 0))
    return TruncatedOperator(np.diag(values), basis, self_adjoint=real,
                             positive=real and bool(np.all(values.real >= 0)))


def _check_dim(N):
    if not isinstance(N, (int, np.integer)) or N < 1:
        raise ContractError(f"truncation size must be a positive integer, got {N!r}")
    if N > MAX_DIM:
        raise ContractError(f"truncation size {N} exceeds the limit {MAX_DIM}")


def position_matrix(N, basis=DEFAULT_BASIS):
    """<e_m, x e_n>: tridiagonal with off-diagonal sqrt(n/2)."""
    _check_dim(N)
    off = np.sqrt(np.arange(1, N) / 2.0)
    X = np.diag(off, 1) + np.diag(off, -1)
    return TruncatedOperator(X, basis, self_adjoint=True)


def momentum_matrix(N, basis=DEFAULT_BASIS):
    """<e_m, p e_n> with p = -i d/dx.

    Uses d/dx e_n = sqrt(n/2) e_{n-1} - sqrt((n+1)/2) e_{n+1}, so
    P[n+1, n] = i sqrt((n+1)/2) and P[n, n+1] = -i sqrt((n+1)/2).
    """
    _check_dim(N)
    off = np.sqrt(np.arange(1, N) / 2.0)
    P = 1j * (np.diag(off, -1) - np.diag(off, 1))
    return TruncatedOperator(P, basis, self_adjoint=True)


def multiplication_operator(f, N, rule=None, basis=DEFAULT_BASIS):
    """Matrix of <e_m, f e_n> by Gauss-Hermite quadrature; ``f`` real-valued."""
    _check_dim(N)
    rule = rule or hermite.gauss_hermite_rule(hermite.default_order(N))
    nodes = rule.nodes
    vals = f(nodes) if callable(f) else f
    vals = np.broadcast_to(np.asarray(vals), nodes.shape)
    if np.iscomplexobj(vals):
        if np.any(vals.imag != 0):
            raise ContractError("multiplier must be real-valued")
        vals = vals.real
    vals = vals.astype(float)
    bad = ~np.isfinite(vals)
    if bad.any():
        raise NumericError("non-finite multiplier value", node=float(nodes[np.argmax(bad)]))
    W = hermite.weighted_basis(N, rule)
    M = (W * vals) @ W.T
    M = 0.5 * (M + M.T)
    return TruncatedOperator(M, basis, self_adjoint=True)


def apply(op, v):
    _check_basis(op, v)
    _check_dims(op, v)
    return StateVector(op.entries @ v.coeffs, op.basis)


def adjoint(op):
    return TruncatedOperator(op.entries.conj().T, op.basis, op.self_adjoint, op.positive)


def compose(a, b):
    _check_basis(a, b)
    _check_dims(a, b)
    return TruncatedOperator(a.entries @ b.entries, a.basis)


def add(a, b):
    _check_basis(a, b)
    _check_dims(a, b)
    return TruncatedOperator(a.entries + b.entries, a.basis,
                             self_adjoint=a.self_adjoint and b.self_adjoint)


def scale(a, c):
    c = complex(c)
    return TruncatedOperator(c * a.entries, a.basis, self_adjoint=a.self_adjoint and c.imag == 0)


def inverse(op, cond_max=COND_MAX):
    """Matrix inverse guarded by a condition-number limit.

    Raises :class:`SingularityError` carrying the estimated condition number
    when ``cond(op) > cond_max``; never regularizes silently.
    """
    cond = op.cond()
    if not math.isfinite(cond) or cond > cond_max:
        raise SingularityError(cond, cond_max)
    inv = np.linalg.inv(op.entries)
    return TruncatedOperator(inv, op.basis, self_adjoint=op.self_adjoint, positive=op.positive)


def inverse_residual(op, inv):
    """||op inv - I|| in the max norm."""
    return float(np.abs(op.entries @ inv.entries - np.eye(op.dim)).max())


# matrix dump format --------------------------------------------------------

def operator_to_json(op, **extra):
    """Matrix JSON: {dim, basis, entries: row-major [re, im] pairs, ...extra}."""
    e = op.entries.ravel()
    doc = {
        "dim": op.dim,
        "basis": op.basis,
        "entries": [[float(z.real), float(z.imag)] for z in e],
    }
    doc.update(extra)
    return doc


def operator_from_json(doc):
    if isinstance(doc, str):
        doc = json.loads(doc)
    dim = int(doc["dim"])
    pairs = np.asarray(doc["entries"], dtype=float)
    if pairs.shape != (dim * dim, 2):
        raise ContractError(f"expected {dim * dim} [re, im] pairs, got shape {pairs.shape}")
    return TruncatedOperator((pairs[:, 0] + 1j * pairs[:, 1]).reshape(dim, dim), doc["basis"])
