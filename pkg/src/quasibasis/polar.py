"""Polar decomposition of analysis operators and the rotated basis it yields.

For the phi family the analysis matrix is ``T^*`` (rows = conjugated phi
coefficients). Writing ``T^* = U |T^*|`` and ``f_n = U^* e_n`` gives

    |T^*| f_n = phi_n,      |T^*|^{-1} f_n = psi_n,

so the positive operator |T^*| constructs phi from the new basis and its
inverse constructs psi. The psi side is the mirror image with ``T^{-1}``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import operators as ops
from .errors import ContractError, SingularityError
from .reports import make_report
from .riesz import ConstructingPair, build_system

POLAR_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class PolarPair:
    U: ops.TruncatedOperator
    Pos: ops.TruncatedOperator
    new_basis: str
    f_columns: np.ndarray
    singular_values: np.ndarray

    @property
    def sigma_min(self):
        return float(self.singular_values.min())

    @property
    def sigma_max(self):
        return float(self.singular_values.max())

    def unitarity_error(self):
        U = self.U.entries
        I = np.eye(U.shape[0])
        return float(max(np.abs(U.conj().T @ U - I).max(), np.abs(U @ U.conj().T - I).max()))


def polar_decompose(op, new_basis="polar-f", cond_max=ops.COND_MAX):
    """op = U |op| from the SVD op = W diag(s) V^*: U = W V^*, |op| = V diag(s) V^*.

    For invertible input the factors are unique, so no phase convention is
    needed for degenerate singular values: any choice of singular vectors
    gives the same U and |op|.
    """
    a = op.entries
    W, s, Vh = np.linalg.svd(a)
    if s.min() == 0 or s.max() / s.min() > cond_max:
        raise SingularityError(float("inf") if s.min() == 0 else float(s.max() / s.min()), cond_max)
    U = W @ Vh
    Pos = (Vh.conj().T * s) @ Vh
    Pos = 0.5 * (Pos + Pos.conj().T)
    f = U.conj().T
    f.setflags(write=False)
    s.setflags(write=False)
    return PolarPair(ops.TruncatedOperator(U, op.basis),
                     ops.TruncatedOperator(Pos, op.basis, self_adjoint=True, positive=True),
                     new_basis, f, s)


@dataclass(frozen=True, eq=False)
class PositivePair:
    pair: ConstructingPair
    polar: PolarPair
    report: object


def _column_errors(M, fam):
    num = np.linalg.norm(M - fam, axis=0)
    return num / np.maximum(np.linalg.norm(fam, axis=0), np.finfo(float).tiny)


def positive_constructing_pair(sys, side="phi", tol=POLAR_TOL):
    """Positive constructing operator on the rotated basis f (phi) or g (psi).

    The returned pair's matrix is |op| expressed in the new basis, i.e.
    ``U |op| U^*``; the report checks |op| f_n against the target family in
    e-coordinates. Any well-conditioned system is accepted, since at
    finite dimension every biorthogonal pair resolves the identity.
    """
    if side not in ("phi", "psi"):
        raise ContractError(f"side must be 'phi' or 'psi', got {side!r}")
    label = "polar-f" if side == "phi" else "polar-g"
    pp = polar_decompose(ops.TruncatedOperator(sys.analysis(side), sys.basis), label,
                         sys.source.cond_max)
    target = sys.phi if side == "phi" else sys.psi
    err = _column_errors(pp.Pos.entries @ pp.f_columns, target)
    rep = make_report(f"polar_positive_{side}", sys.dim, err, tol * sys.cond,
                      metrics={"sigma_min": pp.sigma_min, "sigma_max": pp.sigma_max,
                               "unitarity_error": pp.unitarity_error(), "cond_T": sys.cond,
                               "tol_base": tol},
                      notes=("accepted without a quasi-basis hypothesis: every finite "
                             "biorthogonal system resolves the identity",))
    U = pp.U.entries
    in_new = U @ pp.Pos.entries @ U.conj().T
    pair = ConstructingPair(ops.TruncatedOperator(in_new, label, self_adjoint=True, positive=True),
                            sys.source.cond_max)
    return PositivePair(pair, pp, rep)


def cross_constructing_check(sys, polar_pair, side="phi", tol=POLAR_TOL):
    """|op|^{-1} f_n should reproduce the dual family (psi for side phi, phi for side psi)."""
    pp = polar_pair.polar if isinstance(polar_pair, PositivePair) else polar_pair
    inv = ops.inverse(pp.Pos, sys.source.cond_max)
    dual = sys.psi if side == "phi" else sys.phi
    err = _column_errors(inv.entries @ pp.f_columns, dual)
    return make_report(f"polar_cross_{side}", sys.dim, err, tol * sys.cond,
                       metrics={"cond_T": sys.cond, "tol_base": tol})


def round_trip_error(sys, positive):
    """Rebuild phi from the positive pair and map back to e-coordinates."""
    rebuilt = build_system(positive.pair)
    # f-coordinates c relate to e-coordinates by v = U^* c
    back = positive.polar.U.entries.conj().T @ rebuilt.phi
    target = sys.phi if positive.pair.basis == "polar-f" else sys.psi
    return _column_errors(back, target)
