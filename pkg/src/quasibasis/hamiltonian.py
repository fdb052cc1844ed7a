"""Diagonal Hamiltonians, ladder operators, and their similarity transforms.

In the defining basis

    H = diag(alpha),   A e_n = alpha_n e_{n-1},   B e_n = alpha_{n+1} e_{n+1},

and for a constructing operator T the transformed triples are
``T X T^{-1}`` (phi side) and ``(T^*)^{-1} X T^*`` (psi side).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import operators as ops
from .errors import ContractError
from .opexpr import lower, parse
from .reports import CheckReport, make_report
from .riesz import AlphaSequence, relative_error

EIGEN_TOL = 1e-6
SPECTRUM_TOL = 1e-8
DUALITY_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class LadderTriple:
    H: ops.TruncatedOperator
    A: ops.TruncatedOperator
    B: ops.TruncatedOperator
    alpha: AlphaSequence
    basis: str = ops.DEFAULT_BASIS

    @property
    def dim(self):
        return self.H.dim

    def __iter__(self):
        return iter((self.H, self.A, self.B))


def standard_triple(alpha, N, basis=ops.DEFAULT_BASIS):
    if len(alpha) < N:
        raise ContractError(f"alpha has {len(alpha)} values, need {N}")
    a = np.asarray(alpha.values[:N], dtype=complex)
    H = ops.diagonal(a, basis)
    A = ops.TruncatedOperator(np.diag(a[1:], 1), basis)
    B = ops.TruncatedOperator(np.diag(a[1:], -1), basis)
    return LadderTriple(H, A, B, alpha, basis)


def transform_triple(triple, T, side="phi", cond_max=ops.COND_MAX):
    """phi: X -> T X T^{-1}; psi: X -> (T^*)^{-1} X T^*."""
    Tinv = ops.inverse(T, cond_max)
    if side == "phi":
        L, R = T, Tinv
    elif side == "psi":
        L, R = ops.adjoint(Tinv), ops.adjoint(T)
    else:
        raise ContractError(f"side must be 'phi' or 'psi', got {side!r}")
    H, A, B = (L @ X @ R for X in triple)
    return LadderTriple(H, A, B, triple.alpha, triple.basis)


def default_margin(N, relation="H"):
    return N // 4 + (1 if relation == "B" else 0)


def _rel(lhs, rhs, ref):
    den = max(np.linalg.norm(rhs), np.linalg.norm(ref), np.finfo(float).tiny)
    return float(np.linalg.norm(lhs - rhs) / den)


def eigen_residuals(triple, sys, side="phi"):
    """Per-mode relative residuals of the H, A and B relations on phi_n (or psi_n)."""
    fam = sys.phi if side == "phi" else sys.psi
    a = np.asarray(triple.alpha.values[: sys.dim], dtype=complex)
    N = sys.dim
    H, A, B = (X.entries for X in triple)
    HF, AF, BF = H @ fam, A @ fam, B @ fam
    out = {"H": np.empty(N), "A": np.empty(N), "B": np.empty(N)}
    for n in range(N):
        v = fam[:, n]
        out["H"][n] = _rel(HF[:, n], a[n] * v, v)
        down = a[n] * fam[:, n - 1] if n >= 1 else np.zeros(N)
        out["A"][n] = _rel(AF[:, n], down, v)
        up = a[n + 1] * fam[:, n + 1] if n + 1 < N else np.zeros(N)
        out["B"][n] = _rel(BF[:, n], up, v)
    return out


def check_eigen_relations(triple, sys, side="phi", margin=None, max_mode=None, tol=EIGEN_TOL):
    """Interior-mode residuals of H f_n = a_n f_n, A f_n = a_n f_{n-1}, B f_n = a_{n+1} f_{n+1}.

    Modes checked: n <= N - margin (margin defaults to N/4, N/4 + 1 for B),
    or n <= max_mode when that is given.
    """
    N = sys.dim
    res = eigen_residuals(triple, sys, side)
    per, modes, worst = [], [], {}
    for rel in ("H", "A", "B"):
        if max_mode is not None:
            top = min(max_mode, N - 1 - (rel == "B"))
        else:
            top = N - (default_margin(N, rel) if margin is None else margin + (rel == "B"))
        top = min(top, N - 1)
        vals = res[rel][: top + 1]
        worst[rel] = float(vals.max()) if vals.size else 0.0
        per.append(vals)
    n_modes = min(len(v) for v in per)
    combined = np.max(np.vstack([v[:n_modes] for v in per]), axis=0)
    modes = range(n_modes)
    return make_report(f"eigen_relations_{side}", N, combined, tol, modes=modes,
                       metrics={"max_H": worst["H"], "max_A": worst["A"], "max_B": worst["B"],
                                "cond_T": sys.cond, "modes_checked": n_modes})


def check_spectrum_invariance(T, alpha, N=None, cond_max=ops.COND_MAX, tol=SPECTRUM_TOL):
    """Sorted eigenvalues of T diag(alpha) T^{-1} against sorted alpha."""
    N = N or T.dim
    triple = standard_triple(alpha, N, T.basis)
    Hphi = transform_triple(triple, T, "phi", cond_max).H
    ev = np.linalg.eigvals(Hphi.entries)
    a = np.asarray(alpha.values[:N], dtype=complex)
    key = lambda z: (round(z.real, 8), z.imag)
    ev = np.array(sorted(ev, key=key))
    a = np.array(sorted(a, key=key))
    err = np.abs(ev - a)
    cond = T.cond()
    scale_a = float(np.abs(a).max())
    return make_report("spectrum_invariance", N, err, tol * cond * scale_a,
                       metrics={"cond_T": cond, "max_alpha": scale_a, "tol_base": tol})


def check_adjoint_duality(T, alpha, N=None, cond_max=ops.COND_MAX, tol=DUALITY_TOL):
    """||H_phi - (H_psi)^*|| <= tol cond(T)^2 ||H_phi|| (Frobenius norms)."""
    N = N or T.dim
    if not alpha.is_real:
        raise ContractError("adjoint duality needs a real alpha sequence")
    triple = standard_triple(alpha, N, T.basis)
    Hphi = transform_triple(triple, T, "phi", cond_max).H
    Hpsi = transform_triple(triple, T, "psi", cond_max).H
    diff = Hphi.entries - Hpsi.entries.conj().T
    rel = float(np.linalg.norm(diff) / np.linalg.norm(Hphi.entries))
    cond = T.cond()
    per_col = np.linalg.norm(diff, axis=0) / np.linalg.norm(Hphi.entries)
    return make_report("adjoint_duality", N, per_col, tol * cond**2,
                       metrics={"relative_deviation": rel, "cond_T": cond, "tol_base": tol})


def validate_alpha_condition(alpha, r):
    """0 <= a_0 < a_n < a_{n+1} and a_{n+1} <= a_n + r for every stored n >= 1."""
    vals = alpha.values if isinstance(alpha, AlphaSequence) else np.asarray(alpha)
    if np.iscomplexobj(vals):
        if np.any(np.imag(vals) != 0):
            raise ContractError("the ordering condition needs a real sequence")
        vals = np.real(vals)
    vals = np.asarray(vals, dtype=float)
    if vals.size < 2:
        raise ContractError("need at least two alpha values")
    if not r > 0:
        raise ContractError(f"r must be positive, got {r}")
    if not 0 <= vals[0] < vals[1]:
        return False
    tail = vals[1:]
    gaps = np.diff(tail)
    return bool(np.all(gaps > 0) and np.all(gaps <= r))


# closed-form ladder operators of the T = 1 + x^2 model ------------------------

_CORRECTION = "mul(2*x/(1+x^2))"
LADDER_EXPRS = {
    "A_phi": f"x - {_CORRECTION} + i*p",
    "B_phi": f"x + {_CORRECTION} - i*p",
    "A_psi": f"x + {_CORRECTION} + i*p",
    "B_psi": f"x - {_CORRECTION} - i*p",
}


def closed_form_ladders(N, rule=None):
    """Each operator is (1/sqrt 2) times the expression in LADDER_EXPRS."""
    s = 1.0 / math.sqrt(2.0)
    return {k: ops.scale(lower(parse(v), N, rule=rule), s) for k, v in LADDER_EXPRS.items()}


def block_error(X, Y, k):
    """Relative Frobenius discrepancy of the leading k x k blocks."""
    a = X.entries[:k, :k] if isinstance(X, ops.TruncatedOperator) else np.asarray(X)[:k, :k]
    b = Y.entries[:k, :k] if isinstance(Y, ops.TruncatedOperator) else np.asarray(Y)[:k, :k]
    return relative_error(a, b)


def interior_block(N):
    return max(N // 4, 1)


def check_factorization_example3(N, rule=None, block=None, tol=EIGEN_TOL, vacuum_tol=1e-7,
                                 duality_tol=1e-8):
    """H = 2 B A + 1 on both sides, B_phi = A_psi^*, A_phi = B_psi^*, A_phi phi_0 = 0."""
    from .riesz import harmonic_sequence

    if N < 16:
        raise ContractError("the factorization check needs N >= 16")
    k = block or interior_block(N)
    T = lower(parse("mul(1+x^2)"), N, rule=rule)
    lad = closed_form_ladders(N, rule)
    tri = standard_triple(harmonic_sequence(N), N)
    I = ops.identity(N)
    Hphi = transform_triple(tri, T, "phi").H
    Hpsi = transform_triple(tri, T, "psi").H
    fact_phi = block_error(2.0 * (lad["B_phi"] @ lad["A_phi"]) + I, Hphi, k)
    fact_psi = block_error(2.0 * (lad["B_psi"] @ lad["A_psi"]) + I, Hpsi, k)
    dual_1 = block_error(lad["B_phi"], ops.adjoint(lad["A_psi"]), k)
    dual_2 = block_error(lad["A_phi"], ops.adjoint(lad["B_psi"]), k)
    phi0 = T.entries[:, 0]
    vac = float(np.linalg.norm(lad["A_phi"].entries @ phi0) / np.linalg.norm(phi0))
    names = ["factorization_phi", "factorization_psi", "duality_B_phi_A_psi",
             "duality_A_phi_B_psi", "vacuum_A_phi"]
    vals = [fact_phi, fact_psi, dual_1, dual_2, vac]
    tols = [tol, tol, duality_tol, duality_tol, vacuum_tol]
    ok = all(v <= t for v, t in zip(vals, tols))
    return CheckReport("factorization_example3", N, tol, max(fact_phi, fact_psi), ok,
                       per_mode=tuple({"mode": i, "residual": v} for i, v in enumerate(vals)),
                       metrics={**dict(zip(names, vals)), "block": k,
                                **{f"tol_{n}": t for n, t in zip(names, tols)}},
                       notes=("rows in order: " + ", ".join(names),
                              "pass requires every row within its own tolerance"))
