"""Biorthogonal systems built from constructing pairs, and their checks.

A constructing pair ``(e, T)`` yields ``phi_n = T e_n`` and
``psi_n = (T^{-1})^* e_n``; in coefficient space these are the columns of
``T`` and of ``(T^*)^{-1}``.

Matrix conventions, fixed once:

* the synthesis matrix of a family is the matrix whose columns are its
  members (for phi this is ``T`` itself);
* the analysis matrix maps x to the sequence ``<x, phi_n>``; its row n is the
  conjugated coefficient vector of ``phi_n``, i.e. it is the adjoint of the
  synthesis matrix.

All pass/fail thresholds are scaled by ``cond(T)``, and the condition
number is recorded next to the raw residuals.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field

import numpy as np

from . import operators as ops
from .errors import ConfigurationError, ContractError
from .reports import CheckReport, make_report

BIORTH_TOL = 1e-9
COMPLETENESS_TOL = 1e-10
RECONSTRUCTION_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class AlphaSequence:
    name: str
    values: np.ndarray
    origin_index: int = 0

    def __post_init__(self):
        v = np.array(self.values)
        if not np.all(np.isfinite(v)):
            raise ContractError(f"sequence {self.name!r} has non-finite values")
        if self.origin_index not in (0, 1):
            raise ContractError("origin_index must be 0 or 1")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def __len__(self):
        return len(self.values)

    @property
    def is_real(self):
        return not np.iscomplexobj(self.values) or bool(np.all(np.imag(self.values) == 0))


def example1_sequence(N):
    """alpha_n = 1/n for even n, n for odd n, n = 1, 2, ...; slot k holds alpha_{k+1}."""
    n = np.arange(1, N + 1, dtype=float)
    return AlphaSequence("example1", np.where(n % 2 == 0, 1.0 / n, n), origin_index=1)


def harmonic_sequence(N):
    """alpha_n = 2n + 1, the oscillator spectrum."""
    return AlphaSequence("harmonic", 2.0 * np.arange(N) + 1.0)


def ladder_sequence(N):
    """alpha_n = sqrt(n): the weights of the usual annihilation/creation pair."""
    return AlphaSequence("ladder", np.sqrt(np.arange(N, dtype=float)))


_BUILTIN = {
    "example1": example1_sequence,
    "harmonic": harmonic_sequence,
    "ladder": ladder_sequence,
}


def builtin_sequence(name, N):
    return _BUILTIN[name](N)


def builtin_sequence_names():
    return tuple(_BUILTIN)


@dataclass(frozen=True, eq=False)
class ConstructingPair:
    T: ops.TruncatedOperator
    cond_max: float = ops.COND_MAX

    @property
    def basis(self):
        return self.T.basis

    @property
    def dim(self):
        return self.T.dim


@dataclass(frozen=True, eq=False)
class BiorthogonalSystem:
    phi: np.ndarray
    psi: np.ndarray
    source: ConstructingPair
    cond: float
    report: CheckReport | None = field(default=None, compare=False)

    @property
    def dim(self):
        return self.phi.shape[0]

    @property
    def basis(self):
        return self.source.basis

    def phi_vector(self, n):
        return ops.StateVector(self.phi[:, n], self.basis)

    def psi_vector(self, n):
        return ops.StateVector(self.psi[:, n], self.basis)

    def analysis(self, side="phi"):
        """Analysis matrix of phi (or psi): rows are conjugated family members."""
        fam = self.phi if side == "phi" else self.psi
        return fam.conj().T


def build_system(pair, tol=BIORTH_TOL):
    """phi = columns of T, psi = columns of (T^*)^{-1}; biorthogonality is checked."""
    T = pair.T
    Tinv = ops.inverse(T, pair.cond_max)
    phi = np.array(T.entries)
    psi = np.array(Tinv.entries.conj().T)
    phi.setflags(write=False)
    psi.setflags(write=False)
    cond = T.cond()
    sys = BiorthogonalSystem(phi, psi, pair, cond)
    rep = check_biorthogonality(sys, tol)
    object.__setattr__(sys, "report", rep)
    return sys


@dataclass(frozen=True)
class GramResult:
    gram: np.ndarray
    max_offdiag: float
    max_diag_err: float

    @property
    def max_deviation(self):
        return max(self.max_offdiag, self.max_diag_err)


def biorthogonality_gram(sys):
    """gram[m, n] = <phi_n, psi_m>."""
    G = sys.psi.conj().T @ sys.phi
    N = G.shape[0]
    off = G - np.diag(np.diag(G))
    return GramResult(G, float(np.abs(off).max()) if N > 1 else 0.0,
                      float(np.abs(np.diag(G) - 1.0).max()))


def check_biorthogonality(sys, tol=BIORTH_TOL):
    g = biorthogonality_gram(sys)
    dev = np.abs(g.gram - np.eye(sys.dim))
    per_col = dev.max(axis=0)
    return make_report("biorthogonality", sys.dim, per_col, tol * sys.cond,
                       metrics={"cond_T": sys.cond, "max_offdiag": g.max_offdiag,
                                "max_diag_err": g.max_diag_err, "tol_base": tol})


def _check_vec(sys, v):
    if v.basis != sys.basis:
        raise ops.BasisMismatchError(v.basis, sys.basis)
    if v.dim != sys.dim:
        raise ContractError(f"dimension mismatch: vector {v.dim} vs system {sys.dim}")


def quasi_basis_terms(sys, x, y):
    """Terms <x, phi_k><psi_k, y> for k = 0..N-1."""
    _check_vec(sys, x)
    _check_vec(sys, y)
    a = sys.phi.conj().T @ x.coeffs          # <x, phi_k>
    b = np.conj(sys.psi.conj().T @ y.coeffs)  # <psi_k, y>
    return a * b


def quasi_basis_residual(sys, x, y, K):
    """sum_{k<K} <x, phi_k><psi_k, y> - <x, y>."""
    if not 0 <= K <= sys.dim:
        raise ContractError(f"K must lie in [0, {sys.dim}], got {K}")
    terms = quasi_basis_terms(sys, x, y)
    return complex(np.sum(terms[:K]) - x.inner(y))


def quasi_basis_partial_residuals(sys, x, y):
    """Array r with r[K] = quasi_basis_residual(sys, x, y, K) for K = 0..N."""
    terms = quasi_basis_terms(sys, x, y)
    return np.concatenate([[0.0], np.cumsum(terms)]) - x.inner(y)


def check_completeness(sys, pairs, tol=COMPLETENESS_TOL):
    """Full sum (K = N) against <x, y>, normalized by ||x|| ||y||."""
    res = []
    for x, y in pairs:
        r = abs(quasi_basis_residual(sys, x, y, sys.dim))
        res.append(r / max(x.norm() * y.norm(), np.finfo(float).tiny))
    return make_report("completeness", sys.dim, res, tol * sys.cond, modes=range(len(res)),
                       metrics={"cond_T": sys.cond, "pairs": len(res), "tol_base": tol},
                       notes=("per_mode rows index test-vector pairs, not modes",))


@dataclass(frozen=True)
class Reconstruction:
    T_from_psi: ops.TruncatedOperator
    K_from_phi: ops.TruncatedOperator


def reconstruct_constructing_operator(sys):
    """T = (analysis matrix of psi)^{-1}, K = (analysis matrix of phi)^{-1}."""
    cm = sys.source.cond_max
    A_psi = ops.TruncatedOperator(sys.analysis("psi"), sys.basis)
    A_phi = ops.TruncatedOperator(sys.analysis("phi"), sys.basis)
    return Reconstruction(ops.inverse(A_psi, cm), ops.inverse(A_phi, cm))


def relative_error(a, b):
    a = a.entries if isinstance(a, ops.TruncatedOperator) else np.asarray(a)
    b = b.entries if isinstance(b, ops.TruncatedOperator) else np.asarray(b)
    return float(np.linalg.norm(a - b) / max(np.linalg.norm(b), np.finfo(float).tiny))


def check_reconstruction(sys, tol=RECONSTRUCTION_TOL):
    rec = reconstruct_constructing_operator(sys)
    T = sys.source.T.entries
    K_true = np.linalg.inv(T.conj().T)
    eT = np.linalg.norm(rec.T_from_psi.entries - T, axis=0) / np.linalg.norm(T)
    eK = np.linalg.norm(rec.K_from_phi.entries - K_true, axis=0) / np.linalg.norm(K_true)
    per = np.maximum(eT, eK)
    return make_report("reconstruction", sys.dim, per, tol * sys.cond,
                       metrics={"cond_T": sys.cond, "rel_err_T": relative_error(rec.T_from_psi, T),
                                "rel_err_K": relative_error(rec.K_from_phi, K_true),
                                "tol_base": tol})


# domain growth ---------------------------------------------------------------

MIN_TAIL_TERMS = 8


def tail_slope(terms):
    """Log-log least-squares slope of the tail envelope over the last quarter.

    The envelope at index n is max_{k >= n} term_k, so a non-decaying
    subsequence (every other term constant, say) is not averaged away.
    Returns None when fewer than 8 usable (positive) terms remain.
    """
    terms = np.abs(np.asarray(terms, dtype=float))
    N = terms.size
    start = N - N // 4
    env = np.maximum.accumulate(terms[::-1])[::-1]
    idx = np.arange(1, N + 1, dtype=float)
    sel = slice(start, N)
    t, n = env[sel], idx[sel]
    ok = t > 0
    if ok.sum() < MIN_TAIL_TERMS:
        return None
    slope = np.polyfit(np.log(n[ok]), np.log(t[ok]), 1)[0]
    return float(slope)


@dataclass(frozen=True)
class DomainDiagnostic:
    phi_sum: float
    psi_sum: float
    phi_slope: float | None
    psi_slope: float | None

    @staticmethod
    def _flag(slope):
        if slope is None:
            return "indeterminate"
        return "numerically in domain" if slope < -1 else "growth detected"

    @property
    def phi_flag(self):
        return self._flag(self.phi_slope)

    @property
    def psi_flag(self):
        return self._flag(self.psi_slope)

    @property
    def tail_slope(self):
        return {"phi": self.phi_slope, "psi": self.psi_slope}


def domain_growth_diagnostic(sys, x):
    """Partial sums of |<x, phi_n>|^2 and |<x, psi_n>|^2 with tail slopes.

    A heuristic for membership in D(phi) / D(psi), not a proof.
    """
    _check_vec(sys, x)
    a = np.abs(sys.phi.conj().T @ x.coeffs) ** 2
    b = np.abs(sys.psi.conj().T @ x.coeffs) ** 2
    return DomainDiagnostic(float(a.sum()), float(b.sum()), tail_slope(a), tail_slope(b))


def check_domain_growth(sys, vectors, labels=None):
    """Informational report: always passes, flags recorded per test vector."""
    labels = labels or [f"v{i}" for i in range(len(vectors))]
    notes, rows = [], []
    for lab, v in zip(labels, vectors):
        d = domain_growth_diagnostic(sys, v)
        notes.append(f"{lab}: phi {d.phi_flag} (slope {d.phi_slope}), psi {d.psi_flag} (slope {d.psi_slope})")
        rows.append(d.phi_sum)
    notes.append("diagnostic only; whether span(phi) lies in D(phi) is left open")
    return CheckReport("domain_growth", sys.dim, math.inf, 0.0, True,
                       per_mode=tuple({"mode": i, "residual": r} for i, r in enumerate(rows)),
                       notes=tuple(notes), metrics={"cond_T": sys.cond},
                       )


# test vectors ----------------------------------------------------------------

_PROFILE = re.compile(r"^\s*(?:basis_(\d+)|(geometric|gaussian)\(\s*([0-9.eE+-]+)\s*\))\s*$")


def parse_profile(spec):
    m = _PROFILE.match(spec)
    if not m:
        raise ConfigurationError(
            f"bad test-vector profile {spec!r}; use basis_k, geometric(r) or gaussian(width)")
    if m.group(1) is not None:
        return ("basis", int(m.group(1)))
    val = float(m.group(3))
    if m.group(2) == "geometric" and not 0 < val < 1:
        raise ConfigurationError(f"geometric ratio must be in (0, 1), got {val}")
    if m.group(2) == "gaussian" and not val > 0:
        raise ConfigurationError(f"gaussian width must be positive, got {val}")
    return (m.group(2), val)


def make_test_vector(spec, N, rng, basis=ops.DEFAULT_BASIS):
    """Coefficient vector for a profile; random profiles draw complex normal amplitudes."""
    kind, val = parse_profile(spec) if isinstance(spec, str) else spec
    n = np.arange(N)
    if kind == "basis":
        if val >= N:
            raise ConfigurationError(f"basis_{val} needs N > {val}")
        return ops.basis_vector(N, val, basis)
    env = val ** n if kind == "geometric" else np.exp(-0.5 * (n / val) ** 2)
    z = rng.standard_normal(N) + 1j * rng.standard_normal(N)
    return ops.StateVector(env * z, basis)


def random_pairs(profiles, N, count, seed, basis=ops.DEFAULT_BASIS):
    """``count`` (x, y) pairs cycling through ``profiles`` with a seeded generator."""
    rng = np.random.default_rng(seed)
    out = []
    for i in range(count):
        x = make_test_vector(profiles[i % len(profiles)], N, rng, basis)
        y = make_test_vector(profiles[(i + 1) % len(profiles)], N, rng, basis)
        out.append((x, y))
    return out
