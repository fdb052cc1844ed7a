"""Named check suites run against a loaded model at one truncation size."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import hamiltonian as hm
from . import polar, riesz
from .errors import NumericError, SingularityError
from .models import example3_potentials_check, greens_route_check, kernel_psi0_check, load_model
from .reports import CheckReport

SUITES = ("biorthogonality", "quasibasis", "hamiltonian", "factorization", "polar")


@dataclass
class Context:
    cfg: object
    N: int
    model: object = None
    system: object = None

    @property
    def name(self):
        return self.cfg.model_name

    def load(self):
        if self.system is None:
            rule = self.cfg.rule_for(self.N)
            model = load_model(self.cfg.model, self.N,
                               {"rule": rule, "alpha": self.cfg.alpha,
                                "inverse_mode": self.cfg.inverse_mode})
            tol = self.cfg.tolerance("biorthogonality", riesz.BIORTH_TOL)
            self.system = riesz.build_system(model.pair, tol)
            self.model = model
        return self

    def tol(self, check, default):
        return self.cfg.tolerance(check, default)


def _biorthogonality(ctx):
    ctx.load()
    yield "biorthogonality", lambda: ctx.system.report
    yield "reconstruction", lambda: riesz.check_reconstruction(
        ctx.system, ctx.tol("reconstruction", riesz.RECONSTRUCTION_TOL))


def _quasibasis(ctx):
    ctx.load()
    pairs = riesz.random_pairs(ctx.cfg.test_vectors, ctx.N, ctx.cfg.pairs, ctx.cfg.seed)
    yield "completeness", lambda: riesz.check_completeness(
        ctx.system, pairs, ctx.tol("completeness", riesz.COMPLETENESS_TOL))
    vecs = [p[0] for p in pairs[: len(ctx.cfg.test_vectors)]]
    yield "domain_growth", lambda: riesz.check_domain_growth(ctx.system, vecs, list(ctx.cfg.test_vectors))


def _hamiltonian(ctx):
    ctx.load()
    alpha = ctx.model.spec.alpha
    T = ctx.model.pair.T
    tri = hm.standard_triple(alpha, ctx.N)
    for side in ("phi", "psi"):
        yield f"eigen_relations_{side}", lambda side=side: hm.check_eigen_relations(
            hm.transform_triple(tri, T, side), ctx.system, side,
            tol=ctx.tol(f"eigen_relations_{side}", hm.EIGEN_TOL))
    yield "spectrum_invariance", lambda: hm.check_spectrum_invariance(
        T, alpha, ctx.N, tol=ctx.tol("spectrum_invariance", hm.SPECTRUM_TOL))
    if alpha.is_real:
        yield "adjoint_duality", lambda: hm.check_adjoint_duality(
            T, alpha, ctx.N, tol=ctx.tol("adjoint_duality", hm.DUALITY_TOL))


def _factorization(ctx):
    rule = ctx.cfg.rule_for(ctx.N)
    if ctx.name == "example3":
        if ctx.N >= 16:
            yield "factorization_example3", lambda: hm.check_factorization_example3(
                ctx.N, rule, tol=ctx.tol("factorization_example3", hm.EIGEN_TOL))
        if ctx.N >= 32:
            yield "example3_potentials", lambda: example3_potentials_check(
                ctx.N, rule, tol=ctx.tol("example3_potentials", 1e-6))
    elif ctx.name == "example2":
        yield "greens_route", lambda: greens_route_check(ctx.N, rule, tol=ctx.tol("greens_route", 1e-5))
        yield "kernel_psi0", lambda: kernel_psi0_check(tol=ctx.tol("kernel_psi0", 1e-8))


def _polar(ctx):
    ctx.load()
    for side in ("phi", "psi"):
        holder = {}

        def positive(side=side, holder=holder):
            holder["pp"] = polar.positive_constructing_pair(
                ctx.system, side, ctx.tol(f"polar_positive_{side}", polar.POLAR_TOL))
            return holder["pp"].report

        yield f"polar_positive_{side}", positive

        def cross(side=side, holder=holder):
            pp = holder.get("pp") or polar.positive_constructing_pair(ctx.system, side)
            return polar.cross_constructing_check(ctx.system, pp, side,
                                                  ctx.tol(f"polar_cross_{side}", polar.POLAR_TOL))

        yield f"polar_cross_{side}", cross


_REGISTRY = {
    "biorthogonality": _biorthogonality,
    "quasibasis": _quasibasis,
    "hamiltonian": _hamiltonian,
    "factorization": _factorization,
    "polar": _polar,
}


def suite_names(suite):
    return SUITES if suite == "all" else (suite,)


def failure_report(check, N, exc):
    return CheckReport(check, N, 0.0, float("nan"), False,
                       notes=(f"{type(exc).__name__}: {exc}",), metrics={"error": True})


@dataclass(frozen=True)
class Outcome:
    reports: tuple
    numeric_error: bool


def run_checks(cfg, N, suite="all"):
    """All checks of ``suite`` at size N. Numeric failures become failing reports."""
    ctx = Context(cfg, N)
    out, numeric = [], False
    for name in suite_names(suite):
        gen = _REGISTRY[name](ctx)
        while True:
            try:
                check, thunk = next(gen)
            except StopIteration:
                break
            except (NumericError, SingularityError) as exc:
                out.append(failure_report(name, N, exc))
                numeric = True
                break
            try:
                rep = thunk()
            except (NumericError, SingularityError, np.linalg.LinAlgError) as exc:
                rep = failure_report(check, N, exc)
                numeric = True
            out.append(rep)
    return Outcome(tuple(out), numeric)
