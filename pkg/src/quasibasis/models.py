"""The three shipped models and their closed-form oracles.

example1
    T = diag(alpha) with alpha_n = n for odd n, 1/n for even n (n >= 1).
    Lives in coefficient space only.
example2
    T = 1 + p^2. phi_n = (2 + 2n - x^2) e_n; psi_n = (1 + p^2)^{-1} e_n, the
    convolution of e_n with the Green kernel exp(-|x|)/2.
example3
    T = multiplication by 1 + x^2. phi_n = (1 + x^2) e_n, psi_n = e_n/(1 + x^2),
    with explicit potentials and first-order ladder operators.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad

from . import greens, hermite
from . import operators as ops
from .errors import ConfigurationError, NumericError
from .hamiltonian import LADDER_EXPRS, block_error, interior_block, standard_triple, transform_triple
from .opexpr import lower, parse
from .reports import make_report
from .riesz import AlphaSequence, ConstructingPair, builtin_sequence, harmonic_sequence

MODEL_NAMES = ("example1", "example2", "example3")
SPOT_TOL = 1e-8

V_PHI = "x^2 + 2*(1 - 3*x^2)/(1 + x^2)^2"
V_PSI = "x^2 - 2/(1 + x^2)"
DRIFT = "4*x/(1 + x^2)"


def _e(n, x):
    return hermite.eval_hermite_function(n, np.asarray(x, dtype=float))


def _example2_phi(n, x):
    return (2.0 + 2.0 * n - x * x) * _e(n, x)


def _example3_phi(n, x):
    return (1.0 + x * x) * _e(n, x)


def _example3_psi(n, x):
    return _e(n, x) / (1.0 + x * x)


def _scalar(src):
    from .opexpr import scalar_function

    return scalar_function(src)


_MODELS = {
    "example1": dict(
        T_expr="diag(example1)",
        closed_forms={"diagonal": lambda N: builtin_sequence("example1", N).values},
        notes=("diagonal model on an abstract basis; alpha_n = 1/n for even n, n for odd n",
               "slot k holds alpha_{k+1}")),
    "example2": dict(
        T_expr="1 + p^2",
        closed_forms={"phi_n": _example2_phi, "psi_n": lambda n, x: greens.kernel_values(n, x)},
        notes=("T = 1 + p^2 with Green kernel exp(-|x|)/2",
               "the (D(T), H) asymmetry is carried only by the choice of test vectors")),
    "example3": dict(
        T_expr="mul(1+x^2)",
        closed_forms={"phi_n": _example3_phi, "psi_n": _example3_psi,
                      "V_phi": _scalar(V_PHI), "V_psi": _scalar(V_PSI), **LADDER_EXPRS},
        notes=("T = multiplication by 1 + x^2",)),
}


@dataclass(frozen=True, eq=False)
class ModelSpec:
    name: str
    T_expr: object
    alpha: AlphaSequence
    closed_forms: dict = field(default_factory=dict)
    notes: tuple = ()

    @property
    def source(self):
        from .opexpr import to_source

        return to_source(self.T_expr)


@dataclass(frozen=True, eq=False)
class LoadedModel:
    spec: ModelSpec
    pair: ConstructingPair
    spot_check: float


def resolve_alpha(spec, N):
    """An alpha spec is a builtin sequence name or an explicit list of numbers."""
    if spec is None:
        return harmonic_sequence(N)
    if isinstance(spec, AlphaSequence):
        seq = spec
    elif isinstance(spec, str):
        try:
            seq = builtin_sequence(spec, N)
        except KeyError:
            raise ConfigurationError(f"unknown alpha sequence {spec!r}") from None
    else:
        seq = AlphaSequence("explicit", np.asarray(spec, dtype=complex))
    if len(seq) < N:
        raise ConfigurationError(f"alpha sequence has {len(seq)} values, need at least {N}")
    return seq


def spot_check(spec, T, modes=3):
    """Max deviation between closed-form phi_n and the synthesized T e_n on the grid."""
    form = spec.closed_forms.get("phi_n")
    if form is None:
        diag = spec.closed_forms.get("diagonal")
        if diag is None:
            return 0.0
        d = np.asarray(diag(T.dim))
        return float(np.abs(T.entries - np.diag(d)).max())
    N = T.dim
    top = max(min(modes, N - 3), 0)
    xs = hermite.default_grid(N).points()
    worst = 0.0
    for n in range(top):
        approx = hermite.synthesize(T.entries[:, n], xs)
        worst = max(worst, float(np.abs(approx - form(n, xs)).max()))
    return worst


def load_model(name, N, config=None):
    """Lower a named model (or a custom ``{"T_expr", "alpha"}`` mapping) at size N."""
    config = dict(config or {})
    rule = config.get("rule")
    if isinstance(name, dict):
        T_expr = parse(name["T_expr"])
        alpha = resolve_alpha(name.get("alpha", config.get("alpha")), N)
        spec = ModelSpec("custom", T_expr, alpha, {}, ("user-supplied constructing operator",))
    else:
        if name not in _MODELS:
            raise ConfigurationError(f"unknown model {name!r}; choose from {', '.join(MODEL_NAMES)}")
        m = _MODELS[name]
        spec = ModelSpec(name, parse(m["T_expr"]), resolve_alpha(config.get("alpha"), N),
                         m["closed_forms"], m["notes"])
    T = lower(spec.T_expr, N, rule=rule, inverse_mode=config.get("inverse_mode", "matrix"),
              cond_max=config.get("cond_max", ops.COND_MAX))
    err = spot_check(spec, T)
    if err > SPOT_TOL:
        raise NumericError(f"model {spec.name}: closed form disagrees with T e_n by {err:.3g}")
    return LoadedModel(spec, ConstructingPair(T, config.get("cond_max", ops.COND_MAX)), err)


# grid oracles ----------------------------------------------------------------

def grid_discrepancy(family, form, modes, xs):
    """Max over modes of max_x |sum_k family[k, n] e_k(x) - form(n, x)|."""
    E = hermite.hermite_functions(family.shape[0], xs)
    vals = E.T @ family[:, list(modes)]
    return np.array([float(np.abs(vals[:, i] - form(n, xs)).max()) for i, n in enumerate(modes)])


def example3_potentials_check(N, rule=None, block=None, tol=1e-6):
    """T H_0 T^{-1} against p^2 + V_phi + drift*(i p), and the psi analogue."""
    if N < 32:
        raise ConfigurationError("the potentials check needs N >= 32")
    k = block or interior_block(N)
    T = lower(parse("mul(1+x^2)"), N, rule=rule)
    tri = standard_triple(harmonic_sequence(N), N)
    Hphi = transform_triple(tri, T, "phi").H
    Hpsi = transform_triple(tri, T, "psi").H
    Ephi = lower(parse(f"p^2 + mul({V_PHI}) + mul({DRIFT})*i*p"), N, rule=rule)
    Epsi = lower(parse(f"p^2 + mul({V_PSI}) - mul({DRIFT})*i*p"), N, rule=rule)
    d_phi = block_error(Ephi, Hphi, k)
    d_psi = block_error(Epsi, Hpsi, k)
    return make_report("example3_potentials", N, [d_phi, d_psi], tol, modes=[0, 1],
                       metrics={"discrepancy_phi": d_phi, "discrepancy_psi": d_psi, "block": k},
                       notes=("rows: 0 = phi side, 1 = psi side",
                              "heuristic: the explicit form's domain is not specified, "
                              "so only the interior block is compared"))


def greens_route_check(N, rule=None, tol=1e-5):
    """Kernel-quadrature inverse vs truncated matrix inverse on the leading N/2 block."""
    rule = rule or hermite.gauss_hermite_rule(hermite.default_order(N))
    G = greens.greens_kernel_inverse(N, rule)
    M = ops.inverse(lower(parse("1 + p^2"), N, rule=rule))
    k = max(N // 2, 1)
    diff = np.abs(G.entries[:k, :k] - M.entries[:k, :k])
    back = lower(parse("1 + p^2"), N, rule=rule).entries @ G.entries[:, 0]
    e0 = np.zeros(N)
    e0[0] = 1.0
    interior = max(N - 2, 1)
    return make_report("greens_route", N, diff.max(axis=0), tol, modes=range(k),
                       metrics={"max_abs_diff": float(diff.max()),
                                "hermiticity_error": G.hermiticity_error(),
                                "e0_recovery_error": float(np.abs(back[:interior] - e0[:interior]).max()),
                                "block": k})


def direct_psi0(x):
    """1/2 ∫ exp(-|x - y|) e_0(y) dy by adaptive quadrature, split at y = x."""
    f = lambda y: 0.5 * np.exp(-abs(x - y)) * _e(0, y)
    left = quad(f, -np.inf, x, epsabs=1e-14, epsrel=1e-12)[0]
    right = quad(f, x, np.inf, epsabs=1e-14, epsrel=1e-12)[0]
    return left + right


def kernel_psi0_check(xs=None, tol=1e-8):
    xs = np.linspace(-6.0, 6.0, 25) if xs is None else np.asarray(xs, dtype=float)
    route = greens.kernel_values(0, xs)
    direct = np.array([direct_psi0(x) for x in xs])
    return make_report("kernel_psi0", 1, np.abs(route - direct), tol, modes=range(len(xs)),
                       metrics={"closed_form_error": float(np.abs(route - greens.green_psi0(xs)).max())},
                       notes=("rows index sample points on [-6, 6]",))
