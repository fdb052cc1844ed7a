import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from quasibasis import hermite
from quasibasis import operators as ops
from quasibasis.errors import BasisMismatchError, ContractError, NumericError, SingularityError


def test_position_and_momentum_are_hermitian_tridiagonal():
    X = ops.position_matrix(6)
    P = ops.momentum_matrix(6)
    assert X.hermiticity_error() == 0 and P.hermiticity_error() == 0
    assert X.entries[0, 1] == pytest.approx(np.sqrt(0.5))
    assert P.entries[1, 0] == pytest.approx(1j * np.sqrt(0.5))
    assert not X.verify_flags() and not P.verify_flags()


def test_momentum_squared_corner():
    # <e_0, p^2 e_0> = 1/2
    P = ops.momentum_matrix(8).entries
    assert (P @ P)[0, 0].real == pytest.approx(0.5, abs=1e-15)


def test_canonical_commutator_interior():
    N = 12
    X, P = ops.position_matrix(N).entries, ops.momentum_matrix(N).entries
    C = X @ P - P @ X
    assert np.allclose(C[: N - 1, : N - 1], 1j * np.eye(N - 1), atol=1e-14)


def test_multiplication_by_x_matches_position_matrix():
    N = 20
    M = ops.multiplication_operator(lambda x: x, N)
    assert np.abs(M.entries - ops.position_matrix(N).entries).max() < 1e-13


def test_multiplication_by_x_squared_matches_product_interior():
    N = 20
    M = ops.multiplication_operator(lambda x: x * x, N).entries
    X = ops.position_matrix(N).entries
    assert np.abs((M - X @ X)[: N - 1, : N - 1]).max() < 1e-13


def test_multiplier_rejects_nonfinite_and_complex():
    with pytest.raises(NumericError):
        ops.multiplication_operator(lambda x: np.where(x == 0, np.inf, x), 5, hermite.gauss_hermite_rule(7))
    with pytest.raises(ContractError):
        ops.multiplication_operator(lambda x: 1j * x, 4)


def test_basis_labels_are_strict():
    a = ops.identity(3)
    b = ops.identity(3, basis="polar-f")
    with pytest.raises(BasisMismatchError):
        a @ b
    with pytest.raises(BasisMismatchError):
        ops.basis_vector(3, 0).inner(ops.basis_vector(3, 0, "polar-f"))
    with pytest.raises(ContractError):
        ops.identity(3) @ ops.identity(4)


def test_inner_product_is_linear_in_first_slot():
    x = ops.StateVector([1.0, 0.0])
    y = ops.StateVector([0.0 + 0j, 1.0])
    z = ops.StateVector([1j, 2.0])
    assert z.inner(x) == pytest.approx(1j)
    assert x.inner(z) == pytest.approx(-1j)
    assert z.inner(y) == pytest.approx(2.0)


def test_inverse_guard():
    with pytest.raises(SingularityError) as info:
        ops.inverse(ops.diagonal([1.0, 1e-14]))
    assert info.value.cond == pytest.approx(1e14)
    inv = ops.inverse(ops.diagonal([2.0, 4.0]))
    assert np.allclose(np.diag(inv.entries), [0.5, 0.25])


def test_size_limits():
    with pytest.raises(ContractError):
        ops.position_matrix(0)
    with pytest.raises(ContractError):
        ops.momentum_matrix(ops.MAX_DIM + 1)


def test_entries_are_read_only():
    X = ops.position_matrix(3)
    with pytest.raises(ValueError):
        X.entries[0, 0] = 1.0


def test_flags_are_verified():
    bad = ops.TruncatedOperator(np.array([[0, 1], [0, 0]]), self_adjoint=True)
    assert bad.verify_flags() == ["self_adjoint"]
    neg = ops.TruncatedOperator(-np.eye(2), self_adjoint=True, positive=True)
    assert neg.verify_flags() == ["positive"]


def test_json_round_trip():
    A = ops.TruncatedOperator(np.array([[1, 2j], [3, 4 - 1j]]))
    doc = ops.operator_to_json(A, note="x")
    assert doc["dim"] == 2 and doc["note"] == "x"
    assert doc["entries"][1] == [0.0, 2.0]
    B = ops.operator_from_json(json.dumps(doc))
    assert np.array_equal(A.entries, B.entries)
    with pytest.raises(ContractError):
        ops.operator_from_json({"dim": 3, "basis": "hermite-e", "entries": doc["entries"]})


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), N=st.integers(1, 12))
def test_adjoint_and_composition_laws(seed, N):
    rng = np.random.default_rng(seed)
    a = ops.TruncatedOperator(rng.standard_normal((N, N)) + 1j * rng.standard_normal((N, N)))
    b = ops.TruncatedOperator(rng.standard_normal((N, N)))
    lhs = ops.adjoint(a @ b).entries
    rhs = (ops.adjoint(b) @ ops.adjoint(a)).entries
    assert np.allclose(lhs, rhs, atol=1e-12)
    v = ops.StateVector(rng.standard_normal(N) + 1j * rng.standard_normal(N))
    w = ops.StateVector(rng.standard_normal(N))
    # <A v, w> = <v, A^* w>
    assert (a @ v).inner(w) == pytest.approx(v.inner(ops.adjoint(a) @ w), abs=1e-10)


@settings(max_examples=20, deadline=None)
@given(c=st.lists(st.floats(-3, 3), min_size=3, max_size=3))
def test_multiplication_operator_is_linear_in_multiplier(c):
    N = 10
    rule = hermite.gauss_hermite_rule(hermite.default_order(N))
    f = lambda x: 1 + x * x
    g = lambda x: np.cos(x)
    lhs = ops.multiplication_operator(lambda x: c[0] * f(x) + c[1] * g(x), N, rule).entries
    rhs = (c[0] * ops.multiplication_operator(f, N, rule).entries
           + c[1] * ops.multiplication_operator(g, N, rule).entries)
    assert np.allclose(lhs, rhs, atol=1e-12)
