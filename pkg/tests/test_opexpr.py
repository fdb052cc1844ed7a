import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from quasibasis import operators as ops
from quasibasis import opexpr as ox
from quasibasis.errors import (
    ExponentOverflowError,
    ExprError,
    ExprSyntaxError,
    LoweringError,
    SingularityError,
    UnknownIdentifierError,
)
from quasibasis.riesz import AlphaSequence
from quasibasis.opexpr import Add, Const, Diag, Div, Inv, Mul, MulOp, P, Pow, Sub, X


def test_model_expressions_parse():
    assert ox.parse("1 + p^2") == Add(Const(1), Pow(P(), 2))
    assert ox.parse("mul(1+x^2)") == MulOp(Add(Const(1), Pow(X(), 2)))
    assert ox.parse("diag(example1)") == Diag("example1")


def test_dangling_operator_offset():
    with pytest.raises(ExprSyntaxError) as info:
        ox.parse("x + ")
    assert info.value.offset == 4
    assert "x" in info.value.expected


def test_left_associative():
    assert ox.parse("x - p - 1") == Sub(Sub(X(), P()), Const(1))
    assert ox.parse("x*p*x") == Mul(Mul(X(), P()), X())


def test_precedence():
    assert ox.parse("1 + x*p^2") == Add(Const(1), Mul(X(), Pow(P(), 2)))
    assert ox.parse("(1 + x)*p") == Mul(Add(Const(1), X()), P())


def test_errors():
    with pytest.raises(UnknownIdentifierError) as info:
        ox.parse("1 + q")
    assert info.value.offset == 4
    with pytest.raises(ExponentOverflowError):
        ox.parse("p^65")
    with pytest.raises(ExprSyntaxError):
        ox.parse("p^x")
    with pytest.raises(ExprSyntaxError):
        ox.parse("x/2")
    with pytest.raises(ExprSyntaxError):
        ox.parse("mul(p)")
    with pytest.raises(ExprSyntaxError):
        ox.parse("")
    with pytest.raises(ExprSyntaxError):
        ox.parse("x" * 4097)
    with pytest.raises(ExprSyntaxError):
        ox.parse("(" * 100 + "x" + ")" * 100)
    with pytest.raises(ExprSyntaxError):
        ox.parse("x $ p")


def test_offsets_are_bytes():
    # U+3000 is whitespace to the tokenizer and three bytes in UTF-8
    with pytest.raises(ExprSyntaxError) as info:
        ox.parse("x\u3000+ ")
    assert info.value.offset == 6
    with pytest.raises(ExprSyntaxError) as info:
        ox.parse("mul(é)")
    assert info.value.offset == 4


def test_lower_one_plus_p_squared():
    N = 16
    P_ = ops.momentum_matrix(N).entries
    assert np.abs(ox.lower("1+p^2", N).entries - (np.eye(N) + P_ @ P_)).max() <= 1e-12


def test_lower_example1_diagonal():
    assert np.allclose(np.diag(ox.lower("diag(example1)", 4).entries), [1, 0.5, 3, 0.25])


def test_lower_inverse_contract():
    N = 24
    M = ox.lower("mul(1+x^2)", N).entries
    Mi = ox.lower("inv(mul(1+x^2))", N).entries
    assert np.abs(M @ Mi - np.eye(N)).max() <= 1e-9


def test_lower_scalar_division():
    N = 10
    a = ox.lower("mul(2*x/(1+x^2))", N).entries
    b = ops.multiplication_operator(lambda x: 2 * x / (1 + x * x), N).entries
    assert np.abs(a - b).max() < 1e-15


def test_lower_sequences_and_errors():
    seq = AlphaSequence("mine", np.arange(1, 7, dtype=float))
    assert np.allclose(np.diag(ox.lower("diag(mine)", 6, sequences={"mine": seq}).entries),
                       np.arange(1, 7))
    with pytest.raises(LoweringError):
        ox.lower("diag(unknown)", 4)
    with pytest.raises(LoweringError):
        ox.lower("diag(mine)", 8, sequences={"mine": seq})
    with pytest.raises(SingularityError):
        ox.lower("inv(x)", 5)  # odd truncation of x has a zero eigenvalue


def test_kernel_mode_only_for_registered_kernel():
    N = 12
    k = ox.lower("inv(1+p^2)", N, inverse_mode="kernel").entries
    m = ox.lower("inv(1+p^2)", N).entries
    assert np.abs(k - m).max() > 1e-6  # distinct routes
    a = ox.lower("inv(mul(1+x^2))", N, inverse_mode="kernel").entries
    b = ox.lower("inv(mul(1+x^2))", N).entries
    assert np.array_equal(a, b)


def test_scalar_function():
    f = ox.scalar_function("x^2 + 2*(1 - 3*x^2)/(1 + x^2)^2")
    assert f(np.array([0.0]))[0] == 2.0
    g = ox.scalar_function("x^2 - 2/(1 + x^2)")
    assert g(np.array([0.0]))[0] == -2.0


def test_printer_constants():
    assert ox.to_source(Const(1j)) == "i"
    assert ox.to_source(Const(2.5)) == "2.5"
    assert ox.to_source(Mul(Const(3), X())) == "3*x"
    assert ox.to_source(Mul(Const(-3), X())) == "(0 - 3)*x"
    assert ox.to_source(Sub(X(), Sub(P(), X()))) == "x - (p - x)"
    assert ox.to_source(Pow(Pow(X(), 2), 3)) == "(x^2)^3"


# random ASTs -------------------------------------------------------------------

def _scalar_tree(rng, d):
    if d <= 1 or rng.random() < 0.3:
        return X() if rng.random() < 0.5 else Const(float(rng.integers(0, 9)))
    k = rng.integers(0, 5)
    if k == 4:
        return Pow(_scalar_tree(rng, d - 1), int(rng.integers(0, 4)))
    cls = (Add, Sub, Mul, Div)[k]
    return cls(_scalar_tree(rng, d - 1), _scalar_tree(rng, d - 1))


def _const(rng):
    choice = rng.integers(0, 4)
    if choice == 0:
        return Const(1j)
    if choice == 1:
        return Const(float(rng.integers(0, 100)))
    if choice == 2:
        return Const(round(float(rng.random()) * 10, 3))
    return Const(complex(rng.normal(), rng.normal()))


def random_tree(rng, d):
    if d <= 1 or rng.random() < 0.2:
        k = rng.integers(0, 4)
        return (X(), P(), _const(rng), Diag("ladder"))[k]
    k = rng.integers(0, 7)
    if k < 3:
        return (Add, Sub, Mul)[k](random_tree(rng, d - 1), random_tree(rng, d - 1))
    if k == 3:
        return Pow(random_tree(rng, d - 1), int(rng.integers(0, 5)))
    if k == 4:
        return Inv(random_tree(rng, d - 1))
    if k == 5:
        return MulOp(_scalar_tree(rng, min(d - 1, 4)))
    return random_tree(rng, d - 1)


def test_print_parse_fixed_point_1000_trees():
    rng = np.random.default_rng(20240611)
    for _ in range(1000):
        t = random_tree(rng, int(rng.integers(1, 11)))
        s = ox.to_source(t)
        assert ox.to_source(ox.parse(s)) == s


def test_canonical_trees_round_trip_exactly():
    rng = np.random.default_rng(5)
    checked = 0
    for _ in range(500):
        t = random_tree(rng, int(rng.integers(1, 8)))
        s = ox.to_source(t)
        if all(c.imag == 0 and c.real >= 0 or c == 1j for c in _consts(t)):
            assert ox.parse(s) == t
            checked += 1
    assert checked > 100


def _consts(t):
    if isinstance(t, Const):
        yield t.value
    for name in ("left", "right", "base", "arg", "func"):
        child = getattr(t, name, None)
        if child is not None:
            yield from _consts(child)


def _operator_tree(rng, d):
    """Trees without Inv, so lowering never hits the condition guard."""
    if d <= 1 or rng.random() < 0.25:
        return (X(), P(), _const(rng))[rng.integers(0, 3)]
    k = rng.integers(0, 4)
    if k == 3:
        return Pow(_operator_tree(rng, d - 1), int(rng.integers(0, 3)))
    return (Add, Sub, Mul)[k](_operator_tree(rng, d - 1), _operator_tree(rng, d - 1))


def test_lowering_is_a_homomorphism():
    rng = np.random.default_rng(11)
    N = 8
    L = ox.Lowering(N)
    for _ in range(100):
        a, b = _operator_tree(rng, 4), _operator_tree(rng, 4)
        la, lb = L(a).entries, L(b).entries
        assert np.array_equal(L(Add(a, b)).entries, la + lb)
        assert np.array_equal(L(Mul(a, b)).entries, la @ lb)


SRC = ["10 + p^2", "mul(1 + x^2)", "inv(x*p + 2.25)", "diag(example1)*x - p^3",
       "x + diag(ladder)", "12.5e3*mul(x^10)"]


def _tokens(src):
    return [t for t in ox._tokenize(src) if t.kind != "end"]


@settings(max_examples=200, deadline=None)
@given(idx=st.integers(0, len(SRC) - 1), pick=st.integers(0, 1000), frac=st.floats(0.01, 0.99))
def test_mid_token_prefix_offsets(idx, pick, frac):
    """A prefix cut inside a token reports its error within that token's span."""
    src = SRC[idx]
    multi = [t for t in _tokens(src) if t.end - t.start >= 2]
    tok = multi[pick % len(multi)]
    k = max(1, min(tok.end - tok.start - 1, int(frac * (tok.end - tok.start))))
    prefix = src[: tok.start + k]
    try:
        ox.parse(prefix)
    except ExprError as exc:
        assert tok.start <= exc.offset <= tok.start + k, (prefix, exc.offset)


def test_every_proper_prefix_fails_or_parses():
    for src in SRC:
        for cut in range(1, len(src)):
            try:
                ox.parse(src[:cut])
            except ExprError as exc:
                assert 0 <= exc.offset <= cut
