"""Exception hierarchy shared by every module."""


class QuasiBasisError(Exception):
    """Base class of all errors raised by :mod:`quasibasis`."""


class ConfigurationError(QuasiBasisError, ValueError):
    """Invalid parameters, out-of-range sizes, malformed config files."""


class ContractError(QuasiBasisError, ValueError):
    """A precondition of an operation is violated (dimension, basis, dtype)."""


class BasisMismatchError(ContractError):
    def __init__(self, left, right):
        super().__init__(f"basis mismatch: {left!r} vs {right!r}")
        self.left = left
        self.right = right


class NumericError(QuasiBasisError, ArithmeticError):
    """A non-finite value appeared where a finite one is required."""

    def __init__(self, message, node=None):
        if node is not None:
            message = f"{message} (at x={node!r})"
        super().__init__(message)
        self.node = node


class SingularityError(QuasiBasisError, ArithmeticError):
    """Matrix is singular or too badly conditioned to invert."""

    def __init__(self, cond, cond_max=None):
        msg = f"matrix is singular or ill-conditioned: cond={cond:.3e}"
        if cond_max is not None:
            msg += f" exceeds limit {cond_max:.1e}"
        super().__init__(msg)
        self.cond = cond
        self.cond_max = cond_max


class ExprError(QuasiBasisError, ValueError):
    """Base class for operator-expression errors. ``offset`` is a byte offset."""

    def __init__(self, message, offset=None, expected=()):
        self.offset = offset
        self.expected = tuple(sorted(expected))
        text = message
        if offset is not None:
            text = f"{message} at offset {offset}"
        if self.expected:
            text += f"; expected one of: {', '.join(self.expected)}"
        super().__init__(text)


class ExprSyntaxError(ExprError):
    pass


class UnknownIdentifierError(ExprError):
    pass


class ExponentOverflowError(ExprError):
    pass


class LoweringError(ExprError):
    """Expression is well formed but cannot be turned into a matrix."""
