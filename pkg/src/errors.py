"""
Exceptions raised by the HPDS reduction toolkit.

The CLI maps them onto exit codes: InputError -> 2, PreconditionError -> 3,
NumericalError -> 4.
"""


class HpdsError(Exception):
    """Base class for every error raised by this package."""

    exit_code = 1


class InputError(HpdsError, ValueError):
    """Bad shapes, dimensions, or unreadable input files."""

    exit_code = 2


class PreconditionError(HpdsError):
    """A hypothesis required by the requested analysis does not hold."""

    exit_code = 3


class NotAlmostSymmetricError(PreconditionError):
    """Tensor is not invariant under permutations of its first k-1 indices."""


class NotSymmetricError(PreconditionError):
    """Tensor is not invariant under permutations of all its indices."""


class NotOdecoError(PreconditionError):
    """Symmetric tensor whose HOSVD core is not diagonal."""

    def __init__(self, off_diagonal_mass, threshold):
        self.off_diagonal_mass = off_diagonal_mass
        self.threshold = threshold
        super().__init__(
            f"tensor is not orthogonally decomposable: off-diagonal core mass "
            f"{off_diagonal_mass:.3e} exceeds {threshold:.3e}"
        )


class OddOrderError(PreconditionError):
    """Strong controllability was requested for an odd-order tensor."""

    def __init__(self, order):
        self.order = order
        super().__init__(
            f"strong controllability via the rank test needs an even tensor order, got k={order}; "
            f"for odd k the rank condition only certifies accessibility"
        )


class NumericalError(HpdsError, ArithmeticError):
    """Non-finite values or a failed factorization."""

    exit_code = 4
