"""Exception hierarchy.

The CLI maps these onto exit codes, so keep the split between a malformed
argument (``ShapeError``/``ContractError``) and a size guard
(``ResourceGuardError``) intact.
"""


class TwirlError(Exception):
    """Base class for all library errors."""


class ShapeError(TwirlError, ValueError):
    """Operand dimensions do not match the declared tensor structure."""


class ContractError(TwirlError, ValueError):
    """A precondition of an operation is violated (order, route, normalization)."""


class NotPSDError(ContractError):
    """Operator expected to be positive semidefinite has a negative eigenvalue."""

    def __init__(self, min_eigenvalue: float, tol: float):
        self.min_eigenvalue = min_eigenvalue
        super().__init__(
            f"operator is not PSD: most negative eigenvalue {min_eigenvalue:.3e} "
            f"below -{tol:.1e}"
        )


class ResourceGuardError(TwirlError, RuntimeError):
    """Requested problem exceeds the dense desk-scale limits."""


class DecompositionError(TwirlError, RuntimeError):
    """Randomized block diagonalization did not settle after its retries."""
