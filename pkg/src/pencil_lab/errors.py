"""Exception hierarchy shared by all modules.

The CLI maps these onto its exit-code contract: InputError -> 3,
NumericError (and subclasses) -> 4.
"""


class InputError(ValueError):
    """Invalid argument, configuration, or dimension mismatch."""


class NumericError(RuntimeError):
    """A numerical routine failed (non-convergence, overflow, no quadrature)."""


class DomainError(NumericError):
    """A quantity left its required domain, e.g. an operator that must be
    positive definite came out with a nonpositive eigenvalue."""
