"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument is outside the domain of the operation."""


class Infeasible(DomainError):
    """No solution exists for the given budgets (e.g. an undetectable attack)."""


class ParseError(DomainError):
    """A data file does not conform to its schema."""
