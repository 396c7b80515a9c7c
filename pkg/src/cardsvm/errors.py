class DomainError(ValueError):
    """Input outside an operation's domain (bad parameters, infeasible request)."""


class FormatError(ValueError):
    """Malformed input file."""
