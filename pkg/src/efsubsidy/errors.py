"""Exception types shared across the package."""


class ContractError(Exception):
    """A precondition or postcondition of an operation was violated."""


class InvalidQueryError(ContractError, ValueError):
    """A value oracle was asked about goods outside its ground set."""


class NonDichotomousError(ContractError):
    """A marginal value outside {0, 1} was observed.

    ``agent``, ``bundle`` (bitmask) and ``good`` locate the offending query
    when known.
    """

    def __init__(self, message, agent=None, bundle=None, good=None, marginal=None):
        super().__init__(message)
        self.agent = agent
        self.bundle = bundle
        self.good = good
        self.marginal = marginal


class SizeGuardError(ContractError):
    """A brute-force referee refused an input that is too large to enumerate."""


class ParseError(ValueError):
    """An instance, solution or config document failed validation.

    ``where`` is a dotted path to the offending field (``agents[2].groups``).
    """

    def __init__(self, message, where=None):
        self.where = where
        super().__init__(f"{where}: {message}" if where else message)
