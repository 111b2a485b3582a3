"""Exception taxonomy shared across the lab."""


class InputError(ValueError):
    """Bad argument (unknown id, negative radius, inverted interval, ...)."""


class DegenerateInputError(InputError):
    """Input is structurally empty: zero measure, single-point cloud, ..."""


class DiagonalError(InputError):
    """Kernel evaluated on the diagonal x == y, where it is undefined."""


class BudgetError(RuntimeError):
    """A resource budget would be exceeded; carries the feasible maximum."""

    def __init__(self, msg, max_feasible=None):
        super().__init__(msg)
        self.max_feasible = max_feasible


class SearchExhaustedError(RuntimeError):
    """Outward scan for a good radius ran out of candidates."""


class CertificationError(RuntimeError):
    """A pipeline certification step failed; carries the failing witness."""

    def __init__(self, msg, witness=None):
        super().__init__(msg)
        self.witness = witness
