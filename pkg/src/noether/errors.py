"""Exception hierarchy shared by all modules."""


class NoetherError(Exception):
    """Base class for every error raised by this package."""


class DimensionError(NoetherError, ValueError):
    """Matrix or vector shapes are incompatible with the requested operation."""


class ArgumentError(NoetherError, ValueError):
    """An argument is malformed (bad partition, non-prime conductor, ...)."""


class PreconditionError(NoetherError, ValueError):
    """A mathematical precondition does not hold for otherwise well-formed input."""


class SpecError(NoetherError, ValueError):
    """(m, n, r) does not define a valid non-abelian C_m x|_r C_n."""


class WitnessError(NoetherError, ValueError):
    """A witness fails the linear relation or the joint gcd condition."""


class ReducibilityError(NoetherError, ArithmeticError):
    """An active subcolumn vanished, which is impossible for a valid spec."""


class ConsistencyError(NoetherError, AssertionError):
    """An identity that must hold unconditionally was violated."""


class ParseError(NoetherError, ValueError):
    """Text could not be parsed as a cyclotomic integer."""


class ReproductionError(NoetherError):
    """One or more published triples failed to certify."""

    def __init__(self, failures, records=()):
        self.failures = list(failures)
        self.records = list(records)
        names = ", ".join(f"(q={q}, p={p}, x={x}): {why}" for q, p, x, why in self.failures)
        super().__init__(f"{len(self.failures)} triple(s) failed: {names}")
