"""Exception types shared across the package.

Parse and construction problems raise ValueError subclasses so callers can
catch one family.  Horizon problems are separate: BeyondHorizon is a lookup
past the simulated range, OverflowHorizon is a run aborted by the memory
budget (it carries the last fully computed slice index).
"""


class RuleFileError(ValueError):
    """Base class for rule-table and rule-file problems."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class RuleSyntaxError(RuleFileError):
    pass


class UnknownState(RuleFileError):
    pass


class ArityMismatch(RuleFileError):
    pass


class QuiescentViolation(RuleFileError):
    pass


class NotTotal(RuleFileError):
    pass


class NoMatch(LookupError):
    """A rule table had no matching rule for a neighbor tuple."""


class NotCoprime(ValueError):
    pass


class XNotSmallest(ValueError):
    pass


class AlphabetMismatch(ValueError):
    pass


class PlaneViolation(ValueError):
    """A state was found on the wrong diagonal plane of a counter diagram."""


class BeyondHorizon(IndexError):
    """A site lookup or word extraction past the simulated horizon."""


class CoordinateOverflow(ValueError):
    """Requested horizon does not fit the packed 64-bit coordinate encoding."""


class OverflowHorizon(RuntimeError):
    """The site budget was exhausted before the requested horizon.

    ``last_slice`` is the index of the last slice that was fully computed.
    """

    def __init__(self, last_slice, budget):
        self.last_slice = last_slice
        self.budget = budget
        super().__init__(
            f"site budget {budget} exhausted; last complete slice is t={last_slice}"
        )
