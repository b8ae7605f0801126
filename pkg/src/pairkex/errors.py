"""Exception hierarchy shared across the package.

Everything raised on purpose derives from PairkexError so callers can
catch one base class.  The CLI maps each subclass to a distinct exit
code, see cli.EXIT_CODES.
"""


class PairkexError(Exception):
    """Base class for all errors raised by this package."""


class ParamError(PairkexError):
    """Parameter generation or parameter file is unusable."""


class KeyError_(PairkexError):
    """Key material is missing, malformed, or inconsistent."""


class ValidationError(PairkexError):
    """A cryptographic value failed validation (off curve, wrong order,
    identity where forbidden, scalar out of range)."""


class DecodeError(ValidationError):
    """Wire bytes could not be decoded.  `reason` is one of
    "length", "prefix", "curve", "subgroup", "range"."""

    def __init__(self, message: str, reason: str):
        super().__init__(message)
        self.reason = reason


class FormulaError(PairkexError):
    """Base for symbolic-engine errors."""


class FormulaParseError(FormulaError):
    """Formula text failed to parse; `pos` is the offset of the error."""

    def __init__(self, message: str, pos: int = -1):
        super().__init__(message)
        self.pos = pos


class FormulaTypeError(FormulaError):
    """Formula is syntactically fine but ill-typed (scalar where an
    element is needed, pairing of non-elements, and so on)."""


class UntranslatableError(FormulaError):
    """A term matches no substitution rule.  `term` is its rendering,
    `reason` says which rule requirement it misses."""

    def __init__(self, term: str, reason: str = ""):
        super().__init__(f"{term}: {reason}" if reason else term)
        self.term = term
        self.reason = reason


class ProtocolError(PairkexError):
    """Protocol state machine misuse or unknown catalog entry."""


class AgreementError(PairkexError):
    """An honest run produced mismatching session keys."""


class InvariantError(PairkexError):
    """An analysis-harness invariant did not hold."""
