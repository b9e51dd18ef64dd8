"""Error hierarchy for the chore division engine."""


class ChoreDivisionError(Exception):
    """Base class for every error raised by this package."""


class InputError(ChoreDivisionError, ValueError):
    """Malformed input: intervals, densities, mark targets or files."""


class ContractViolation(ChoreDivisionError):
    """A strategy was asked a question outside its precondition."""


class ProtocolError(ChoreDivisionError):
    """An internal guarantee of the protocol failed.

    The transcript accumulated up to the failure is attached so the caller
    can persist it for diagnosis.
    """

    def __init__(self, message: str, transcript=None):
        super().__init__(message)
        self.transcript = transcript
