"""Exception hierarchy.

Every error raised on bad user input derives from :class:`WeakstatError`, so
the CLI can report it without a traceback.
"""


class WeakstatError(Exception):
    """Base class for all library errors."""


class DimMismatch(WeakstatError, ValueError):
    pass


class NonSquare(WeakstatError, ValueError):
    pass


class NotHermitian(WeakstatError, ValueError):
    pass


class InvalidState(WeakstatError, ValueError):
    """Matrix fails a DensityMatrix / Projector / Effect / Ket invariant."""


class StrengthTooLarge(WeakstatError, ValueError):
    pass


class SingularGram(WeakstatError, ValueError):
    pass


class ZeroProbabilityOutcome(WeakstatError, ValueError):
    pass


class IncompletePVM(WeakstatError, ValueError):
    pass


class BadDimension(WeakstatError, ValueError):
    pass


class WrongScenario(WeakstatError, ValueError):
    pass


class MissingEvents(WeakstatError, KeyError):
    pass


class InsufficientPostSelection(WeakstatError, ValueError):
    pass
