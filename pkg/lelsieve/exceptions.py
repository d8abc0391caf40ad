class LelError(Exception):
    """Base class for every domain error raised by lelsieve."""


class UsageError(LelError):
    pass


class EmptyInput(LelError):
    pass


class InvalidStep(LelError):
    pass


class NotClosed(LelError):
    pass


class NotSimple(LelError):
    pass


class QuadratureNotConverged(LelError):
    pass


class PrecisionInsufficient(LelError):
    pass


class InsufficientData(LelError):
    pass


class SapDoesNotFit(LelError):
    pass


class ZeroDensity(LelError):
    pass


class OpenWalkNoLast(LelError):
    pass


class LengthTooLarge(LelError):
    pass


class CorruptRecord(LelError):
    def __init__(self, msg: str, line_number: int):
        super().__init__(f"line {line_number}: {msg}")
        self.line_number = line_number
