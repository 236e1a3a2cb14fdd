"""Exception hierarchy shared by the engine and the command line."""


class BocksteinError(Exception):
    pass


class MembershipError(BocksteinError):
    """A generator of the denominator is not in the span of the numerator."""


class WindowTooSmall(BocksteinError):
    """A computation needs degrees or filtrations outside the active window."""


class NonRegular(BocksteinError):
    """The sequence failed its regularity certificate."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class NotFreeError(BocksteinError):
    pass


class NonSquareZero(BocksteinError):
    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness
