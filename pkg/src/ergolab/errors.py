"""Exception hierarchy shared by all modules."""


class ErgolabError(Exception):
    """Base class for domain failures (CLI exit status 1)."""


class RangeError(ErgolabError, ValueError):
    pass


class ShapeError(ErgolabError, ValueError):
    pass


class IrreducibilityError(ErgolabError):
    def __init__(self, message, classes=()):
        super().__init__(message)
        self.classes = [list(c) for c in classes]


class InconsistentMarginalsError(ErgolabError):
    pass


class ConstructionError(ErgolabError):
    pass


class BudgetError(ErgolabError):
    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class DecodeError(ErgolabError):
    pass


class ClassifierError(ErgolabError):
    pass
