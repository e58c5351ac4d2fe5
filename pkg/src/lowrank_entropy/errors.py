"""Exception types raised across the package."""


class LowRankEntropyError(Exception):
    pass


class OutOfRange(LowRankEntropyError, ValueError):
    pass


class NotMonotone(LowRankEntropyError, ValueError):
    pass


class InvalidEps(LowRankEntropyError, ValueError):
    pass


class DegenerateJump(LowRankEntropyError, ValueError):
    pass


class HorizonExceeded(LowRankEntropyError, ValueError):
    pass


class NotAdmissible(LowRankEntropyError, ValueError):
    pass


class OutOfDomain(LowRankEntropyError, ValueError):
    pass


class NotInShock(LowRankEntropyError, ValueError):
    pass


class InvalidCx(LowRankEntropyError, ValueError):
    pass


class ShapeMismatch(LowRankEntropyError, ValueError):
    pass


class CapExceeded(LowRankEntropyError, ValueError):
    pass


class ShockBeforeHorizon(LowRankEntropyError, ValueError):
    pass
