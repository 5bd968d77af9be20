"""Exception types shared across the package."""


class KnnPoisonError(Exception):
    """Base class for all errors raised by this package."""


class KTooLarge(KnnPoisonError):
    """k exceeds the number of available neighbor candidates."""

    def __init__(self, k: int, limit: int):
        self.k = k
        self.limit = limit
        super().__init__(f"k={k} exceeds the {limit} available neighbor candidates")


class DuplicatePoints(KnnPoisonError):
    """Two points share identical coordinates."""

    def __init__(self, first, second, message: str | None = None):
        self.first = first
        self.second = second
        super().__init__(message or f"duplicate points at {first} and {second}")


class UnknownQuery(KnnPoisonError):
    """Query id does not refer to an indexed point."""


class NonpositiveRadius(KnnPoisonError):
    """A partition radius r(x) <= 0; the scale level log(r) is undefined."""


class ClusterTooLarge(KnnPoisonError):
    """Brute-force enumeration of a cluster would exceed the configured cap."""

    def __init__(self, members: int, cap: int, subsets: int | None = None):
        self.members = members
        self.cap = cap
        self.subsets = subsets
        if subsets is None:
            msg = f"cluster has {members} members, cap is {cap}"
        else:
            msg = f"cluster of {members} members needs {subsets} subsets, cap is {cap}"
        msg += "; raise eps, lower k, or use practical mode"
        super().__init__(msg)


class InstanceTooLarge(KnnPoisonError):
    """Exhaustive oracle enumeration would exceed the configured limit."""

    def __init__(self, subsets: int, limit: int):
        self.subsets = subsets
        self.limit = limit
        super().__init__(f"oracle would enumerate {subsets} flip sets, limit is {limit}")


class ParseError(KnnPoisonError):
    """Malformed dataset or plan file."""

    def __init__(self, line: int | None, reason: str):
        self.line = line
        self.reason = reason
        where = f"line {line}: " if line is not None else ""
        super().__init__(f"{where}{reason}")
