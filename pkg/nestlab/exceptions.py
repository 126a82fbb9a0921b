class NestlabError(Exception):
    """Base class for every error raised by nestlab."""


class InvalidInputError(NestlabError, ValueError):
    """Base error for inputs that violate a documented precondition."""


class NonFiniteError(InvalidInputError):
    def __init__(self, what: str = "matrix"):
        self.what = what
        super().__init__(f"{what} contains NaN or infinite entries")


class RankDeficientError(InvalidInputError):
    def __init__(self, rank: int, expected: int):
        self.rank = rank
        self.expected = expected
        super().__init__(
            f"columns are linearly dependent: numerical rank {rank}, expected {expected}"
        )


class DimensionMismatchError(InvalidInputError):
    def __init__(self, left: int | tuple, right: int | tuple, what: str = "dimension"):
        self.left = left
        self.right = right
        super().__init__(f"{what} mismatch: {left} != {right}")


class NotOrthogonalError(InvalidInputError):
    def __init__(self, label: str, overlap: float):
        self.label = label
        self.overlap = overlap
        super().__init__(f"{label} are not orthogonal (product norm {overlap:.3e})")


class BadFlagError(InvalidInputError):
    def __init__(self, dims, message: str):
        self.dims = list(dims)
        super().__init__(f"invalid flag {self.dims}: {message}")


class NotDistanceOneError(InvalidInputError):
    def __init__(self, distance: float):
        self.distance = distance
        super().__init__(f"nests are at distance {distance:.12g}, not 1")


class ParseError(InvalidInputError):
    def __init__(self, source: str, message: str):
        self.source = source
        super().__init__(f"{source}: {message}")


class OutOfRangeError(NestlabError, ValueError):
    def __init__(self, name: str, value: float, low: float, high: float):
        self.name = name
        self.value = value
        self.low = low
        self.high = high
        super().__init__(f"{name}={value!r} outside [{low:.12g}, {high:.12g})")


class TooFarError(NestlabError):
    """Raised when two projections or nests are not strictly closer than 1.

    ``ranks`` carries the complement ranks when the failing call still computed
    them; they are unconstrained once the distance precondition fails.
    """

    def __init__(
        self,
        distance: float,
        threshold: float,
        label: str = "distance",
        ranks: tuple[int, int] | None = None,
    ):
        self.distance = distance
        self.threshold = threshold
        self.ranks = ranks
        super().__init__(f"{label} {distance:.12g} is not below {threshold:.12g}")


class UniquenessViolatedError(NestlabError):
    """Two chain elements are both within distance 1 of one projection.

    Mathematically impossible for a chain, so this signals a tolerance breakdown.
    """

    def __init__(self, candidates: list[int], distances: list[float]):
        self.candidates = candidates
        self.distances = distances
        super().__init__(
            f"chain elements {candidates} are all within distance 1 "
            f"(distances {[round(d, 12) for d in distances]})"
        )


class NoSuccessorError(NestlabError, IndexError):
    def __init__(self, index: int):
        self.index = index
        super().__init__(f"element {index} is the top of the nest and has no successor")


class NotInvertibleError(NestlabError):
    def __init__(self, message: str):
        super().__init__(message)


class SimilarityFallbackWarning(UserWarning):
    """The atom-product similarity was singular; a unitary similarity was used."""


class SimilarityBoundWarning(UserWarning):
    """The observed ‖S−I‖ exceeds the bound associated with the order isomorphism."""
