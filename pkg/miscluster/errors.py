"""Exception hierarchy"""
from typing import Optional


class MISClusterError(Exception):
    """Base class for every error raised by miscluster"""


class InputError(MISClusterError, ValueError):
    """Bad input data, bad options or a violated precondition"""


class EmptyInputError(InputError):
    pass


class RaggedRowError(InputError):
    """A data line has a different field count than the first line"""

    def __init__(self, path, line: int, expected: int, actual: int):
        self.path = str(path)
        self.line = line
        self.expected = expected
        self.actual = actual
        super().__init__(
            f"{self.path}:{line}: expected {expected} fields, found {actual}"
        )


class SupportError(InputError):
    """q puts mass on a category where p has none"""

    def __init__(self, category: str, q: float):
        self.category = category
        self.q = q
        super().__init__(
            f"category {category!r} has q={q:.6g} but p=0; KL divergence is undefined"
        )


class AlgorithmError(MISClusterError, RuntimeError):
    """The algorithm cannot proceed on otherwise valid input"""


class UnsplittableError(AlgorithmError):
    """Every active attribute is constant within the working set"""

    def __init__(self, size: int, message: Optional[str] = None):
        self.size = size
        super().__init__(
            message or f"working set of {size} rows is unsplittable: all active attributes are constant"
        )
