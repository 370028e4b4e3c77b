"""
Degree sequences: the data model every other service builds on.

Vertices are 1-based and positional: vertex v has degree `degrees[v - 1]`.
"""
import logging
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Iterator, List, Tuple

import networkx as nx

from app.services.errors import DimensionError, DomainError

logger = logging.getLogger(__name__)


class SequenceClass(str, Enum):
    NOT_TREE = "not-tree"
    PATH = "path"
    STAR = "star"
    OTHER_TREE = "other-tree"


@dataclass(frozen=True)
class DegreeSequence:
    degrees: Tuple[int, ...]

    def __post_init__(self):
        degrees = tuple(self.degrees)
        if not degrees:
            raise DomainError("A degree sequence needs at least one vertex")
        for value in degrees:
            if isinstance(value, bool) or not isinstance(value, int):
                raise DomainError(f"Degrees must be integers, got {value!r}")
            if value < 0:
                raise DomainError(f"Degrees must be non-negative, got {value}")
        object.__setattr__(self, "degrees", degrees)

    @classmethod
    def of(cls, values: Iterable[int]) -> "DegreeSequence":
        return cls(tuple(int(v) for v in values))

    @classmethod
    def parse(cls, text: str) -> "DegreeSequence":
        """Parse the text form `2,2,1,1`."""
        try:
            values = [int(part) for part in text.replace(" ", "").split(",") if part != ""]
        except ValueError:
            raise DomainError(f"Cannot parse degree sequence {text!r}")
        return cls(tuple(values))

    @property
    def n(self) -> int:
        return len(self.degrees)

    def degree(self, vertex: int) -> int:
        if not 1 <= vertex <= self.n:
            raise DomainError(f"Vertex {vertex} out of range 1..{self.n}")
        return self.degrees[vertex - 1]

    def vertices(self) -> range:
        return range(1, self.n + 1)

    def leaves(self) -> List[int]:
        return [v for v in self.vertices() if self.degrees[v - 1] == 1]

    def non_leaves(self) -> List[int]:
        """Vertices of degree > 1."""
        return [v for v in self.vertices() if self.degrees[v - 1] > 1]

    def total(self) -> int:
        return sum(self.degrees)

    def to_text(self) -> str:
        return ",".join(str(d) for d in self.degrees)

    def __iter__(self) -> Iterator[int]:
        return iter(self.degrees)

    def __len__(self) -> int:
        return self.n


@dataclass(frozen=True)
class DegreeMatrix:
    rows: Tuple[DegreeSequence, ...]

    def __post_init__(self):
        rows = tuple(self.rows)
        if not rows:
            raise DomainError("A degree matrix needs at least one row")
        n = rows[0].n
        for index, row in enumerate(rows, start=1):
            if row.n != n:
                raise DimensionError(f"Row {index} has {row.n} entries, expected {n}")
        object.__setattr__(self, "rows", rows)

    @classmethod
    def of(cls, rows: Iterable[Iterable[int]]) -> "DegreeMatrix":
        return cls(tuple(DegreeSequence.of(row) for row in rows))

    @property
    def n(self) -> int:
        return self.rows[0].n

    @property
    def c(self) -> int:
        return len(self.rows)

    def max_degree(self) -> int:
        return max(max(row.degrees) for row in self.rows)


def is_graphical(sequence: DegreeSequence) -> bool:
    """True iff some simple labeled graph has exactly these degrees (Erdős–Gallai)."""
    return nx.is_graphical(list(sequence.degrees), method="eg")


def is_tree_sequence(sequence: DegreeSequence) -> bool:
    """True iff n >= 2, every degree is positive and the degrees sum to 2n - 2."""
    n = sequence.n
    return n >= 2 and min(sequence.degrees) >= 1 and sequence.total() == 2 * n - 2


def classify(sequence: DegreeSequence) -> SequenceClass:
    # Star is tested first: on n <= 3 the star and path shapes coincide.
    if not is_tree_sequence(sequence):
        return SequenceClass.NOT_TREE
    n = sequence.n
    if max(sequence.degrees) == n - 1:
        return SequenceClass.STAR
    if sequence.degrees.count(1) == 2 and all(d in (1, 2) for d in sequence.degrees):
        return SequenceClass.PATH
    return SequenceClass.OTHER_TREE


def sum_sequences(first: DegreeSequence, second: DegreeSequence) -> DegreeSequence:
    """Positionwise sum D + F."""
    require_same_length(first, second)
    return DegreeSequence(tuple(a + b for a, b in zip(first.degrees, second.degrees)))


def require_same_length(first: DegreeSequence, second: DegreeSequence):
    if first.n != second.n:
        raise DimensionError(f"Sequences have different lengths: {first.n} and {second.n}")


def require_tree_sequence(sequence: DegreeSequence, name: str = "D"):
    if not is_tree_sequence(sequence):
        raise DomainError(f"{name}={sequence.to_text()} is not a tree degree sequence")


def is_complementary_pair(first: DegreeSequence, second: DegreeSequence) -> bool:
    """Every vertex is a leaf in at least one of the two sequences."""
    require_same_length(first, second)
    return all(min(a, b) == 1 for a, b in zip(first.degrees, second.degrees))


def tree_sequences(n: int) -> Iterator[DegreeSequence]:
    """All tree degree sequences on n labeled vertices, in lexicographic order."""
    if n < 2:
        return
    yield from (DegreeSequence(tuple(c)) for c in _compositions(2 * n - 2, n))


def _compositions(total: int, parts: int) -> Iterator[List[int]]:
    if parts == 1:
        if total >= 1:
            yield [total]
        return
    for first in range(1, total - parts + 2):
        for rest in _compositions(total - first, parts - 1):
            yield [first] + rest
