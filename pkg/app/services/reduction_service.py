"""
Instance transformations showing that packing an arbitrary degree sequence with a
tree degree sequence is hard, and a brute-force decider to certify that each
transformation preserves the answer on small instances.
"""
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from itertools import combinations
from typing import FrozenSet, Iterator, Optional, Sequence, Tuple

from config import settings
from app.services.degseq_service import DegreeSequence, is_graphical, is_tree_sequence, require_same_length
from app.services.errors import DomainError, ResourceGuardError
from app.services.tree_service import Edge

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class BipartitePairInstance:
    """Two bipartite degree sequences on classes of sizes n1 and n2."""

    n1: int
    n2: int
    d: Tuple[Tuple[int, ...], Tuple[int, ...]]
    f: Tuple[Tuple[int, ...], Tuple[int, ...]]

    def __post_init__(self):
        if self.n1 < 1 or self.n2 < 1:
            raise DomainError("Both vertex classes need at least one vertex")
        d = (tuple(self.d[0]), tuple(self.d[1]))
        f = (tuple(self.f[0]), tuple(self.f[1]))
        for name, (left, right) in (("D", d), ("F", f)):
            if len(left) != self.n1 or len(right) != self.n2:
                raise DomainError(f"{name} does not match class sizes {self.n1} and {self.n2}")
            if any(x < 0 for x in left + right):
                raise DomainError(f"{name} has a negative degree")
            if sum(left) != sum(right):
                raise DomainError(f"{name} class sums differ: {sum(left)} and {sum(right)}")
            if any(x > self.n2 for x in left) or any(x > self.n1 for x in right):
                raise DomainError(f"{name} has a degree larger than the opposite class")
        object.__setattr__(self, "d", d)
        object.__setattr__(self, "f", f)


@dataclass(frozen=True)
class SimplePairInstance:
    d: DegreeSequence
    f: DegreeSequence

    def __post_init__(self):
        require_same_length(self.d, self.f)

    @classmethod
    def of(cls, d: Sequence[int], f: Sequence[int]) -> "SimplePairInstance":
        return cls(DegreeSequence.of(d), DegreeSequence.of(f))

    @property
    def n(self) -> int:
        return self.d.n


def bipartite_to_simple(instance: BipartitePairInstance) -> SimplePairInstance:
    """Add K_{n1} on class 1 to D and K_{n2} on class 2 to F."""
    d_left, d_right = instance.d
    f_left, f_right = instance.f
    d = [x + instance.n1 - 1 for x in d_left] + list(d_right)
    f = list(f_left) + [x + instance.n2 - 1 for x in f_right]
    return SimplePairInstance.of(d, f)


def add_dominating_vertex(instance: SimplePairInstance) -> SimplePairInstance:
    """D' = d_1+1, ..., d_n+1, n and F' = f_1, ..., f_n, 0."""
    n = instance.n
    d = [x + 1 for x in instance.d.degrees] + [n]
    f = list(instance.f.degrees) + [0]
    return SimplePairInstance.of(d, f)


def add_pendant_gadget(instance: SimplePairInstance) -> SimplePairInstance:
    """D' = d_1, ..., d_n, 1, 1 and F' = f_1+1, ..., f_n+1, n, 0."""
    n = instance.n
    d = list(instance.d.degrees) + [1, 1]
    f = [x + 1 for x in instance.f.degrees] + [n, 0]
    return SimplePairInstance.of(d, f)


def tree_excess(sequence: DegreeSequence) -> int:
    """Degree sum minus 2n - 2; zero for tree sequences."""
    return sequence.total() - (2 * sequence.n - 2)


def reduce_to_tree_sequence(instance: SimplePairInstance) -> SimplePairInstance:
    """
    Make D a tree sequence while preserving the answer: one dominating vertex if D
    has a zero or too small a sum, then pendant gadgets until the excess is zero.
    """
    current = instance
    while min(current.d.degrees) == 0 or tree_excess(current.d) < 0:
        current = add_dominating_vertex(current)
        logger.debug(f"Added dominating vertex, n={current.n}, excess={tree_excess(current.d)}")
    excess = tree_excess(current.d)
    if excess % 2:
        raise DomainError(f"Degree sum of D is odd (excess {excess}), no realization exists")
    steps = excess // 2
    for _ in range(steps):
        current = add_pendant_gadget(current)
    logger.info(f"Reduced to a tree sequence on {current.n} vertices with {steps} pendant gadgets")
    if not is_tree_sequence(current.d):
        raise DomainError("Reduction did not reach a tree sequence")
    return current


def reduction_chain(instance: BipartitePairInstance) -> SimplePairInstance:
    """Bipartite pair to a simple pair whose D is a tree degree sequence."""
    return reduce_to_tree_sequence(bipartite_to_simple(instance))


# Brute-force decider

def _realizations(
    degrees: Sequence[int], allowed: FrozenSet[Edge], chosen: FrozenSet[Edge] = frozenset()
) -> Iterator[FrozenSet[Edge]]:
    """
    Every simple graph with these degrees using only `allowed` edges, each once.
    The lowest vertex with residual demand picks all of its remaining neighbours
    among higher vertices in one step.
    """
    residual = list(degrees)
    if any(r < 0 for r in residual):
        return
    pending = [v for v, r in enumerate(residual, start=1) if r > 0]
    if not pending:
        yield chosen
        return
    if sum(residual) % 2 or not is_graphical(DegreeSequence(tuple(residual))):
        return
    v = pending[0]
    options = [u for u in pending[1:] if (v, u) in allowed]
    for picked in combinations(options, residual[v - 1]):
        following = residual.copy()
        following[v - 1] = 0
        for u in picked:
            following[u - 1] -= 1
        yield from _realizations(following, allowed, chosen | {(v, u) for u in picked})


def _complete_edges(n: int) -> FrozenSet[Edge]:
    return frozenset(combinations(range(1, n + 1), 2))


def _branch_decides(d: Tuple[int, ...], f: Tuple[int, ...], first_pick: Tuple[int, ...], owner: int) -> bool:
    n = len(d)
    residual = list(d)
    residual[owner - 1] = 0
    for u in first_pick:
        residual[u - 1] -= 1
    start = frozenset((owner, u) for u in first_pick)
    everything = _complete_edges(n)
    for graph in _realizations(residual, everything, start):
        if next(_realizations(f, everything - graph), None) is not None:
            return True
    return False


def brute_force_disjoint_decision(
    instance: SimplePairInstance, guard_n: Optional[int] = None, workers: int = 1
) -> bool:
    """True iff D and F have edge-disjoint simple-graph realizations (exhaustive search)."""
    limit = guard_n if guard_n is not None else settings.guard_n_brute_force
    n = instance.n
    if n > limit:
        raise ResourceGuardError(f"Brute-force decision is limited to n <= {limit}, got {n}")
    d, f = instance.d.degrees, instance.f.degrees
    if not (is_graphical(instance.d) and is_graphical(instance.f)):
        return False
    pending = [v for v, r in enumerate(d, start=1) if r > 0]
    if not pending:
        return next(_realizations(f, _complete_edges(n)), None) is not None
    owner = pending[0]
    branches = list(combinations(pending[1:], d[owner - 1]))
    if workers > 1 and len(branches) > 1:
        with ProcessPoolExecutor(max_workers=workers) as executor:
            results = executor.map(
                _branch_decides, [d] * len(branches), [f] * len(branches), branches, [owner] * len(branches)
            )
            return any(results)
    return any(_branch_decides(d, f, branch, owner) for branch in branches)


def brute_force_bipartite_decision(instance: BipartitePairInstance, guard_n: Optional[int] = None) -> bool:
    """True iff the bipartite pair has edge-disjoint bipartite realizations."""
    limit = guard_n if guard_n is not None else settings.guard_n_brute_force
    n1, n2 = instance.n1, instance.n2
    if n1 + n2 > limit:
        raise ResourceGuardError(f"Brute-force decision is limited to n <= {limit}, got {n1 + n2}")
    crossing = frozenset((i, n1 + j) for i in range(1, n1 + 1) for j in range(1, n2 + 1))
    d = list(instance.d[0]) + list(instance.d[1])
    f = list(instance.f[0]) + list(instance.f[1])
    for graph in _realizations(d, crossing):
        if next(_realizations(f, crossing - graph), None) is not None:
            return True
    return False

