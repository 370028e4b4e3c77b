"""
Labeled trees with prescribed degrees: Prüfer coding, exact counting,
exhaustive enumeration and uniform random generation.
"""
import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Dict, FrozenSet, Iterable, Iterator, List, Optional, Tuple

import networkx as nx
from more_itertools import distinct_permutations

from config import settings
from app.services.degseq_service import DegreeSequence, require_tree_sequence
from app.services.errors import DomainError, ResourceGuardError, StructureError
from app.services.randomness import SeedLike, make_rng

logger = logging.getLogger(__name__)

Edge = Tuple[int, int]


def normalize_edge(u: int, v: int) -> Edge:
    return (u, v) if u < v else (v, u)


@dataclass(frozen=True)
class LabeledTree:
    """A tree on vertices 1..n; `edges` holds each edge once as (smaller, larger)."""

    n: int
    edges: FrozenSet[Edge]

    def __post_init__(self):
        if self.n < 1:
            raise StructureError("A tree needs at least one vertex")
        edges = frozenset(normalize_edge(u, v) for u, v in self.edges)
        if len(edges) != self.n - 1:
            raise StructureError(f"A tree on {self.n} vertices has {self.n - 1} edges, got {len(edges)}")
        for u, v in edges:
            if u == v:
                raise StructureError(f"Self-loop at vertex {u}")
            if not (1 <= u <= self.n and 1 <= v <= self.n):
                raise StructureError(f"Edge ({u}, {v}) leaves the vertex range 1..{self.n}")
        object.__setattr__(self, "edges", edges)
        if not nx.is_tree(self.to_graph()):
            raise StructureError("Edge set is not connected, so it is not a tree")

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[Iterable[int]]) -> "LabeledTree":
        return cls(n, frozenset(tuple(edge) for edge in edges))

    @classmethod
    def parse(cls, text: str) -> "LabeledTree":
        """Parse the text form: a `n=<int>` header then one `u v` edge per line."""
        lines = [line.strip() for line in text.strip().splitlines() if line.strip()]
        if not lines or not lines[0].startswith("n="):
            raise StructureError("Tree text must start with a 'n=<int>' line")
        try:
            n = int(lines[0][2:])
            edges = [tuple(int(x) for x in line.split()) for line in lines[1:]]
        except ValueError:
            raise StructureError("Tree text contains a non-integer token")
        if any(len(edge) != 2 for edge in edges):
            raise StructureError("Every edge line needs exactly two vertices")
        return cls.from_edges(n, edges)

    def to_graph(self) -> nx.Graph:
        graph = nx.Graph()
        graph.add_nodes_from(range(1, self.n + 1))
        graph.add_edges_from(self.edges)
        return graph

    def sorted_edges(self) -> List[Edge]:
        return sorted(self.edges)

    def degrees(self) -> List[int]:
        counts = [0] * self.n
        for u, v in self.edges:
            counts[u - 1] += 1
            counts[v - 1] += 1
        return counts

    def degree_sequence(self) -> DegreeSequence:
        return DegreeSequence(tuple(self.degrees()))

    def neighbors(self) -> Dict[int, List[int]]:
        adjacency: Dict[int, List[int]] = {v: [] for v in range(1, self.n + 1)}
        for u, v in self.sorted_edges():
            adjacency[u].append(v)
            adjacency[v].append(u)
        return adjacency

    def restrict(self, vertices: Iterable[int]) -> FrozenSet[Edge]:
        """Edges with both endpoints in `vertices`."""
        keep = set(vertices)
        return frozenset(e for e in self.edges if e[0] in keep and e[1] in keep)

    def to_text(self) -> str:
        lines = [f"n={self.n}"] + [f"{u} {v}" for u, v in self.sorted_edges()]
        return "\n".join(lines)


@dataclass(frozen=True)
class PruferCode:
    n: int
    code: Tuple[int, ...]

    def __post_init__(self):
        code = tuple(self.code)
        if self.n < 2:
            raise DomainError("Prüfer codes exist for n >= 2")
        if len(code) != self.n - 2:
            raise DomainError(f"A Prüfer code for n={self.n} has length {self.n - 2}, got {len(code)}")
        for symbol in code:
            if not 1 <= symbol <= self.n:
                raise DomainError(f"Prüfer symbol {symbol} outside 1..{self.n}")
        object.__setattr__(self, "code", code)


def prufer_decode(code: PruferCode) -> LabeledTree:
    graph = nx.from_prufer_sequence([symbol - 1 for symbol in code.code])
    return LabeledTree(code.n, frozenset(normalize_edge(u + 1, v + 1) for u, v in graph.edges()))


def prufer_encode(tree: LabeledTree) -> PruferCode:
    if tree.n < 2:
        raise StructureError("Prüfer codes exist for n >= 2")
    graph = nx.Graph()
    graph.add_nodes_from(range(tree.n))
    graph.add_edges_from((u - 1, v - 1) for u, v in tree.edges)
    if not nx.is_tree(graph):
        raise StructureError("Input is not a tree")
    return PruferCode(tree.n, tuple(symbol + 1 for symbol in nx.to_prufer_sequence(graph)))


def prufer_multiset(sequence: DegreeSequence) -> List[int]:
    """Sorted multiset in which vertex i appears d_i - 1 times."""
    return [v for v in sequence.vertices() for _ in range(sequence.degree(v) - 1)]


def count_trees(sequence: DegreeSequence) -> int:
    """Number of labeled trees with these degrees: (n-2)! / prod (d_k - 1)!."""
    require_tree_sequence(sequence)
    denominator = math.prod(math.factorial(d - 1) for d in sequence.degrees)
    return math.factorial(sequence.n - 2) // denominator


def count_trees_with_edge(sequence: DegreeSequence, i: int, j: int) -> int:
    """Number of realizations containing edge ij: (d_i + d_j - 2)(n-3)! / prod (d_k - 1)!."""
    require_tree_sequence(sequence)
    _require_vertex_pair(sequence, i, j)
    if sequence.n < 3:
        raise DomainError("Edge counts by joining need n >= 3")
    d_i, d_j = sequence.degree(i), sequence.degree(j)
    denominator = math.prod(math.factorial(d - 1) for d in sequence.degrees)
    return (d_i + d_j - 2) * math.factorial(sequence.n - 3) // denominator


def edge_probability(sequence: DegreeSequence, i: int, j: int) -> Fraction:
    """Probability that a uniform realization contains edge ij, i.e. (d_i + d_j - 2)/(n - 2)."""
    return Fraction(count_trees_with_edge(sequence, i, j), count_trees(sequence))


def _require_vertex_pair(sequence: DegreeSequence, i: int, j: int):
    if i == j:
        raise DomainError("Edge endpoints must differ")
    for vertex in (i, j):
        if not 1 <= vertex <= sequence.n:
            raise DomainError(f"Vertex {vertex} out of range 1..{sequence.n}")


def enumerate_trees(sequence: DegreeSequence) -> Iterator[LabeledTree]:
    """Every realization exactly once, ordered by the lexicographic order of Prüfer codes."""
    require_tree_sequence(sequence)
    n = sequence.n
    for code in distinct_permutations(prufer_multiset(sequence)):
        yield prufer_decode(PruferCode(n, tuple(code)))


def list_trees(sequence: DegreeSequence, guard_n: Optional[int] = None) -> List[LabeledTree]:
    """All realizations as a list, refused above the enumeration guard."""
    limit = guard_n if guard_n is not None else settings.guard_n_enumeration
    if sequence.n > limit:
        raise ResourceGuardError(f"Tree enumeration is limited to n <= {limit}, got {sequence.n}")
    return list(enumerate_trees(sequence))


def random_tree(sequence: DegreeSequence, seed: SeedLike) -> LabeledTree:
    """Uniform realization of `sequence`: shuffle the Prüfer multiset, then decode."""
    require_tree_sequence(sequence)
    rng = make_rng(seed)
    multiset = prufer_multiset(sequence)
    if len(multiset) > 1:
        multiset = [int(v) for v in rng.permutation(multiset)]
    return prufer_decode(PruferCode(sequence.n, tuple(multiset)))


def random_tree_by_leaf_attachment(sequence: DegreeSequence, seed: SeedLike) -> LabeledTree:
    """
    Uniform realization built leaf by leaf: the smallest current leaf is joined to
    vertex i with probability (d_i - 1)/(n - 2), then the leaf is removed.
    """
    require_tree_sequence(sequence)
    rng = make_rng(seed)
    residual = {v: sequence.degree(v) for v in sequence.vertices()}
    edges = set()
    while len(residual) > 2:
        leaf = min(v for v, d in residual.items() if d == 1)
        candidates = [v for v, d in residual.items() if v != leaf and d > 1]
        weights = [residual[v] - 1 for v in candidates]
        total = sum(weights)
        pick = int(rng.integers(total))
        for vertex, weight in zip(candidates, weights):
            if pick < weight:
                break
            pick -= weight
        edges.add(normalize_edge(leaf, vertex))
        residual[vertex] -= 1
        del residual[leaf]
    u, v = residual
    edges.add(normalize_edge(u, v))
    return LabeledTree(sequence.n, frozenset(edges))


def non_leaf_vertices(tree: LabeledTree) -> List[int]:
    return [v for v, d in enumerate(tree.degrees(), start=1) if d >= 2]


def is_caterpillar(tree: LabeledTree) -> bool:
    """True iff the vertices of degree >= 2 induce a path (or there is at most one of them)."""
    spine = non_leaf_vertices(tree)
    if len(spine) <= 1:
        return True
    induced = tree.to_graph().subgraph(spine)
    return nx.is_connected(induced) and max(d for _, d in induced.degree()) <= 2


def enumerate_caterpillars(sequence: DegreeSequence) -> Iterator[LabeledTree]:
    """
    Every caterpillar realization exactly once: each undirected spine through the
    non-leaf vertices, times each assignment of the leaves to spine vertices.
    """
    require_tree_sequence(sequence)
    n = sequence.n
    spine_vertices = sequence.non_leaves()
    leaves = sequence.leaves()
    if len(spine_vertices) <= 1:
        yield next(enumerate_trees(sequence))
        return
    for spine in distinct_permutations(spine_vertices):
        if spine[0] > spine[-1]:
            continue
        spine_edges = [normalize_edge(a, b) for a, b in zip(spine, spine[1:])]
        slots: List[int] = []
        for position, vertex in enumerate(spine):
            inner = 1 if position in (0, len(spine) - 1) else 2
            slots.extend([vertex] * (sequence.degree(vertex) - inner))
        for assignment in distinct_permutations(slots):
            leaf_edges = [normalize_edge(leaf, hub) for leaf, hub in zip(leaves, assignment)]
            yield LabeledTree(n, frozenset(spine_edges + leaf_edges))


def edge_index(n: int) -> Dict[Edge, int]:
    """Bit position of every vertex pair of K_n."""
    return {pair: bit for bit, pair in enumerate(combinations(range(1, n + 1), 2))}


def edge_mask(tree: LabeledTree, index: Optional[Dict[Edge, int]] = None) -> int:
    index = index or edge_index(tree.n)
    mask = 0
    for edge in tree.edges:
        mask |= 1 << index[edge]
    return mask
