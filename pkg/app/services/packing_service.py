"""
Edge-disjoint packings of tree degree sequences.

Every packer checks its own output (positional degrees and pairwise
disjointness) before returning it.
"""
import logging
import math
from dataclasses import dataclass, field
from itertools import combinations
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Set, Tuple

import networkx as nx

from config import settings
from app.services.degseq_service import (
    DegreeMatrix,
    DegreeSequence,
    SequenceClass,
    classify,
    is_complementary_pair,
    is_graphical,
    require_same_length,
    require_tree_sequence,
    sum_sequences,
)
from app.services.errors import (
    DimensionError,
    DomainError,
    InfeasibleError,
    InvariantError,
    ResourceGuardError,
    StructureError,
)
from app.services.randomness import SeedLike, make_rng, spawn_seeds
from app.services.tree_service import (
    Edge,
    LabeledTree,
    PruferCode,
    edge_index,
    edge_mask,
    enumerate_caterpillars,
    enumerate_trees,
    is_caterpillar,
    normalize_edge,
    prufer_decode,
    prufer_multiset,
    random_tree,
)

logger = logging.getLogger(__name__)

Adjacency = Dict[int, List[int]]


@dataclass(frozen=True)
class PackingResult:
    n: int
    trees: Tuple[LabeledTree, ...]

    def to_dict(self) -> dict:
        return {"n": self.n, "trees": [[list(e) for e in t.sorted_edges()] for t in self.trees]}


@dataclass(frozen=True)
class MultiInstance:
    """Rows whose non-leaf vertex sets (the parts) are pairwise disjoint."""

    matrix: DegreeMatrix
    parts: Tuple[FrozenSet[int], ...] = field(init=False)
    free_leaves: FrozenSet[int] = field(init=False)

    def __post_init__(self):
        for index, row in enumerate(self.matrix.rows, start=1):
            require_tree_sequence(row, name=f"row {index}")
        parts = tuple(frozenset(row.non_leaves()) for row in self.matrix.rows)
        seen: Set[int] = set()
        for index, part in enumerate(parts, start=1):
            shared = seen & part
            if shared:
                raise DomainError(f"Vertices {sorted(shared)} are non-leaves in more than one row")
            seen |= part
        object.__setattr__(self, "parts", parts)
        object.__setattr__(self, "free_leaves", frozenset(range(1, self.matrix.n + 1)) - seen)

    @classmethod
    def of(cls, rows: Iterable[Iterable[int]]) -> "MultiInstance":
        return cls(DegreeMatrix.of(rows))

    @property
    def m(self) -> int:
        return self.matrix.c


# Hamiltonian paths

def hamiltonian_path_orders(n: int) -> Tuple[List[int], List[int]]:
    """
    Vertex orders of two edge-disjoint Hamiltonian paths of K_n: 1, 2, ..., n and a
    path from 2 to 3 that never joins consecutive integers.
    """
    if n < 4:
        raise DomainError(f"Two edge-disjoint Hamiltonian paths with distinct ends need n >= 4, got {n}")
    first = list(range(1, n + 1))
    second = [2, 4, 1, 3]
    for new in range(5, n + 1):
        for position in range(len(second) - 1):
            a, b = second[position], second[position + 1]
            if a < new - 1 and b < new - 1:
                second.insert(position + 1, new)
                break
        else:
            raise InvariantError(f"No edge avoiding vertex {new - 1} on the second path")
    return first, second


def path_tree(n: int, order: Sequence[int]) -> LabeledTree:
    return LabeledTree(n, frozenset(normalize_edge(a, b) for a, b in zip(order, order[1:])))


def disjoint_hamiltonian_paths(n: int) -> Tuple[LabeledTree, LabeledTree]:
    first, second = hamiltonian_path_orders(n)
    return path_tree(n, first), path_tree(n, second)


# Caterpillars

def _spine_order(adjacency: Adjacency) -> List[int]:
    spine = sorted(v for v, around in adjacency.items() if len(around) >= 2)
    if len(spine) <= 1:
        return spine
    on_spine = set(spine)
    spine_neighbors = {v: [u for u in adjacency[v] if u in on_spine] for v in spine}
    ends = [v for v in spine if len(spine_neighbors[v]) <= 1]
    if len(ends) != 2 or any(len(around) > 2 for around in spine_neighbors.values()):
        raise StructureError("Non-leaf vertices do not induce a path, so this is not a caterpillar")
    order = [min(ends)]
    previous = None
    while len(order) < len(spine):
        step = [u for u in spine_neighbors[order[-1]] if u != previous]
        if not step:
            raise StructureError("Non-leaf vertices do not induce a connected path")
        previous = order[-1]
        order.append(step[0])
    return order


def caterpillar_spine(tree: LabeledTree) -> List[int]:
    """Spine of a caterpillar, walked from its smaller-labelled end."""
    return _spine_order(tree.neighbors())


def _adjacency(edges: Iterable[Edge]) -> Adjacency:
    adjacency: Adjacency = {}
    for u, v in sorted(edges):
        adjacency.setdefault(u, []).append(v)
        adjacency.setdefault(v, []).append(u)
    return adjacency


def _extended_spine(adjacency: Adjacency) -> List[int]:
    """The spine extended by its smallest leaf at each end."""
    spine = _spine_order(adjacency)
    is_leaf = {v: len(around) == 1 for v, around in adjacency.items()}
    head = min(u for u in adjacency[spine[0]] if is_leaf[u])
    tail = min(u for u in adjacency[spine[-1]] if is_leaf[u] and u != head)
    return [head] + spine + [tail]


def _subdivision_edge(edges: Set[Edge], avoid: int) -> Edge:
    path = _extended_spine(_adjacency(edges))
    for a, b in zip(path, path[1:]):
        if a != avoid and b != avoid:
            return normalize_edge(a, b)
    raise InvariantError(f"Every spine edge touches vertex {avoid}")


def _is_path_sequence(degrees: Dict[int, int]) -> bool:
    values = list(degrees.values())
    return values.count(1) == 2 and all(d in (1, 2) for d in values)


def _select_indices(d: Dict[int, int], f: Dict[int, int]) -> Optional[Tuple[int, int]]:
    for i in sorted(d):
        if d[i] < 3:
            continue
        for j in sorted(d):
            if d[j] == 1 and f[j] == 2:
                return i, j
    return None


def _pack_two_paths(d: Dict[int, int], f: Dict[int, int]) -> Tuple[Set[Edge], Set[Edge]]:
    vertices = sorted(d)
    size = len(vertices)
    d_leaves = [v for v in vertices if d[v] == 1]
    f_leaves = [v for v in vertices if f[v] == 1]
    rest = [v for v in vertices if v not in d_leaves and v not in f_leaves]
    vertex_of = {1: d_leaves[0], size: d_leaves[1], 2: f_leaves[0], 3: f_leaves[1]}
    for label, vertex in zip(range(4, size), rest):
        vertex_of[label] = vertex
    first, second = hamiltonian_path_orders(size)
    first_edges = {normalize_edge(vertex_of[a], vertex_of[b]) for a, b in zip(first, first[1:])}
    second_edges = {normalize_edge(vertex_of[a], vertex_of[b]) for a, b in zip(second, second[1:])}
    return first_edges, second_edges


def pack_caterpillars(first: DegreeSequence, second: DegreeSequence) -> PackingResult:
    """Edge-disjoint caterpillar realizations of two tree sequences without common leaves."""
    require_tree_sequence(first, "D")
    require_tree_sequence(second, "F")
    require_same_length(first, second)
    if min(a + b for a, b in zip(first.degrees, second.degrees)) < 3:
        raise DomainError("The sequences share a leaf (some d_i + f_i < 3)")

    d = {v: first.degree(v) for v in first.vertices()}
    f = {v: second.degree(v) for v in second.vertices()}
    steps: List[Tuple[int, int, bool]] = []
    while not (_is_path_sequence(d) and _is_path_sequence(f)):
        chosen = _select_indices(d, f)
        swapped = False
        if chosen is None:
            chosen = _select_indices(f, d)
            swapped = True
        if chosen is None:
            raise InvariantError("No reducible index pair although the sequences are not both paths")
        i, j = chosen
        grown = f if swapped else d
        grown[i] -= 1
        del d[j]
        del f[j]
        steps.append((i, j, swapped))
        logger.debug(f"Removed vertex {j}, hub {i} (swapped={swapped}), {len(d)} vertices left")

    edges_d, edges_f = _pack_two_paths(d, f)
    for i, j, swapped in reversed(steps):
        grown, other = (edges_f, edges_d) if swapped else (edges_d, edges_f)
        grown.add(normalize_edge(i, j))
        k, l = _subdivision_edge(other, avoid=i)
        other.remove((k, l))
        other.add(normalize_edge(k, j))
        other.add(normalize_edge(j, l))

    n = first.n
    result = PackingResult(n, (LabeledTree(n, frozenset(edges_d)), LabeledTree(n, frozenset(edges_f))))
    verify_packing(result, [first, second])
    if not all(is_caterpillar(tree) for tree in result.trees):
        raise InvariantError("Packed trees are not both caterpillars")
    return result


def find_disjoint_caterpillars(
    first: DegreeSequence, second: DegreeSequence, guard_pairs: Optional[int] = None
) -> Optional[PackingResult]:
    """Exhaustive search for an edge-disjoint caterpillar pair; None if there is none."""
    require_same_length(first, second)
    limit = guard_pairs if guard_pairs is not None else settings.guard_caterpillar_pairs
    index = edge_index(first.n)
    left = [(edge_mask(t, index), t) for t in enumerate_caterpillars(first)]
    right = [(edge_mask(t, index), t) for t in enumerate_caterpillars(second)]
    if len(left) * len(right) > limit:
        raise ResourceGuardError(f"{len(left)} x {len(right)} caterpillar pairs exceed the guard {limit}")
    logger.info(f"Searching {len(left)} x {len(right)} caterpillar pairs")
    for mask_left, tree_left in left:
        for mask_right, tree_right in right:
            if not mask_left & mask_right:
                return PackingResult(first.n, (tree_left, tree_right))
    return None


# Decision

def kundu_packable(first: DegreeSequence, second: DegreeSequence) -> bool:
    """Two tree sequences have edge-disjoint tree realizations iff D + F is graphical."""
    require_tree_sequence(first, "D")
    require_tree_sequence(second, "F")
    return is_graphical(sum_sequences(first, second))


def common_edges(first: LabeledTree, second: LabeledTree) -> FrozenSet[Edge]:
    if first.n != second.n:
        raise DimensionError(f"Trees have different vertex counts: {first.n} and {second.n}")
    return first.edges & second.edges


# Complementary leaves

def pack_complementary_leaves(
    first: DegreeSequence,
    second: DegreeSequence,
    seed: SeedLike,
    fallback_factor: Optional[int] = None,
    guard_n: Optional[int] = None,
) -> PackingResult:
    """
    Edge-disjoint trees for a pair in which every vertex is a leaf of D or of F.
    Rejection sampling, with an exhaustive search once the attempt budget is spent.
    """
    # Lazy import: sampling builds on this module
    from app.services.sampling_service import analyze_pair

    require_tree_sequence(first, "D")
    require_tree_sequence(second, "F")
    if not is_complementary_pair(first, second):
        raise DomainError("Some vertex is a non-leaf in both sequences")
    for name, sequence in (("D", first), ("F", second)):
        if classify(sequence) == SequenceClass.STAR:
            raise InfeasibleError(f"{name}={sequence.to_text()} is a star, so D + F is not graphical")

    p_lower = analyze_pair(first, second).p_lower
    factor = fallback_factor if fallback_factor is not None else settings.fallback_factor
    budget = math.ceil(factor / p_lower)
    rng = make_rng(seed)
    for attempt in range(1, budget + 1):
        tree_d = random_tree(first, rng)
        tree_f = random_tree(second, rng)
        if not tree_d.edges & tree_f.edges:
            logger.debug(f"Disjoint pair found after {attempt} attempts")
            result = PackingResult(first.n, (tree_d, tree_f))
            verify_packing(result, [first, second])
            return result

    logger.info(f"No disjoint pair in {budget} attempts, switching to exhaustive search")
    result = _first_disjoint_pair(first, second, guard_n)
    verify_packing(result, [first, second])
    return result


def _first_disjoint_pair(first: DegreeSequence, second: DegreeSequence, guard_n: Optional[int]) -> PackingResult:
    limit = guard_n if guard_n is not None else settings.guard_n_enumeration
    if first.n > limit:
        raise ResourceGuardError(f"Exhaustive search needs n <= {limit}, got {first.n}")
    index = edge_index(first.n)
    right = [(edge_mask(t, index), t) for t in enumerate_trees(second)]
    for tree_left in enumerate_trees(first):
        mask_left = edge_mask(tree_left, index)
        for mask_right, tree_right in right:
            if not mask_left & mask_right:
                return PackingResult(first.n, (tree_left, tree_right))
    raise InvariantError("Exhaustive search found no disjoint pair for a feasible instance")


# Many trees

def _restriction_is_star(edges: Iterable[Edge], vertices: Set[int]) -> bool:
    inside = [e for e in edges if e[0] in vertices and e[1] in vertices]
    counts: Dict[int, int] = {}
    for u, v in inside:
        counts[u] = counts.get(u, 0) + 1
        counts[v] = counts.get(v, 0) + 1
    return any(c == len(vertices) - 1 for c in counts.values())


def _split_hub_degrees(sequence: DegreeSequence, hubs: List[int]) -> Tuple[Dict[int, int], Dict[int, int]]:
    """Hub-tree degree and leaf capacity of every hub; each extra hub-tree edge goes to the roomiest hub."""
    inner = {h: 1 for h in hubs}
    capacity = {h: sequence.degree(h) - 1 for h in hubs}
    for _ in range(len(hubs) - 2):
        roomiest = max(hubs, key=lambda h: (capacity[h], -h))
        inner[roomiest] += 1
        capacity[roomiest] -= 1
    return inner, capacity


def _hub_tree(hubs: List[int], inner: Dict[int, int]) -> Set[Edge]:
    if len(hubs) == 2:
        return {normalize_edge(*hubs)}
    local = DegreeSequence(tuple(inner[h] for h in hubs))
    tree = prufer_decode(PruferCode(len(hubs), tuple(prufer_multiset(local))))
    return {normalize_edge(hubs[u - 1], hubs[v - 1]) for u, v in tree.edges}


def _spread_parts(capacity: Dict[int, int], hubs: List[int], parts: List[List[int]]) -> Dict[int, int]:
    """
    Hang two vertices of every part on two different hubs.

    Each hub offers min(capacity, number of parts) slots, laid out hub by hub.
    Slot j goes to part j mod len(parts), so the two slots of a part lie
    len(parts) apart and cannot belong to the same hub.
    """
    count = len(parts)
    slots = [h for h in hubs for _ in range(min(capacity[h], count))]
    if len(slots) < 2 * count:
        raise InvariantError(f"Only {len(slots)} hub slots for {count} parts")
    placement: Dict[int, int] = {}
    for j, hub in enumerate(slots[:2 * count]):
        part = parts[j % count]
        placement[part[j // count]] = hub
    return placement


def nonstar_restricted_tree(sequence: DegreeSequence, parts: Sequence[Iterable[int]]) -> LabeledTree:
    """
    A realization of `sequence` whose restriction to U ∪ V_j is a non-star tree
    for every part V_j, U being the non-leaf vertices.

    Every part has vertices on two different hubs, so the property survives
    any rewiring of the edges among U.
    """
    require_tree_sequence(sequence)
    n = sequence.n
    parts = [sorted(set(part)) for part in parts]
    m = len(parts) + 1
    hubs = sequence.non_leaves()
    leaves = sequence.leaves()
    if len(hubs) < 2:
        raise DomainError("Need at least two non-leaf vertices")
    if not n > m > 2:
        raise DomainError(f"Need n > m > 2, got n={n}, m={m}")
    if max(sequence.degrees) > n - m:
        raise DomainError(f"Maximum degree {max(sequence.degrees)} exceeds n - m = {n - m}")
    leaf_set = set(leaves)
    used: Set[int] = set()
    for part in parts:
        if len(part) < 2:
            raise DomainError(f"Part {part} has fewer than two vertices")
        if not set(part) <= leaf_set:
            raise DomainError(f"Part {part} contains a non-leaf vertex")
        if used & set(part):
            raise DomainError(f"Part {part} overlaps another part")
        used |= set(part)

    inner, capacity = _split_hub_degrees(sequence, hubs)
    edges = _hub_tree(hubs, inner)
    placement = _spread_parts(capacity, hubs, parts)
    for leaf, hub in placement.items():
        edges.add(normalize_edge(leaf, hub))
        capacity[hub] -= 1
    for leaf in leaves:
        if leaf in placement:
            continue
        hub = next(h for h in hubs if capacity[h] > 0)
        edges.add(normalize_edge(leaf, hub))
        capacity[hub] -= 1

    tree = LabeledTree(n, frozenset(edges))
    if tree.degrees() != list(sequence.degrees):
        raise InvariantError("Restricted tree does not realize the sequence")
    for part in parts:
        if _restriction_is_star(tree.edges, set(hubs) | set(part)):
            raise InvariantError(f"Restriction to the hubs and part {part} is a star")
    return tree


def _local_sequence(edges: Iterable[Edge], vertices: List[int]) -> DegreeSequence:
    position = {v: index for index, v in enumerate(vertices)}
    counts = [0] * len(vertices)
    for u, v in edges:
        counts[position[u]] += 1
        counts[position[v]] += 1
    return DegreeSequence(tuple(counts))


def _repair_pair(
    edges: List[Set[Edge]], i: int, k: int, parts: Tuple[FrozenSet[int], ...],
    seed: SeedLike, fallback_factor: Optional[int],
) -> Tuple[Set[Edge], Set[Edge]]:
    """
    Re-pack the subtrees of trees i and k on V_i ∪ V_k so they share no edge.

    Only edges inside the window change, so the leaves tree i hangs in any
    other part stay on the hubs they were on.
    """
    window = sorted(parts[i] | parts[k])
    inside = set(window)
    sub_i = {e for e in edges[i] if e[0] in inside and e[1] in inside}
    sub_k = {e for e in edges[k] if e[0] in inside and e[1] in inside}
    local_i = _local_sequence(sub_i, window)
    local_k = _local_sequence(sub_k, window)
    try:
        packed = pack_complementary_leaves(local_i, local_k, seed, fallback_factor=fallback_factor)
    except InfeasibleError as e:
        raise InvariantError(f"Pair ({i + 1}, {k + 1}) has a star restriction") from e
    mapped = [{normalize_edge(window[u - 1], window[v - 1]) for u, v in tree.edges} for tree in packed.trees]
    return (edges[i] - sub_i) | mapped[0], (edges[k] - sub_k) | mapped[1]


def pack_multi(instance: MultiInstance, seed: SeedLike, fallback_factor: Optional[int] = None) -> PackingResult:
    """Pairwise edge-disjoint realizations of rows whose non-leaf sets are disjoint."""
    rows = instance.matrix.rows
    m, n = instance.m, instance.matrix.n
    if instance.matrix.max_degree() > n - m:
        raise InfeasibleError(f"Maximum degree {instance.matrix.max_degree()} exceeds n - m = {n - m}; sum not graphical")
    if m == 1:
        return PackingResult(n, (random_tree(rows[0], seed),))
    for index, part in enumerate(instance.parts, start=1):
        if len(part) < 2:
            raise DomainError(f"Row {index} has fewer than two non-leaf vertices")
    if m == 2:
        return pack_complementary_leaves(rows[0], rows[1], seed, fallback_factor=fallback_factor)

    edges = [
        set(nonstar_restricted_tree(rows[i], [instance.parts[k] for k in range(m) if k != i]).edges)
        for i in range(m)
    ]
    pairs = list(combinations(range(m), 2))
    streams = spawn_seeds(seed, len(pairs))
    repaired = 0
    for (i, k), stream in zip(pairs, streams):
        if not edges[i] & edges[k]:
            continue
        edges[i], edges[k] = _repair_pair(edges, i, k, instance.parts, stream, fallback_factor)
        repaired += 1
    logger.info(f"Packed {m} trees on {n} vertices, {repaired} pair repairs")

    result = PackingResult(n, tuple(LabeledTree(n, frozenset(e)) for e in edges))
    verify_packing(result, rows)
    return result


def verify_packing(result: PackingResult, sequences: Sequence[DegreeSequence]):
    """Raise InvariantError unless tree k realizes sequence k and the trees are pairwise disjoint."""
    if len(result.trees) != len(sequences):
        raise InvariantError("Packing has the wrong number of trees")
    for index, (tree, sequence) in enumerate(zip(result.trees, sequences), start=1):
        if tree.degrees() != list(sequence.degrees):
            raise InvariantError(f"Tree {index} does not realize its degree sequence")
        if not nx.is_tree(tree.to_graph()):
            raise InvariantError(f"Tree {index} is not connected")
    for (a, first), (b, second) in combinations(enumerate(result.trees, start=1), 2):
        shared = first.edges & second.edges
        if shared:
            raise InvariantError(f"Trees {a} and {b} share edges {sorted(shared)}")
