"""
Counting and sampling edge-disjoint realization pairs.

The estimator draws independent uniform realizations of D and F and counts
disjoint pairs; the sampler returns the first disjoint pair it draws. Both rely
on a computable lower bound p_lower on the probability that a random pair is
disjoint. Exact brute-force counting is kept as a desk-scale oracle.
"""
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import FrozenSet, Hashable, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from config import settings
from app.services.degseq_service import (
    DegreeSequence,
    SequenceClass,
    classify,
    is_complementary_pair,
    require_same_length,
    require_tree_sequence,
)
from app.services.errors import DomainError, InfeasibleError, ResourceGuardError
from app.services.packing_service import common_edges
from app.services.randomness import SeedLike, make_rng, spawn_seeds
from app.services.tree_service import (
    LabeledTree,
    count_trees,
    edge_index,
    edge_mask,
    edge_probability,
    enumerate_trees,
    random_tree,
)

logger = logging.getLogger(__name__)

NORMALIZATION_TOLERANCE = 1e-9


@dataclass(frozen=True)
class PairAnalysis:
    a: FrozenSet[int]
    b: FrozenSet[int]
    expected_common: Fraction
    p_lower: Fraction


@dataclass(frozen=True)
class EstimateReport:
    samples_used: int
    hits: int
    p_hat: Fraction
    count_estimate: Fraction
    epsilon: float
    delta: float
    seed: int
    workers: int
    batch_size: int


@dataclass(frozen=True)
class SampleOutcome:
    trees: Tuple[LabeledTree, LabeledTree]
    attempts: int
    budget: int
    fallback: bool


def analyze_pair(first: DegreeSequence, second: DegreeSequence) -> PairAnalysis:
    """
    Leaf partition A/B, the expected number of common edges summed over A x B and
    the lower bound on the probability that a uniform pair is edge-disjoint.
    """
    require_tree_sequence(first, "D")
    require_tree_sequence(second, "F")
    require_same_length(first, second)
    n = first.n
    if n < 4:
        raise DomainError(f"Pair analysis needs n >= 4, got {n}")
    d, f = first.degrees, second.degrees
    a = [v for v in first.vertices() if d[v - 1] > 1 and f[v - 1] == 1]
    b = [v for v in first.vertices() if d[v - 1] == 1 and f[v - 1] > 1]
    expected = sum(
        (Fraction((d[i - 1] - 1) * (f[j - 1] - 1), (n - 2) ** 2) for i in a for j in b), Fraction(0)
    )
    p_lower = Fraction(0)
    if len(a) >= 2 and len(b) >= 2:
        i1, i2 = sorted(a, key=lambda v: (-d[v - 1], v))[:2]
        j1, j2 = sorted(b, key=lambda v: (-f[v - 1], v))[:2]
        numerator = (d[i1 - 1] - 1) * (d[i2 - 1] - 1) * (f[j1 - 1] - 1) * (f[j2 - 1] - 1)
        p_lower = Fraction(numerator, (n - 2) ** 2 * (n - 3) ** 2)
    return PairAnalysis(frozenset(a), frozenset(b), expected, p_lower)


def expected_common_general(first: DegreeSequence, second: DegreeSequence) -> Fraction:
    """Expected number of shared edges of two independent uniform realizations, any leaf overlap."""
    require_tree_sequence(first, "D")
    require_tree_sequence(second, "F")
    require_same_length(first, second)
    n = first.n
    if n < 3:
        raise DomainError(f"Edge probabilities need n >= 3, got {n}")
    total = Fraction(0)
    for i in range(1, n + 1):
        for j in range(i + 1, n + 1):
            total += edge_probability(first, i, j) * edge_probability(second, i, j)
    return total


def required_samples(p_lower: Fraction, epsilon: float, delta: float) -> int:
    """Chernoff sample size: the larger of the lower-tail and upper-tail bounds at p = p_lower."""
    if not 0 < p_lower <= 1:
        raise DomainError(f"p must lie in (0, 1], got {p_lower}")
    if not epsilon > 0:
        raise DomainError(f"epsilon must be positive, got {epsilon}")
    if not 0 < delta < 1:
        raise DomainError(f"delta must lie in (0, 1), got {delta}")
    p = float(p_lower)
    log_term = -2.0 * math.log(delta / 2.0)
    lower_tail = log_term / (p * epsilon ** 2)
    upper_tail = log_term * (1.0 - p) / (p ** 2 * epsilon ** 2)
    return math.ceil(max(lower_tail, upper_tail))


def _require_samplable(first: DegreeSequence, second: DegreeSequence, star_error=DomainError):
    require_tree_sequence(first, "D")
    require_tree_sequence(second, "F")
    if not is_complementary_pair(first, second):
        raise DomainError("Some vertex is a non-leaf in both sequences")
    for name, sequence in (("D", first), ("F", second)):
        if classify(sequence) == SequenceClass.STAR:
            raise star_error(f"{name}={sequence.to_text()} is a star")
    if first.n < 4:
        raise DomainError(f"Sampling needs n >= 4, got {first.n}")


def _count_hits(first: DegreeSequence, second: DegreeSequence, size: int, stream: np.random.SeedSequence) -> int:
    rng = make_rng(stream)
    hits = 0
    for _ in range(size):
        if not random_tree(first, rng).edges & random_tree(second, rng).edges:
            hits += 1
    return hits


def estimate_disjoint_count(
    first: DegreeSequence,
    second: DegreeSequence,
    epsilon: float,
    delta: float,
    seed: int,
    workers: Optional[int] = None,
    batch_size: Optional[int] = None,
) -> EstimateReport:
    """
    Monte Carlo estimate of the number of edge-disjoint ordered pairs, within a
    factor (1 + epsilon) of the truth with probability at least 1 - delta.

    Samples are split into batches with independent seed streams, so the report
    only depends on (seed, batch_size), whatever the number of workers.
    """
    _require_samplable(first, second)
    workers = workers or settings.workers
    batch_size = batch_size or settings.batch_size
    if workers < 1 or batch_size < 1:
        raise DomainError("workers and batch_size must be positive")
    analysis = analyze_pair(first, second)
    samples = required_samples(analysis.p_lower, epsilon, delta)
    batches = math.ceil(samples / batch_size)
    sizes = [min(batch_size, samples - index * batch_size) for index in range(batches)]
    streams = spawn_seeds(seed, batches)
    logger.info(f"Estimating with {samples} samples in {batches} batches on {workers} workers")

    if workers == 1:
        hits = sum(_count_hits(first, second, size, stream) for size, stream in zip(sizes, streams))
    else:
        with ProcessPoolExecutor(max_workers=workers) as executor:
            hits = sum(
                executor.map(_count_hits, [first] * batches, [second] * batches, sizes, streams)
            )

    p_hat = Fraction(hits, samples)
    return EstimateReport(
        samples_used=samples,
        hits=hits,
        p_hat=p_hat,
        count_estimate=p_hat * count_trees(first) * count_trees(second),
        epsilon=epsilon,
        delta=delta,
        seed=seed,
        workers=workers,
        batch_size=batch_size,
    )


def sample_disjoint_pair_outcome(
    first: DegreeSequence, second: DegreeSequence, epsilon: float, seed: SeedLike
) -> SampleOutcome:
    """
    Draw up to ceil(-ln(epsilon) / p_lower) random pairs and return the first
    disjoint one; past the budget, keep drawing until one is disjoint.
    """
    _require_samplable(first, second, star_error=InfeasibleError)
    if not 0 < epsilon < 1:
        raise DomainError(f"epsilon must lie in (0, 1), got {epsilon}")
    p_lower = analyze_pair(first, second).p_lower
    budget = math.ceil(-math.log(epsilon) / float(p_lower))
    rng = make_rng(seed)
    attempts = 0
    while True:
        attempts += 1
        tree_d = random_tree(first, rng)
        tree_f = random_tree(second, rng)
        if not tree_d.edges & tree_f.edges:
            break
        if attempts == budget:
            logger.info(f"Attempt budget {budget} spent, continuing until a disjoint pair appears")
    return SampleOutcome((tree_d, tree_f), attempts, budget, attempts > budget)


def sample_disjoint_pair(
    first: DegreeSequence, second: DegreeSequence, epsilon: float, seed: SeedLike
) -> Tuple[LabeledTree, LabeledTree]:
    return sample_disjoint_pair_outcome(first, second, epsilon, seed).trees


def _require_enumerable(first: DegreeSequence, second: DegreeSequence, guard_n: Optional[int]):
    require_tree_sequence(first, "D")
    require_tree_sequence(second, "F")
    require_same_length(first, second)
    limit = guard_n if guard_n is not None else settings.guard_n_enumeration
    if first.n > limit:
        raise ResourceGuardError(f"Exhaustive enumeration is limited to n <= {limit}, got {first.n}")


def enumerate_disjoint_pairs(
    first: DegreeSequence, second: DegreeSequence, guard_n: Optional[int] = None
) -> Iterator[Tuple[LabeledTree, LabeledTree]]:
    """All edge-disjoint ordered realization pairs, in Prüfer enumeration order."""
    _require_enumerable(first, second, guard_n)
    index = edge_index(first.n)
    right = [(edge_mask(t, index), t) for t in enumerate_trees(second)]
    for tree_left in enumerate_trees(first):
        mask_left = edge_mask(tree_left, index)
        for mask_right, tree_right in right:
            if not mask_left & mask_right:
                yield tree_left, tree_right


def exact_disjoint_count(first: DegreeSequence, second: DegreeSequence, guard_n: Optional[int] = None) -> int:
    _require_enumerable(first, second, guard_n)
    index = edge_index(first.n)
    right = [edge_mask(t, index) for t in enumerate_trees(second)]
    total = 0
    for tree_left in enumerate_trees(first):
        mask_left = edge_mask(tree_left, index)
        total += sum(1 for mask_right in right if not mask_left & mask_right)
    return total


def disjoint_probability(first: DegreeSequence, second: DegreeSequence, guard_n: Optional[int] = None) -> Fraction:
    """Exact probability that two independent uniform realizations are edge-disjoint."""
    hits = exact_disjoint_count(first, second, guard_n)
    return Fraction(hits, count_trees(first) * count_trees(second))


def common_edge_total(first: DegreeSequence, second: DegreeSequence, guard_n: Optional[int] = None) -> int:
    """Sum of |common edges| over all realization pairs (the exact numerator of the expectation)."""
    _require_enumerable(first, second, guard_n)
    right = list(enumerate_trees(second))
    return sum(len(common_edges(left, tree)) for left in enumerate_trees(first) for tree in right)


def tv_distance(p: Sequence[float], q: Sequence[float]) -> float:
    """Total variation distance: half the L1 distance of two distributions on the same support."""
    left = np.asarray(p, dtype=float)
    right = np.asarray(q, dtype=float)
    if left.shape != right.shape or left.ndim != 1:
        raise DomainError("Distributions must be flat and share the same support")
    for name, values in (("p", left), ("q", right)):
        if not np.isfinite(values).all():
            raise DomainError(f"{name} has a non-finite entry")
        if (values < 0).any():
            raise DomainError(f"{name} has negative mass")
        if abs(values.sum() - 1.0) > NORMALIZATION_TOLERANCE:
            raise DomainError(f"{name} sums to {values.sum()}, not 1")
    return float(0.5 * np.abs(left - right).sum())


def empirical_distribution(samples: Sequence[Hashable], support: Sequence[Hashable]) -> List[float]:
    """Relative frequency of each support element among `samples`."""
    position = {item: index for index, item in enumerate(support)}
    counts = np.zeros(len(support))
    for sample in samples:
        if sample not in position:
            raise DomainError(f"Sample {sample!r} is outside the support")
        counts[position[sample]] += 1
    if not len(samples):
        raise DomainError("No samples")
    return list(counts / len(samples))
