from typing import List, Union

import numpy as np

SeedLike = Union[int, np.random.SeedSequence, np.random.Generator]


def make_rng(seed: SeedLike) -> np.random.Generator:
    """Return a PCG64 generator for `seed`; an existing Generator is passed through."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def spawn_seeds(seed: SeedLike, count: int) -> List[np.random.SeedSequence]:
    """Split `seed` into `count` independent child streams, deterministically."""
    if isinstance(seed, np.random.Generator):
        return seed.bit_generator.seed_seq.spawn(count)
    if isinstance(seed, np.random.SeedSequence):
        return seed.spawn(count)
    return np.random.SeedSequence(seed).spawn(count)
