"""Deterministic RNG substreams.

Every stochastic step draws from its own generator derived from the
master seed plus integer tags naming the step (model index, replicate,
envelope size, block size, partition index, ...).  Work can then be
scheduled in any order, or split across processes, without changing a
single draw.
"""

import numpy as np


def _entropy(master_seed, tags):
    entropy = (int(master_seed),) + tuple(int(t) for t in tags)
    if any(t < 0 for t in entropy):
        raise ValueError("seed and tags must be nonnegative integers")
    return entropy


def substream(master_seed, *tags):
    """Generator unique to (master_seed, *tags); same arguments, same stream."""
    return np.random.default_rng(np.random.SeedSequence(_entropy(master_seed, tags)))


def child_seed(master_seed, *tags):
    """A derived integer seed, for handing a whole subtree its own master."""
    seq = np.random.SeedSequence(_entropy(master_seed, tags))
    return int(seq.generate_state(1, np.uint64)[0])
