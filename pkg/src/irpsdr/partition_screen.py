"""Random covariate partitions and distance-correlation screening.

A partition chops a uniformly random permutation of the covariates
into consecutive blocks of size r, the shorter remainder (if any)
last.  Screening scores each block against the response and keeps the
top floor(u/r) blocks, never exceeding the u-index budget.
"""

from dataclasses import dataclass

import numpy as np

from .dcor import _DEGENERATE_TOL, _double_center, _pairwise_distances, _product_mean
from .errors import ParameterError


@dataclass(frozen=True)
class Partition:
    """Disjoint 0-based index blocks covering range(p); remainder last."""

    blocks: tuple
    r: int
    p: int


@dataclass(frozen=True)
class EnvelopeSelection:
    """Kept covariate indices (sorted) with the per-block screening scores."""

    indices: np.ndarray
    block_scores: np.ndarray
    u_target: int


def random_partition(p, r, rng):
    """Uniformly random size-r partition of the covariates {0, ..., p-1}."""
    if not 1 <= r <= p:
        raise ParameterError(f"block size r={r} must satisfy 1 <= r <= p={p}")
    perm = rng.permutation(p)
    full = p // r
    blocks = [perm[i * r : (i + 1) * r] for i in range(full)]
    if p % r:
        blocks.append(perm[full * r :])
    return Partition(blocks=tuple(blocks), r=r, p=p)


def candidate_sizes(u):
    """Block sizes {floor(u/s) : s = 1..u}, ascending.  u = 6 -> [1, 2, 3, 6]."""
    if u < 1:
        raise ParameterError(f"envelope size u={u} must be positive")
    return sorted({u // s for s in range(1, u + 1)})


def _response_parts(y):
    """Centered response distance matrix and its squared mean, reused per call."""
    a = _double_center(_pairwise_distances(np.asarray(y, float)[:, None]))
    return a, _product_mean(a, a)


def _block_score(x_block, y_centered, y_sq_mean):
    b = _double_center(_pairwise_distances(x_block))
    num = _product_mean(y_centered, b)
    den = np.sqrt(y_sq_mean * _product_mean(b, b))
    if den <= _DEGENERATE_TOL:
        return 0.0
    return num / den


def _screen_scored(partition, u, scores):
    if u >= partition.p:  # budget covers every covariate: screening is a no-op
        return EnvelopeSelection(
            indices=np.arange(partition.p),
            block_scores=np.asarray(scores, float),
            u_target=u,
        )
    budget_blocks = u // partition.r
    if budget_blocks < 1:
        raise ParameterError(
            f"u={u} below block size r={partition.r}: nothing can be selected"
        )
    min_index = [int(b.min()) for b in partition.blocks]
    ranked = sorted(
        range(len(partition.blocks)), key=lambda k: (-scores[k], min_index[k])
    )
    kept = []
    total = 0
    for k in ranked:
        if len(kept) == budget_blocks:
            break
        size = len(partition.blocks[k])
        if total + size > u:
            continue  # block would blow the index budget; try the next one
        kept.append(k)
        total += size
    indices = np.sort(np.concatenate([partition.blocks[k] for k in kept]))
    return EnvelopeSelection(
        indices=indices, block_scores=np.asarray(scores, float), u_target=u
    )


def screen(dataset, partition, u):
    """Rank partition blocks by squared distance correlation with y, keep the best.

    Keeps at most floor(u/r) blocks and at most u indices; score ties go
    to the block whose smallest member index is lowest.
    """
    y_centered, y_sq_mean = _response_parts(dataset.y)
    scores = [
        _block_score(dataset.x[:, blk], y_centered, y_sq_mean)
        for blk in partition.blocks
    ]
    return _screen_scored(partition, u, scores)
