"""Rank pixels by salience and split them into ordered subsets."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError
from .tensor_io import SalienceMap


@dataclass
class SubsetPartition:
    """K disjoint pixel-index groups ordered by descending salience.

    subsets[i] holds flat row-major indices into the H x W grid;
    subset_salience[i] is the sum of salience over subsets[i]. The sums are
    non-increasing in i when the sizes are equal or all scores are
    non-negative; with a remainder and negative scores a larger earlier
    subset can sum below a smaller later one, which the pairwise coefficient
    handles by comparing in rank order.
    """

    k: int
    subsets: list  # list of int64 arrays
    subset_salience: np.ndarray  # float64, length k


def subset_sizes(num_pixels: int, k: int) -> list:
    """Subset sizes differing by at most one, extras on the lowest indices."""
    base, rem = divmod(num_pixels, k)
    return [base + 1 if i < rem else base for i in range(k)]


def partition_by_salience(salience: SalienceMap, k: int) -> SubsetPartition:
    """Split pixels into k groups by descending salience.

    Ties are broken by ascending flat pixel index, so the grouping is
    deterministic across platforms. When HW is not divisible by k the extra
    pixels go to the highest-salience groups.
    """
    num_pixels = salience.num_pixels
    if k < 2 or k > num_pixels:
        raise ParameterError(f"k must be in [2, {num_pixels}], got {k}")
    flat = np.ascontiguousarray(salience.scores, dtype=np.float64).ravel()
    # Stable sort on the negated scores: ties keep ascending pixel index.
    order = np.argsort(-flat, kind="stable")
    sizes = subset_sizes(num_pixels, k)
    subsets = []
    sums = np.empty(k, dtype=np.float64)
    start = 0
    for i, size in enumerate(sizes):
        idx = np.ascontiguousarray(order[start : start + size], dtype=np.int64)
        subsets.append(idx)
        sums[i] = float(np.sum(flat[idx]))
        start += size
    return SubsetPartition(k=k, subsets=subsets, subset_salience=sums)
