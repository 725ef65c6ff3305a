"""Pairwise inner-loop kernels.

The O(K^2) coefficient accumulation and the O(n^2) Kendall pair count are the
only hot loops in the engine. Both ship in two versions: a numba @njit kernel
and a vectorized numpy fallback. Set FAITHEVAL_NO_NUMBA=1 to force the numpy
path (it is also used automatically when numba cannot be imported).
"""

from __future__ import annotations

import math
import os

import numpy as np


def _numba_wanted() -> bool:
    flag = os.environ.get("FAITHEVAL_NO_NUMBA", "").strip().lower()
    return flag not in ("1", "true", "yes")


NUMBA_ENABLED = False
if _numba_wanted():
    try:
        from numba import njit

        NUMBA_ENABLED = True
    except ImportError:  # pragma: no cover - numba is a declared dependency
        NUMBA_ENABLED = False


def _pair_sums_np(s, dpred):
    n = s.shape[0]
    iu, ju = np.triu_indices(n, k=1)
    weight = s[iu] - s[ju]
    agree = dpred[iu] >= dpred[ju]
    signed = np.where(agree, weight, -weight)
    f_raw = float(np.sum(signed))
    total = float(np.sum(np.abs(weight)))
    violations = int(np.count_nonzero(~agree))
    return f_raw, total, violations


def _kendall_counts_np(a, b):
    n = a.shape[0]
    iu, ju = np.triu_indices(n, k=1)
    da = a[iu] - a[ju]
    db = b[iu] - b[ju]
    tie_a = da == 0
    tie_b = db == 0
    prod = np.sign(da) * np.sign(db)
    concordant = int(np.count_nonzero(prod > 0))
    discordant = int(np.count_nonzero(prod < 0))
    ties_a = int(np.count_nonzero(tie_a & ~tie_b))
    ties_b = int(np.count_nonzero(tie_b & ~tie_a))
    ties_both = int(np.count_nonzero(tie_a & tie_b))
    return concordant, discordant, ties_a, ties_b, ties_both


if NUMBA_ENABLED:

    @njit(cache=True)
    def _pair_sums_nb(s, dpred):  # pragma: no cover - exercised via dispatch
        n = s.shape[0]
        f_raw = 0.0
        total = 0.0
        violations = 0
        for i in range(n - 1):
            for j in range(i + 1, n):
                weight = s[i] - s[j]
                if dpred[i] >= dpred[j]:
                    f_raw += weight
                else:
                    f_raw -= weight
                    violations += 1
                total += abs(weight)
        return f_raw, total, violations

    @njit(cache=True)
    def _kendall_counts_nb(a, b):  # pragma: no cover - exercised via dispatch
        n = a.shape[0]
        concordant = 0
        discordant = 0
        ties_a = 0
        ties_b = 0
        ties_both = 0
        for i in range(n - 1):
            for j in range(i + 1, n):
                da = a[i] - a[j]
                db = b[i] - b[j]
                if da == 0.0 and db == 0.0:
                    ties_both += 1
                elif da == 0.0:
                    ties_a += 1
                elif db == 0.0:
                    ties_b += 1
                elif (da > 0.0) == (db > 0.0):
                    concordant += 1
                else:
                    discordant += 1
        return concordant, discordant, ties_a, ties_b, ties_both


def pair_sums(s: np.ndarray, dpred: np.ndarray):
    """Accumulate signed and absolute pairwise salience differences.

    Returns (f_raw, total_weight, violations) where f_raw is the sum of
    +/-(s_i - s_j) over all i < j, signed by whether the confidence drops
    agree with the salience ordering.
    """
    s = np.ascontiguousarray(s, dtype=np.float64)
    dpred = np.ascontiguousarray(dpred, dtype=np.float64)
    if NUMBA_ENABLED:
        f_raw, total, violations = _pair_sums_nb(s, dpred)
        return float(f_raw), float(total), int(violations)
    return _pair_sums_np(s, dpred)


def kendall_counts(a: np.ndarray, b: np.ndarray):
    """Count concordant/discordant/tied pairs for the tau-b statistic."""
    a = np.ascontiguousarray(a, dtype=np.float64)
    b = np.ascontiguousarray(b, dtype=np.float64)
    if NUMBA_ENABLED:
        return tuple(int(v) for v in _kendall_counts_nb(a, b))
    return _kendall_counts_np(a, b)


def tau_b_from_counts(concordant, discordant, ties_a, ties_b, ties_both, n):
    """Tie-corrected Kendall tau-b from pair counts; nan when undefined."""
    n0 = n * (n - 1) // 2
    n1 = ties_a + ties_both
    n2 = ties_b + ties_both
    # single sqrt of the integer product keeps tau exactly +/-1 for
    # perfectly (anti)concordant inputs
    denom = math.sqrt(float((n0 - n1) * (n0 - n2)))
    if denom == 0.0:
        return math.nan
    return (concordant - discordant) / denom
