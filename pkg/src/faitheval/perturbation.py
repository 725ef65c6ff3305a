"""Mean-replacement perturbation under individual and cumulative schedules."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError
from .partition import SubsetPartition
from .tensor_io import ImageTensor

INDIVIDUAL = "individual"
CUMULATIVE_MORF = "cumulative-morf"
CUMULATIVE_LERF = "cumulative-lerf"
SCHEDULES = (INDIVIDUAL, CUMULATIVE_MORF, CUMULATIVE_LERF)


@dataclass
class PerturbationPlan:
    """Ordered pixel-index sets to replace, plus the per-channel baseline.

    Individual plans have one step per partition subset; cumulative plans
    have K+1 strictly growing steps starting from the empty set, ordered
    most-relevant-first (MoRF) or least-relevant-first (LeRF).
    """

    schedule: str
    steps: list  # list of int64 arrays
    baseline: np.ndarray  # float64, one entry per channel


def sample_mean(x: ImageTensor) -> np.ndarray:
    """Per-channel mean over all pixels of the image."""
    return np.asarray(x.data, dtype=np.float64).reshape(-1, x.channels).mean(axis=0)


def apply_replacement(x: ImageTensor, pixels, baseline) -> ImageTensor:
    """Copy of x with every listed pixel set to the per-channel baseline."""
    pixels = np.asarray(pixels, dtype=np.int64)
    if pixels.size and (pixels.min() < 0 or pixels.max() >= x.num_pixels):
        raise ParameterError(
            f"pixel indices must be in [0, {x.num_pixels}), got range "
            f"[{pixels.min()}, {pixels.max()}]"
        )
    baseline = np.asarray(baseline, dtype=np.float64)
    if baseline.shape != (x.channels,):
        raise ParameterError(
            f"baseline must have one entry per channel ({x.channels}), got shape {baseline.shape}"
        )
    flat = np.array(x.data, dtype=np.float64).reshape(-1, x.channels)
    flat[pixels] = baseline
    return ImageTensor(flat.reshape(x.data.shape))


def build_plan(partition: SubsetPartition, schedule: str, baseline) -> PerturbationPlan:
    """Turn a partition into a replacement plan for the given schedule."""
    if schedule not in SCHEDULES:
        raise ParameterError(f"unknown schedule {schedule!r}, expected one of {SCHEDULES}")
    baseline = np.asarray(baseline, dtype=np.float64)
    if schedule == INDIVIDUAL:
        steps = [np.array(g, dtype=np.int64) for g in partition.subsets]
    else:
        ordered = (
            partition.subsets
            if schedule == CUMULATIVE_MORF
            else list(reversed(partition.subsets))
        )
        steps = [np.empty(0, dtype=np.int64)]
        for group in ordered:
            steps.append(np.concatenate([steps[-1], group]))
    return PerturbationPlan(schedule=schedule, steps=steps, baseline=baseline)
