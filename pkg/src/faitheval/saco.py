"""The salience-guided faithfulness coefficient (SaCo)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import ParameterError, ValidationError
from .partition import partition_by_salience
from .perturbation import INDIVIDUAL, apply_replacement, build_plan, sample_mean
from .predictor import PredictionRecord, Predictor
from .tensor_io import ImageTensor, SalienceMap


@dataclass
class SubsetMeasurements:
    """Per-subset salience sums and confidence drops, in salience-rank order.

    s is ordered from the highest-salience subset down. The sums themselves
    are usually non-increasing, but need not be when subset sizes differ by
    one and scores go negative; the pairwise comparison is defined by the
    rank order, not the sums.
    """

    s: np.ndarray
    dpred: np.ndarray

    def __post_init__(self):
        self.s = np.asarray(self.s, dtype=np.float64)
        self.dpred = np.asarray(self.dpred, dtype=np.float64)
        if self.s.ndim != 1 or self.s.shape != self.dpred.shape or self.s.size < 2:
            raise ValidationError(
                f"s and dpred must be equal-length vectors of >= 2, got {self.s.shape} / {self.dpred.shape}"
            )
        if not (np.all(np.isfinite(self.s)) and np.all(np.isfinite(self.dpred))):
            raise ValidationError("measurements contain non-finite values")

    @property
    def k(self):
        return self.s.size


@dataclass
class FaithfulnessResult:
    """Coefficient in [-1, 1] plus the pairwise bookkeeping behind it."""

    f: float
    total_weight: float
    violations: int
    pairs: int
    subset_salience: np.ndarray = None
    dpred: np.ndarray = None


def delta_pred(base: PredictionRecord, perturbed: PredictionRecord, target_class: int) -> float:
    """Confidence drop on the frozen target class; positive means a drop."""
    if base.num_classes != perturbed.num_classes:
        raise ParameterError("records disagree on the number of classes")
    if not 0 <= target_class < base.num_classes:
        raise ParameterError(f"target class {target_class} out of range [0, {base.num_classes})")
    return float(base.probs[target_class] - perturbed.probs[target_class])


def saco_coefficient(meas: SubsetMeasurements) -> FaithfulnessResult:
    """Pairwise-signed salience differences, normalized by their total.

    For each pair i < j the salience gap s_i - s_j counts positively when the
    confidence drops agree with the salience ordering (dpred_i >= dpred_j,
    ties counting as agreement) and negatively otherwise. All gaps equal to
    zero (total weight 0) yields F = 0: no discriminative claim is made, so
    none is validated.
    """
    f_raw, total, violations = _kernels.pair_sums(meas.s, meas.dpred)
    k = meas.k
    pairs = k * (k - 1) // 2
    f = 0.0 if total == 0.0 else f_raw / total
    return FaithfulnessResult(
        f=f,
        total_weight=total,
        violations=violations,
        pairs=pairs,
        subset_salience=meas.s.copy(),
        dpred=meas.dpred.copy(),
    )


def evaluate_saco(
    x: ImageTensor,
    salience: SalienceMap,
    model: Predictor,
    k: int,
    base: PredictionRecord | None = None,
) -> FaithfulnessResult:
    """Full single-sample coefficient: partition, perturb each subset, score.

    Issues exactly k + 1 predictions (one unperturbed, one per subset); pass
    `base` to reuse an already-computed unperturbed prediction. The target
    class is frozen from the unperturbed prediction.
    """
    if (salience.height, salience.width) != (x.height, x.width):
        raise ParameterError(
            f"salience map {salience.scores.shape} does not match image {x.data.shape[:2]}"
        )
    part = partition_by_salience(salience, k)
    baseline = sample_mean(x)
    plan = build_plan(part, INDIVIDUAL, baseline)
    if base is None:
        base = model.predict(x)
    target = base.predicted_class
    dpred = np.empty(k, dtype=np.float64)
    for i, pixels in enumerate(plan.steps):
        perturbed = model.predict(apply_replacement(x, pixels, baseline))
        dpred[i] = delta_pred(base, perturbed, target)
    return saco_coefficient(SubsetMeasurements(s=part.subset_salience, dpred=dpred))
