"""Cumulative-perturbation metrics: AUC, AOPC, LOdds, Comprehensiveness."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError, ValidationError
from .partition import partition_by_salience
from .perturbation import (
    CUMULATIVE_LERF,
    CUMULATIVE_MORF,
    apply_replacement,
    build_plan,
    sample_mean,
)
from .predictor import Predictor
from .tensor_io import ImageTensor, SalienceMap

MORF = "MoRF"
LERF = "LeRF"
LODDS_EPSILON = 1e-12


@dataclass
class PerturbationCurve:
    """Target-class confidence at cumulative removal fractions 0..1."""

    fractions: np.ndarray
    confidences: np.ndarray
    correct: np.ndarray  # predicted class still equals the original argmax
    order: str

    def __post_init__(self):
        self.fractions = np.asarray(self.fractions, dtype=np.float64)
        self.confidences = np.asarray(self.confidences, dtype=np.float64)
        self.correct = np.asarray(self.correct, dtype=bool)
        if not (len(self.fractions) == len(self.confidences) == len(self.correct)):
            raise ValidationError("curve arrays must have equal length")
        if len(self.fractions) < 2:
            raise ValidationError("curve needs at least 2 points")
        if self.fractions[0] != 0.0 or self.fractions[-1] != 1.0:
            raise ValidationError("fractions must start at 0 and end at 1")
        if np.any(np.diff(self.fractions) <= 0):
            raise ValidationError("fractions must be strictly increasing")
        if np.any(self.confidences < 0) or np.any(self.confidences > 1):
            raise ValidationError("confidences must lie in [0, 1]")
        if self.order not in (MORF, LERF):
            raise ValidationError(f"order must be {MORF} or {LERF}")
        if not self.correct[0]:
            raise ValidationError("step 0 must be correct by construction")

    @property
    def num_steps(self):
        return len(self.fractions) - 1


def build_curve(
    x: ImageTensor,
    salience: SalienceMap,
    model: Predictor,
    k: int,
    order: str,
    base=None,
) -> PerturbationCurve:
    """Cumulative mean-replacement curve with the target frozen at step 0.

    Pass `base` to reuse an already-computed unperturbed prediction; step 0
    never hits the predictor again in that case.
    """
    if order not in (MORF, LERF):
        raise ParameterError(f"order must be {MORF!r} or {LERF!r}, got {order!r}")
    if (salience.height, salience.width) != (x.height, x.width):
        raise ParameterError(
            f"salience map {salience.scores.shape} does not match image {x.data.shape[:2]}"
        )
    part = partition_by_salience(salience, k)
    baseline = sample_mean(x)
    schedule = CUMULATIVE_MORF if order == MORF else CUMULATIVE_LERF
    plan = build_plan(part, schedule, baseline)
    if base is None:
        base = model.predict(x)
    target = base.predicted_class
    num_pixels = x.num_pixels
    fractions = np.empty(k + 1, dtype=np.float64)
    confidences = np.empty(k + 1, dtype=np.float64)
    correct = np.empty(k + 1, dtype=bool)
    for t, pixels in enumerate(plan.steps):
        record = base if t == 0 else model.predict(apply_replacement(x, pixels, baseline))
        fractions[t] = pixels.size / num_pixels
        confidences[t] = float(record.probs[target])
        correct[t] = record.predicted_class == target
    return PerturbationCurve(fractions=fractions, confidences=confidences, correct=correct, order=order)


def _require_order(curve: PerturbationCurve, order: str, metric: str):
    if curve.order != order:
        raise ParameterError(f"{metric} requires a {order} curve, got {curve.order}")


def auc_score(curve: PerturbationCurve) -> float:
    """Trapezoidal area under the MoRF confidence curve; lower is better."""
    _require_order(curve, MORF, "auc_score")
    return float(np.trapezoid(curve.confidences, curve.fractions))


def dataset_accuracy_auc(curves) -> float:
    """AUC of the accuracy-vs-fraction curve pooled over samples."""
    curves = list(curves)
    if not curves:
        raise ParameterError("need at least one curve")
    fractions = curves[0].fractions
    for c in curves:
        _require_order(c, MORF, "dataset_accuracy_auc")
        if not np.array_equal(c.fractions, fractions):
            raise ParameterError("curves disagree on perturbation fractions")
    accuracy = np.mean([c.correct.astype(np.float64) for c in curves], axis=0)
    return float(np.trapezoid(accuracy, fractions))


def aopc_score(curve: PerturbationCurve) -> float:
    """Mean confidence drop over steps 0..K of a MoRF curve; higher is better."""
    _require_order(curve, MORF, "aopc_score")
    drops = curve.confidences[0] - curve.confidences
    return float(np.mean(drops))


def lodds_score(curve: PerturbationCurve) -> float:
    """Mean log-ratio of perturbed to original confidence; lower is better."""
    _require_order(curve, MORF, "lodds_score")
    c0 = curve.confidences[0]
    ratios = (curve.confidences[1:] + LODDS_EPSILON) / (c0 + LODDS_EPSILON)
    return float(np.mean(np.log(ratios)))


def comp_score(curve: PerturbationCurve) -> float:
    """Mean confidence drop under LeRF removal; lower is better."""
    _require_order(curve, LERF, "comp_score")
    drops = curve.confidences[0] - curve.confidences[1:]
    return float(np.mean(drops))


@dataclass
class MetricScores:
    auc: float
    aopc: float
    lodds: float
    comp: float

    def __post_init__(self):
        for name in ("auc", "aopc", "lodds", "comp"):
            if not math.isfinite(getattr(self, name)):
                raise ValidationError(f"{name} is not finite")


def score_curves(morf: PerturbationCurve, lerf: PerturbationCurve) -> MetricScores:
    return MetricScores(
        auc=auc_score(morf),
        aopc=aopc_score(morf),
        lodds=lodds_score(morf),
        comp=comp_score(lerf),
    )
