"""Single-sample orchestration: all five metrics from one shared prediction cache."""

from __future__ import annotations

from dataclasses import dataclass

from .baseline_metrics import LERF, MORF, MetricScores, PerturbationCurve, build_curve, score_curves
from .predictor import Predictor
from .saco import FaithfulnessResult, evaluate_saco
from .tensor_io import ImageTensor, SalienceMap

# Conventions baked into the numbers; emitted with every result record.
CONVENTIONS = {
    "lodds_epsilon": 1e-12,
    "aopc_includes_step0": True,
    "lodds_comp_steps_from": 1,
    "tie_rule": "dpred ties satisfy the ordering expectation",
    "remainder_rule": "subset sizes differ by <= 1, extras on highest-salience subsets",
    "tiebreak": "ascending flat pixel index",
    "baseline": "per-sample per-channel mean",
}


@dataclass
class SampleEvaluation:
    saco: FaithfulnessResult
    scores: MetricScores
    morf: PerturbationCurve
    lerf: PerturbationCurve
    k: int


def evaluate_sample(
    x: ImageTensor, salience: SalienceMap, model: Predictor, k: int, base=None
) -> SampleEvaluation:
    """Coefficient plus all four cumulative metrics for one (image, map) pair.

    The unperturbed prediction is computed once and shared, so the predictor
    is hit exactly 1 + 3k times: the base image, k individual subsets, and k
    non-empty cumulative steps for each of MoRF and LeRF.
    """
    if base is None:
        base = model.predict(x)
    saco = evaluate_saco(x, salience, model, k, base=base)
    morf = build_curve(x, salience, model, k, MORF, base=base)
    lerf = build_curve(x, salience, model, k, LERF, base=base)
    return SampleEvaluation(saco=saco, scores=score_curves(morf, lerf), morf=morf, lerf=lerf, k=k)
