import math

import numpy as np
import pytest

from conftest import make_image, make_separated_model
from faitheval import (
    LERF,
    MORF,
    ParameterError,
    PerturbationCurve,
    SalienceMap,
    aopc_score,
    apply_replacement,
    auc_score,
    build_curve,
    comp_score,
    dataset_accuracy_auc,
    lodds_score,
    oracle_attribution,
    partition_by_salience,
    sample_mean,
    score_curves,
)


def _curve(confidences, order=MORF, fractions=None, correct=None):
    n = len(confidences)
    if fractions is None:
        fractions = np.linspace(0, 1, n)
    if correct is None:
        correct = [True] * n
    return PerturbationCurve(
        fractions=fractions, confidences=confidences, correct=correct, order=order
    )


# --- curve construction ----------------------------------------------------


def test_build_curve_endpoints():
    model = make_separated_model()
    x = make_image(seed=0)
    salience = oracle_attribution(model, x)
    base = model.predict(x)
    morf = build_curve(x, salience, model, 4, MORF)
    lerf = build_curve(x, salience, model, 4, LERF)

    assert morf.fractions[0] == 0.0 and morf.fractions[-1] == 1.0
    assert morf.confidences[0] == pytest.approx(base.confidence)
    assert morf.correct[0]
    # all pixels replaced: MoRF and LeRF coincide at t=K
    assert morf.confidences[-1] == pytest.approx(lerf.confidences[-1], abs=1e-12)


def test_build_curve_matches_closed_form():
    model = make_separated_model()
    x = make_image(seed=1)
    salience = oracle_attribution(model, x)
    k = 4
    part = partition_by_salience(salience, k)
    baseline = sample_mean(x)
    curve = build_curve(x, salience, model, k, MORF)
    target = model.predict(x).predicted_class
    replaced = np.empty(0, dtype=np.int64)
    for t in range(1, k + 1):
        replaced = np.concatenate([replaced, part.subsets[t - 1]])
        record = model.predict(apply_replacement(x, replaced, baseline))
        assert curve.confidences[t] == pytest.approx(float(record.probs[target]), abs=1e-12)


def test_build_curve_bad_order():
    model = make_separated_model()
    x = make_image(seed=2)
    with pytest.raises(ParameterError):
        build_curve(x, oracle_attribution(model, x), model, 4, "sideways")


# --- AUC -------------------------------------------------------------------


def test_auc_three_point_example():
    curve = _curve([1.0, 0.8, 0.0], fractions=[0.0, 0.5, 1.0])
    assert auc_score(curve) == pytest.approx(0.65)


def test_auc_flat_curve():
    assert auc_score(_curve([0.4] * 11)) == pytest.approx(0.4)


def test_auc_instant_collapse():
    c0 = 0.9
    curve = _curve([c0] + [0.0] * 10)
    assert auc_score(curve) == pytest.approx(c0 / 2 * 0.1)


def test_auc_bounded():
    rng = np.random.default_rng(0)
    curve = _curve(rng.random(11))
    assert 0.0 <= auc_score(curve) <= 1.0


def test_auc_requires_morf():
    with pytest.raises(ParameterError):
        auc_score(_curve([0.5, 0.5], order=LERF))


def test_dataset_accuracy_auc():
    a = _curve([0.9, 0.5, 0.2], correct=[True, True, False], fractions=[0, 0.5, 1])
    b = _curve([0.8, 0.4, 0.1], correct=[True, False, False], fractions=[0, 0.5, 1])
    # accuracy series: [1.0, 0.5, 0.0] -> trapezoid = 0.5
    assert dataset_accuracy_auc([a, b]) == pytest.approx(0.5)


# --- AOPC ------------------------------------------------------------------


def test_aopc_flat_curve():
    assert aopc_score(_curve([0.7, 0.7, 0.7])) == 0.0


def test_aopc_mean_of_drops():
    curve = _curve([0.9, 0.6, 0.3])  # drops 0, 0.3, 0.6
    assert aopc_score(curve) == pytest.approx(0.3)


def test_aopc_instant_collapse():
    c0 = 0.9
    curve = _curve([c0] + [0.0] * 10)
    assert aopc_score(curve) == pytest.approx(c0 * 10 / 11)


def test_aopc_identity():
    rng = np.random.default_rng(3)
    conf = rng.random(8)
    curve = _curve(conf, fractions=np.linspace(0, 1, 8))
    assert aopc_score(curve) == pytest.approx(conf[0] - conf.mean(), abs=1e-12)


# --- LOdds -----------------------------------------------------------------


def test_lodds_flat_curve():
    assert lodds_score(_curve([0.5, 0.5, 0.5])) == pytest.approx(0.0)


def test_lodds_single_step():
    curve = _curve([0.8, 0.08], fractions=[0.0, 1.0])
    assert lodds_score(curve) == pytest.approx(math.log(0.1), abs=1e-9)


def test_lodds_direct_summation_oracle():
    rng = np.random.default_rng(4)
    conf = rng.random(12)
    curve = _curve(conf, fractions=np.linspace(0, 1, 12))
    eps = 1e-12
    expected = np.mean([math.log((c + eps) / (conf[0] + eps)) for c in conf[1:]])
    assert lodds_score(curve) == pytest.approx(expected, abs=1e-12)


# --- Comprehensiveness -----------------------------------------------------


def test_comp_flat_curve_is_ideal():
    assert comp_score(_curve([0.6, 0.6, 0.6], order=LERF)) == 0.0


def test_comp_single_step():
    curve = _curve([0.9, 0.4], order=LERF, fractions=[0.0, 1.0])
    assert comp_score(curve) == pytest.approx(0.5)


def test_comp_signed_mean():
    curve = _curve([0.5, 0.6, 0.2], order=LERF)  # drops -0.1, 0.3
    assert comp_score(curve) == pytest.approx(0.1)


def test_comp_requires_lerf():
    with pytest.raises(ParameterError):
        comp_score(_curve([0.5, 0.4]))


# --- combined --------------------------------------------------------------


def test_scores_match_analytic_evaluation():
    model = make_separated_model()
    x = make_image(seed=6)
    salience = oracle_attribution(model, x)
    k = 6
    morf = build_curve(x, salience, model, k, MORF)
    lerf = build_curve(x, salience, model, k, LERF)
    scores = score_curves(morf, lerf)

    part = partition_by_salience(salience, k)
    baseline = sample_mean(x)
    target = model.predict(x).predicted_class

    def conf_after(pixels):
        return float(model.predict(apply_replacement(x, pixels, baseline)).probs[target])

    base_conf = float(model.predict(x).probs[target])
    morf_conf = [base_conf]
    lerf_conf = [base_conf]
    acc_morf, acc_lerf = [], []
    for t in range(k):
        acc_morf.extend(part.subsets[t].tolist())
        acc_lerf.extend(part.subsets[k - 1 - t].tolist())
        morf_conf.append(conf_after(np.array(acc_morf)))
        lerf_conf.append(conf_after(np.array(acc_lerf)))
    fr = morf.fractions
    assert scores.auc == pytest.approx(np.trapezoid(morf_conf, fr), abs=1e-5)
    assert scores.aopc == pytest.approx(np.mean([morf_conf[0] - c for c in morf_conf]), abs=1e-5)
    eps = 1e-12
    assert scores.lodds == pytest.approx(
        np.mean([math.log((c + eps) / (morf_conf[0] + eps)) for c in morf_conf[1:]]), abs=1e-5
    )
    assert scores.comp == pytest.approx(
        np.mean([lerf_conf[0] - c for c in lerf_conf[1:]]), abs=1e-5
    )


def test_rebuilt_curves_are_identical():
    model = make_separated_model()
    x = make_image(seed=7)
    salience = oracle_attribution(model, x)
    a = build_curve(x, salience, model, 5, MORF)
    b = build_curve(x, salience, model, 5, MORF)
    assert a.confidences.tobytes() == b.confidences.tobytes()
    assert np.array_equal(a.correct, b.correct)


def test_curve_validation():
    with pytest.raises(Exception):
        PerturbationCurve(
            fractions=[0.0, 0.5], confidences=[0.5, 0.4], correct=[True, True], order=MORF
        )
    with pytest.raises(Exception):
        PerturbationCurve(
            fractions=[0.0, 1.0], confidences=[0.5, 0.4], correct=[False, True], order=MORF
        )
