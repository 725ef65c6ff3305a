"""Reference salience maps: uniform random, and analytic oracles for
linear-softmax models."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError
from .perturbation import sample_mean
from .predictor import LinearSoftmaxModel
from .tensor_io import ImageTensor, SalienceMap

PRNG_ALGORITHM = "pcg64"


@dataclass
class SeededGenerator:
    """PCG64 stream pinned by a 64-bit seed; same seed, same stream, any platform."""

    seed: int
    algorithm: str = PRNG_ALGORITHM

    def __post_init__(self):
        if self.algorithm != PRNG_ALGORITHM:
            raise ParameterError(f"unsupported PRNG {self.algorithm!r}")
        self.seed = int(self.seed) & 0xFFFFFFFFFFFFFFFF

    def rng(self) -> np.random.Generator:
        return np.random.Generator(np.random.PCG64(self.seed))

    def for_sample(self, index: int) -> "SeededGenerator":
        """Independent per-sample stream: seed XOR sample index."""
        return SeededGenerator(seed=self.seed ^ int(index))


def random_attribution(height: int, width: int, gen: SeededGenerator) -> SalienceMap:
    """I.i.d. Uniform[0, 1) salience; the faithfulness null baseline."""
    scores = gen.rng().random((height, width), dtype=np.float64)
    return SalienceMap(scores)


def oracle_attribution(
    model: LinearSoftmaxModel, x: ImageTensor, target: int | None = None
) -> SalienceMap:
    """First-order effect of mean-replacing each pixel on the target logit margin.

    score_p = sum_ch (x_p - mean_ch) * (w_target[p] - sum_c probs_c * w_c[p]):
    exact for single-pixel replacement in a linear-logit model.
    """
    if tuple(x.data.shape) != tuple(model.input_shape):
        raise ParameterError(
            f"image shape {tuple(x.data.shape)} does not match model input {tuple(model.input_shape)}"
        )
    record = model.predict(x)
    if target is None:
        target = record.predicted_class
    if not 0 <= target < model.num_classes:
        raise ParameterError(f"target class {target} out of range")
    mean = sample_mean(x)
    centered = np.asarray(x.data, dtype=np.float64) - mean  # (H, W, C)
    expected_w = np.tensordot(record.probs, model.weights, axes=1)  # (H, W, C)
    margin_w = model.weights[target] - expected_w
    scores = np.sum(centered * margin_w, axis=2)
    return SalienceMap(scores)


def anti_oracle_attribution(
    model: LinearSoftmaxModel, x: ImageTensor, target: int | None = None
) -> SalienceMap:
    return SalienceMap(-oracle_attribution(model, x, target).scores)
