"""Conformance checks for remote prediction adapters."""

from __future__ import annotations

import numpy as np

from .errors import FaithevalError, TransportError
from .predictor import Predictor
from .tensor_io import ImageTensor

_SIMPLEX_TOL = 1e-5


def validate_adapter(predictor: Predictor):
    """Run the adapter conformance suite; returns (name, passed, detail) rows.

    TransportError from the very first contact propagates (the adapter is
    unreachable); everything after that is reported as a failed check.
    """
    checks = []

    shape = tuple(predictor.input_shape)
    shape_ok = len(shape) == 3 and all(isinstance(d, int) and d > 0 for d in shape)
    classes_ok = isinstance(predictor.num_classes, int) and predictor.num_classes >= 2
    checks.append(
        (
            "handshake",
            shape_ok and classes_ok,
            f"input_shape={shape}, num_classes={predictor.num_classes}",
        )
    )
    if not (shape_ok and classes_ok):
        return checks

    zeros = ImageTensor(np.zeros(shape, dtype=np.float32))
    try:
        record = predictor.predict(zeros)
    except TransportError:
        raise
    except FaithevalError as exc:
        checks.append(("predict-zeros", False, str(exc)))
        return checks
    checks.append(
        (
            "shape-echo",
            record.num_classes == predictor.num_classes,
            f"got {record.num_classes} probabilities",
        )
    )
    total = float(record.probs.sum())
    checks.append(
        (
            "probability-simplex",
            abs(total - 1.0) <= _SIMPLEX_TOL and bool(np.all(record.probs >= 0)),
            f"sum={total!r}",
        )
    )

    rng = np.random.Generator(np.random.PCG64(0))
    x = ImageTensor(rng.random(shape, dtype=np.float32))
    try:
        first = predictor.predict(x)
        second = predictor.predict(x)
    except FaithevalError as exc:
        checks.append(("determinism", False, str(exc)))
        return checks
    identical = np.array_equal(first.probs, second.probs)
    checks.append(
        (
            "determinism",
            identical,
            "identical probabilities on repeated input"
            if identical
            else f"max diff {np.max(np.abs(first.probs - second.probs))!r}",
        )
    )
    return checks
