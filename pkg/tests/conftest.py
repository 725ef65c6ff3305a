import sys
import textwrap

import numpy as np
import pytest

from faitheval import ImageTensor, LinearSoftmaxModel

# Stdio adapter used by protocol and conformance tests: echoes a fixed
# class distribution derived deterministically from the input bytes.
ADAPTER_SOURCE = textwrap.dedent(
    """
    import base64, hashlib, json, struct, sys

    SHAPE = [4, 4, 1]
    CLASSES = 3

    def probs_for(data_b64):
        digest = hashlib.sha256(base64.b64decode(data_b64)).digest()
        raw = [1.0 + struct.unpack("<H", digest[2 * i : 2 * i + 2])[0] for i in range(CLASSES)]
        total = sum(raw)
        return [v / total for v in raw]

    for line in sys.stdin:
        line = line.strip()
        if not line:
            continue
        req = json.loads(line)
        if req.get("op") == "metadata":
            resp = {"num_classes": CLASSES, "input_shape": SHAPE, "model_name": "echo-adapter"}
        elif req.get("op") == "predict":
            if req.get("shape") != SHAPE:
                resp = {"id": req.get("id"), "error": "bad shape"}
            else:
                resp = {"id": req.get("id"), "probs": probs_for(req["data_b64"])}
        else:
            resp = {"id": req.get("id"), "error": "unknown op"}
        print(json.dumps(resp), flush=True)
    """
)


@pytest.fixture
def adapter_script(tmp_path):
    path = tmp_path / "echo_adapter.py"
    path.write_text(ADAPTER_SOURCE)
    return f"{sys.executable} {path}"


class CountingPredictor:
    """Wraps a predictor and counts every predict() hit."""

    def __init__(self, inner):
        self.inner = inner
        self.model_id = inner.model_id
        self.input_shape = inner.input_shape
        self.num_classes = inner.num_classes
        self.calls = 0

    def predict(self, x):
        self.calls += 1
        return self.inner.predict(x)

    def predict_batch(self, xs):
        return [self.predict(x) for x in xs]


def make_separated_model(h=6, w=6, c=1, gap=4.0):
    """Binary linear model with per-pixel weight margins spread far apart.

    The class-0-minus-class-1 weight margin varies strongly across pixels, so
    subset influences are well separated and the analytic oracle ordering is
    unambiguous.
    """
    n = h * w
    margins = np.linspace(gap, -gap, n).reshape(h, w, c)
    w0 = margins / 2.0
    w1 = -margins / 2.0
    return LinearSoftmaxModel(np.stack([w0, w1]), [0.3, 0.0], model_id="separated")


def make_image(h=6, w=6, c=1, seed=0):
    rng = np.random.default_rng(seed)
    return ImageTensor(rng.random((h, w, c)))
