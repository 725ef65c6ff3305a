"""Black-box classifier abstraction: synthetic models, remote clients, cache."""

from __future__ import annotations

import base64
import hashlib
import itertools
import json
import subprocess
import threading
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError, TransportError, ValidationError
from .tensor_io import ImageTensor

_PROB_SUM_TOL = 1e-5


@dataclass
class PredictionRecord:
    """Class probabilities with the argmax class and its confidence."""

    probs: np.ndarray
    predicted_class: int
    confidence: float

    @classmethod
    def from_probs(cls, probs) -> "PredictionRecord":
        probs = np.asarray(probs, dtype=np.float64)
        if probs.ndim != 1 or probs.size < 2:
            raise ValidationError(f"probs must be a vector over >= 2 classes, got shape {probs.shape}")
        if not np.all(np.isfinite(probs)):
            raise ValidationError("probs contain non-finite values")
        if np.any(probs < -_PROB_SUM_TOL) or np.any(probs > 1 + _PROB_SUM_TOL):
            raise ValidationError("probs must lie in [0, 1]")
        if abs(float(probs.sum()) - 1.0) > _PROB_SUM_TOL:
            raise ValidationError(f"probs sum to {probs.sum()}, expected 1")
        # np.argmax already breaks ties toward the lowest class index.
        cls_idx = int(np.argmax(probs))
        return cls(probs=probs, predicted_class=cls_idx, confidence=float(probs[cls_idx]))

    @property
    def num_classes(self):
        return self.probs.size


class Predictor:
    """Interface: a model id, a declared input shape, and predict()."""

    model_id: str
    input_shape: tuple  # (H, W, C)
    num_classes: int

    def predict(self, x: ImageTensor) -> PredictionRecord:
        raise NotImplementedError

    def predict_batch(self, xs) -> list:
        return [self.predict(x) for x in xs]

    def _check_shape(self, x: ImageTensor):
        if tuple(x.data.shape) != tuple(self.input_shape):
            raise ParameterError(
                f"image shape {tuple(x.data.shape)} does not match predictor input {tuple(self.input_shape)}"
            )


def softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - np.max(logits)
    exp = np.exp(shifted)
    return exp / exp.sum()


class LinearSoftmaxModel(Predictor):
    """Linear logits + softmax: per-class weight tensors over H x W x C.

    Pixel influence is analytically derivable, which makes this family the
    ground-truth oracle for the test suite.
    """

    def __init__(self, weights, biases, model_id="linear"):
        weights = np.asarray(weights, dtype=np.float64)
        biases = np.asarray(biases, dtype=np.float64)
        if weights.ndim != 4:
            raise ValidationError(
                f"weights must be (classes, H, W, C), got shape {weights.shape}"
            )
        if biases.shape != (weights.shape[0],):
            raise ValidationError("one bias per class required")
        if weights.shape[0] < 2:
            raise ValidationError("need at least 2 classes")
        if not (np.all(np.isfinite(weights)) and np.all(np.isfinite(biases))):
            raise ValidationError("weights and biases must be finite")
        self.weights = weights
        self.biases = biases
        self.model_id = model_id
        self.input_shape = tuple(weights.shape[1:])
        self.num_classes = weights.shape[0]

    def logits(self, x: ImageTensor) -> np.ndarray:
        self._check_shape(x)
        data = np.asarray(x.data, dtype=np.float64)
        return np.tensordot(self.weights, data, axes=3) + self.biases

    def predict(self, x: ImageTensor) -> PredictionRecord:
        return PredictionRecord.from_probs(softmax(self.logits(x)))

    @classmethod
    def seeded(cls, input_shape, num_classes, seed, scale=1.0):
        """Deterministic random model for synthetic experiments."""
        rng = np.random.default_rng(seed)
        weights = rng.normal(0.0, scale, size=(num_classes, *input_shape))
        biases = rng.normal(0.0, scale, size=num_classes)
        return cls(weights, biases, model_id=f"seeded-linear-{seed}")


def image_digest(x: ImageTensor) -> str:
    arr = np.ascontiguousarray(x.data)
    h = hashlib.sha256()
    h.update(str(arr.dtype).encode())
    h.update(str(arr.shape).encode())
    h.update(arr.tobytes())
    return h.hexdigest()


class CachingPredictor(Predictor):
    """Memoizes predictions per (model id, image digest) within a run."""

    def __init__(self, inner: Predictor):
        self.inner = inner
        self.model_id = inner.model_id
        self.input_shape = inner.input_shape
        self.num_classes = inner.num_classes
        self._cache = {}
        self._lock = threading.Lock()

    def predict(self, x: ImageTensor) -> PredictionRecord:
        key = (self.model_id, image_digest(x))
        with self._lock:
            hit = self._cache.get(key)
        if hit is not None:
            return hit
        record = self.inner.predict(x)
        with self._lock:
            self._cache[key] = record
        return record


def encode_payload(x: ImageTensor) -> str:
    return base64.b64encode(
        np.ascontiguousarray(x.data, dtype="<f4").tobytes()
    ).decode("ascii")


class HttpPredictor(Predictor):
    """Client for the JSON prediction protocol over HTTP POST."""

    def __init__(self, url, timeout=30.0, retries=2):
        import requests

        self._requests = requests
        self.url = url
        self.timeout = timeout
        self.retries = retries
        self._ids = itertools.count(1)
        meta = self._call({"op": "metadata"})
        try:
            self.num_classes = int(meta["num_classes"])
            self.input_shape = tuple(meta["input_shape"])
            self.model_id = str(meta.get("model_name", url))
        except (KeyError, TypeError) as exc:
            raise TransportError(f"bad metadata response: {meta!r}") from exc

    def _call(self, body):
        last = None
        for attempt in range(1, self.retries + 2):
            try:
                resp = self._requests.post(self.url, json=body, timeout=self.timeout)
                resp.raise_for_status()
                return resp.json()
            except Exception as exc:  # connection, HTTP status, or JSON errors
                last = exc
        raise TransportError(
            f"predictor at {self.url} unreachable: {last}", attempts=self.retries + 1
        )

    def predict(self, x: ImageTensor) -> PredictionRecord:
        self._check_shape(x)
        req_id = next(self._ids)
        body = {
            "id": req_id,
            "op": "predict",
            "shape": list(x.data.shape),
            "data_b64": encode_payload(x),
        }
        resp = self._call(body)
        if "error" in resp:
            raise TransportError(f"remote error: {resp['error']}")
        if resp.get("id") != req_id:
            raise TransportError(f"response id {resp.get('id')} does not match request {req_id}")
        return PredictionRecord.from_probs(resp["probs"])

    def predict_batch(self, xs) -> list:
        records = []
        failures = []
        for i, x in enumerate(xs):
            try:
                records.append(self.predict(x))
            except TransportError as exc:
                failures.append((i, str(exc)))
        if failures:
            raise TransportError(
                "batch failures at indices "
                + ", ".join(f"{i} ({msg})" for i, msg in failures)
            )
        return records


class StdioPredictor(Predictor):
    """Client speaking newline-delimited JSON over a child process's stdio."""

    def __init__(self, command):
        self.command = command
        try:
            self._proc = subprocess.Popen(
                command,
                shell=isinstance(command, str),
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                text=True,
                bufsize=1,
            )
        except OSError as exc:
            raise TransportError(f"cannot spawn adapter {command!r}: {exc}") from exc
        self._lock = threading.Lock()
        self._ids = itertools.count(1)
        meta = self._call({"op": "metadata"})
        try:
            self.num_classes = int(meta["num_classes"])
            self.input_shape = tuple(meta["input_shape"])
            self.model_id = str(meta.get("model_name", str(command)))
        except (KeyError, TypeError) as exc:
            raise TransportError(f"bad metadata response: {meta!r}") from exc

    def _call(self, body):
        with self._lock:
            if self._proc.poll() is not None:
                raise TransportError("adapter process exited")
            try:
                self._proc.stdin.write(json.dumps(body) + "\n")
                self._proc.stdin.flush()
                line = self._proc.stdout.readline()
            except (BrokenPipeError, OSError) as exc:
                raise TransportError(f"adapter pipe failure: {exc}") from exc
        if not line:
            raise TransportError("adapter closed its stdout")
        try:
            return json.loads(line)
        except json.JSONDecodeError as exc:
            raise TransportError(f"adapter sent invalid JSON: {line!r}") from exc

    def predict(self, x: ImageTensor) -> PredictionRecord:
        self._check_shape(x)
        req_id = next(self._ids)
        resp = self._call(
            {
                "id": req_id,
                "op": "predict",
                "shape": list(x.data.shape),
                "data_b64": encode_payload(x),
            }
        )
        if "error" in resp:
            raise TransportError(f"remote error: {resp['error']}")
        if resp.get("id") != req_id:
            raise TransportError(f"response id {resp.get('id')} does not match request {req_id}")
        return PredictionRecord.from_probs(resp["probs"])

    def close(self):
        if self._proc.poll() is None:
            self._proc.stdin.close()
            self._proc.wait(timeout=10)

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()
