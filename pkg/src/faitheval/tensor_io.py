"""Bit-exact tensor container and dataset manifest loading.

The on-disk container ("STF") is: 4 magic bytes "STEN", a little-endian u32
header length, a UTF-8 JSON header {"dtype": "f32", "shape": [...], "order":
"row-major"}, then the raw little-endian float32 payload. PNG ingestion is
also supported for images (8-bit, scaled to [0, 1]); lossy formats are not.
"""

from __future__ import annotations

import json
import os
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import CorruptionError, FormatError, ManifestError, ValidationError

_MAGIC = b"STEN"


def _as_float_array(values, name):
    arr = np.asarray(values)
    if arr.dtype not in (np.float32, np.float64):
        arr = arr.astype(np.float64)
    if arr.size and not np.all(np.isfinite(arr)):
        raise ValidationError(f"{name} contains non-finite values")
    return arr


@dataclass
class ImageTensor:
    """H x W x C image, row-major, finite float values."""

    data: np.ndarray

    def __post_init__(self):
        self.data = _as_float_array(self.data, "image data")
        if self.data.ndim != 3 or min(self.data.shape) < 1:
            raise ValidationError(
                f"image must be H x W x C with positive dims, got shape {self.data.shape}"
            )

    @property
    def height(self):
        return self.data.shape[0]

    @property
    def width(self):
        return self.data.shape[1]

    @property
    def channels(self):
        return self.data.shape[2]

    @property
    def num_pixels(self):
        return self.data.shape[0] * self.data.shape[1]


@dataclass
class SalienceMap:
    """H x W per-pixel importance scores; sign and scale unconstrained."""

    scores: np.ndarray

    def __post_init__(self):
        self.scores = _as_float_array(self.scores, "salience scores")
        if self.scores.ndim != 2 or min(self.scores.shape) < 1:
            raise ValidationError(
                f"salience map must be H x W with positive dims, got shape {self.scores.shape}"
            )

    @property
    def height(self):
        return self.scores.shape[0]

    @property
    def width(self):
        return self.scores.shape[1]

    @property
    def num_pixels(self):
        return self.scores.shape[0] * self.scores.shape[1]


@dataclass
class ManifestEntry:
    image: str
    salience: dict  # method name -> salience file path
    label: int | None = None
    sample_id: str = ""


@dataclass
class DatasetManifest:
    identifier: str
    entries: list = field(default_factory=list)

    @property
    def methods(self):
        names = []
        for entry in self.entries:
            for name in entry.salience:
                if name not in names:
                    names.append(name)
        return names


def write_array(arr: np.ndarray, path) -> None:
    """Write a raw float array in the STF container (payload cast to f32)."""
    arr = np.ascontiguousarray(arr)
    if arr.size and not np.all(np.isfinite(arr)):
        raise ValidationError("refusing to write non-finite values")
    payload = arr.astype("<f4", copy=False).tobytes()
    header = json.dumps(
        {"dtype": "f32", "shape": list(arr.shape), "order": "row-major"},
        separators=(",", ":"),
    ).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<I", len(header)))
        fh.write(header)
        fh.write(payload)


def read_array(path) -> np.ndarray:
    """Read an STF container back into a float32 array of the stored shape."""
    with open(path, "rb") as fh:
        blob = fh.read()
    if blob[:4] != _MAGIC:
        raise FormatError(f"{path}: bad magic {blob[:4]!r}, expected {_MAGIC!r}")
    if len(blob) < 8:
        raise CorruptionError(f"{path}: truncated header")
    (header_len,) = struct.unpack("<I", blob[4:8])
    header_end = 8 + header_len
    if len(blob) < header_end:
        raise CorruptionError(f"{path}: header length {header_len} exceeds file size")
    try:
        header = json.loads(blob[8:header_end].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise CorruptionError(f"{path}: unreadable header: {exc}") from exc
    if header.get("dtype") != "f32":
        raise FormatError(f"{path}: unsupported dtype {header.get('dtype')!r}")
    if header.get("order", "row-major") != "row-major":
        raise FormatError(f"{path}: unsupported order {header.get('order')!r}")
    shape = header.get("shape")
    if not isinstance(shape, list) or not all(
        isinstance(d, int) and d > 0 for d in shape
    ):
        raise CorruptionError(f"{path}: invalid shape {shape!r}")
    expected = int(np.prod(shape)) * 4
    payload = blob[header_end:]
    if len(payload) != expected:
        raise CorruptionError(
            f"{path}: payload is {len(payload)} bytes, expected {expected}"
        )
    arr = np.frombuffer(payload, dtype="<f4").reshape(shape)
    if arr.size and not np.all(np.isfinite(arr)):
        raise ValidationError(f"{path}: payload contains non-finite values")
    return arr.copy()


def write_tensor(tensor, path) -> None:
    """Write an ImageTensor or SalienceMap to an STF file."""
    if isinstance(tensor, ImageTensor):
        write_array(tensor.data, path)
    elif isinstance(tensor, SalienceMap):
        write_array(tensor.scores, path)
    else:
        raise ValidationError(f"cannot serialize {type(tensor).__name__}")


def read_tensor(path):
    """Read an STF file; rank 3 yields an ImageTensor, rank 2 a SalienceMap."""
    arr = read_array(path)
    if arr.ndim == 3:
        return ImageTensor(arr)
    if arr.ndim == 2:
        return SalienceMap(arr)
    raise CorruptionError(f"{path}: rank-{arr.ndim} tensor is neither image nor map")


def load_image(path) -> ImageTensor:
    """Load an image from STF or PNG (8-bit PNG scaled to [0, 1] floats)."""
    path = os.fspath(path)
    with open(path, "rb") as fh:
        head = fh.read(8)
    if head[:4] == _MAGIC:
        tensor = read_tensor(path)
        if not isinstance(tensor, ImageTensor):
            raise FormatError(f"{path}: expected an image tensor, got a salience map")
        return tensor
    if head == b"\x89PNG\r\n\x1a\n":
        from PIL import Image

        with Image.open(path) as img:
            if img.mode not in ("L", "RGB"):
                img = img.convert("RGB")
            arr = np.asarray(img, dtype=np.float32) / 255.0
        if arr.ndim == 2:
            arr = arr[:, :, None]
        return ImageTensor(arr)
    raise FormatError(f"{path}: neither STF nor PNG")


def load_salience(path) -> SalienceMap:
    tensor = read_tensor(path)
    if not isinstance(tensor, SalienceMap):
        raise FormatError(f"{path}: expected a salience map, got an image tensor")
    return tensor


def _reject_duplicate_keys(pairs):
    seen = {}
    for key, value in pairs:
        if key in seen:
            raise ManifestError(f"duplicate key {key!r} in manifest object")
        seen[key] = value
    return seen


def load_manifest(path) -> DatasetManifest:
    """Load and validate a dataset manifest, resolving paths relative to it."""
    path = Path(path)
    try:
        raw = json.loads(path.read_text(), object_pairs_hook=_reject_duplicate_keys)
    except json.JSONDecodeError as exc:
        raise ManifestError(f"{path}: invalid JSON: {exc}") from exc
    if not isinstance(raw, dict) or "entries" not in raw or "id" not in raw:
        raise ManifestError(f"{path}: manifest must have 'id' and 'entries'")
    base = path.parent
    entries = []
    for idx, item in enumerate(raw["entries"]):
        if not isinstance(item, dict) or "image" not in item or "salience" not in item:
            raise ManifestError(f"{path}: entry {idx} missing 'image' or 'salience'")
        image_path = str(base / item["image"])
        if not os.path.exists(image_path):
            raise ManifestError(f"{path}: entry {idx} references missing image {item['image']!r}")
        salience = {}
        for method, rel in item["salience"].items():
            sal_path = str(base / rel)
            if not os.path.exists(sal_path):
                raise ManifestError(
                    f"{path}: entry {idx} method {method!r} references missing file {rel!r}"
                )
            salience[method] = sal_path
        label = item.get("label")
        if label is not None and not isinstance(label, int):
            raise ManifestError(f"{path}: entry {idx} label must be an integer or null")
        sample_id = str(item.get("id", Path(item["image"]).stem))
        entries.append(
            ManifestEntry(image=image_path, salience=salience, label=label, sample_id=sample_id)
        )
    return DatasetManifest(identifier=str(raw["id"]), entries=entries)
