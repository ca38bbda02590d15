"""Data generation and ingestion: MNIST (IDX format), bars images, patterns.

MNIST files are the classic big-endian IDX format (magic 2051 for image
tensors, 2049 for label vectors); plain or gzip-compressed files are read
transparently. Pixels are mapped linearly from [0, 255] to [-1, 1].

The bars images are 8x8 grids built from 8 horizontal bars, each switched on
independently with probability 1/2, so the stimulus distribution is uniform
over 256 patterns (8 bits of entropy). Memory patterns are ±1 vectors with an
exactly balanced number of +1 and -1 entries.
"""

from __future__ import annotations

import gzip
import os
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

__all__ = [
    "IMAGE_MAGIC",
    "LABEL_MAGIC",
    "MNIST_DIR_ENV",
    "MnistDataset",
    "BarsSample",
    "BarsDataset",
    "MemoryPatternSet",
    "parse_idx",
    "write_idx",
    "load_mnist",
    "default_mnist_dir",
    "generate_bars",
    "generate_patterns",
    "corrupt_patterns",
]

IMAGE_MAGIC = 0x00000803
LABEL_MAGIC = 0x00000801
MNIST_DIR_ENV = "PIDNETS_MNIST_DIR"

_MNIST_FILES = {
    "train_images": "train-images-idx3-ubyte",
    "train_labels": "train-labels-idx1-ubyte",
    "test_images": "t10k-images-idx3-ubyte",
    "test_labels": "t10k-labels-idx1-ubyte",
}


class IdxFormatError(ValueError):
    """Malformed IDX payload (bad magic, truncation, count mismatch)."""


def parse_idx(payload: bytes) -> np.ndarray:
    """Decode an IDX payload into a uint8 array (1-d labels or 3-d images)."""
    if len(payload) < 8:
        raise IdxFormatError("IDX payload shorter than its header")
    (magic,) = struct.unpack(">I", payload[:4])
    if magic == LABEL_MAGIC:
        ndim = 1
    elif magic == IMAGE_MAGIC:
        ndim = 3
    else:
        raise IdxFormatError(f"unknown IDX magic 0x{magic:08x}")
    header = 4 + 4 * ndim
    if len(payload) < header:
        raise IdxFormatError("IDX payload truncated inside the header")
    dims = struct.unpack(f">{ndim}I", payload[4:header])
    expected = int(np.prod(dims))
    body = payload[header:]
    if len(body) != expected:
        raise IdxFormatError(f"IDX payload has {len(body)} data bytes, expected {expected}")
    return np.frombuffer(body, dtype=np.uint8).reshape(dims)


def write_idx(array: np.ndarray) -> bytes:
    """Encode a uint8 array back into IDX bytes (inverse of :func:`parse_idx`)."""
    array = np.ascontiguousarray(array, dtype=np.uint8)
    if array.ndim == 1:
        magic = LABEL_MAGIC
    elif array.ndim == 3:
        magic = IMAGE_MAGIC
    else:
        raise IdxFormatError(f"can only encode 1-d labels or 3-d images, got ndim={array.ndim}")
    header = struct.pack(f">{1 + array.ndim}I", magic, *array.shape)
    return header + array.tobytes()


def _read_maybe_gz(directory: Path, stem: str) -> bytes:
    plain = directory / stem
    if plain.exists():
        return plain.read_bytes()
    gz = directory / (stem + ".gz")
    if gz.exists():
        with gzip.open(gz, "rb") as fh:
            return fh.read()
    raise FileNotFoundError(f"missing MNIST file {stem}[.gz] in {directory}")


@dataclass
class MnistDataset:
    """Both canonical splits, pixels rescaled to [-1, 1]."""

    train_images: np.ndarray
    train_labels: np.ndarray
    test_images: np.ndarray
    test_labels: np.ndarray

    def __post_init__(self):
        for images, labels, n in ((self.train_images, self.train_labels, 60000),
                                  (self.test_images, self.test_labels, 10000)):
            if images.shape != (n, 784):
                raise ValueError(f"expected {n}x784 images, got {images.shape}")
            if labels.shape != (n,):
                raise ValueError("image/label count mismatch")
            if images.min() < -1.0 or images.max() > 1.0:
                raise ValueError("pixels must lie in [-1, 1]")
            if labels.min() < 0 or labels.max() > 9:
                raise ValueError("labels must lie in [0, 9]")


def default_mnist_dir() -> Path:
    """The MNIST directory: $PIDNETS_MNIST_DIR, else ./data/mnist."""
    env = os.environ.get(MNIST_DIR_ENV)
    if env:
        return Path(env)
    return Path("data") / "mnist"


def load_mnist(path: str | Path | None = None) -> MnistDataset:
    """Load and validate the four IDX files from a directory."""
    directory = Path(path) if path is not None else default_mnist_dir()
    raw = {key: parse_idx(_read_maybe_gz(directory, stem)) for key, stem in _MNIST_FILES.items()}
    for split in ("train", "test"):
        if raw[f"{split}_images"].shape[0] != raw[f"{split}_labels"].shape[0]:
            raise IdxFormatError(f"{split} images and labels disagree on the sample count")

    def scale(images):
        return images.reshape(images.shape[0], -1).astype(float) / 127.5 - 1.0

    return MnistDataset(
        train_images=scale(raw["train_images"]),
        train_labels=raw["train_labels"].astype(np.int64),
        test_images=scale(raw["test_images"]),
        test_labels=raw["test_labels"].astype(np.int64),
    )


@dataclass(frozen=True)
class BarsSample:
    pixels: np.ndarray  # 64 values in {-1, +1}, row i all +1 iff bar i active
    bar_mask: np.ndarray  # 8 booleans


class BarsDataset:
    """A batch of bars images; behaves as a sequence of :class:`BarsSample`."""

    def __init__(self, pixels: np.ndarray, bar_masks: np.ndarray):
        self.pixels = pixels
        self.bar_masks = bar_masks

    def __len__(self) -> int:
        return self.pixels.shape[0]

    def __getitem__(self, i: int) -> BarsSample:
        return BarsSample(self.pixels[i], self.bar_masks[i])


def generate_bars(rng: np.random.Generator, n: int, n_bars: int = 8) -> BarsDataset:
    """i.i.d. bars images: each of the 8 horizontal bars on with p = 1/2."""
    if n < 1:
        raise ValueError("need at least one sample")
    masks = rng.random((n, n_bars)) < 0.5
    pixels = np.where(masks, 1.0, -1.0).repeat(n_bars, axis=1)
    return BarsDataset(pixels, masks)


@dataclass
class MemoryPatternSet:
    """±1 patterns, each with exactly half the entries positive."""

    patterns: np.ndarray

    def __post_init__(self):
        if self.patterns.ndim != 2 or self.patterns.shape[1] % 2 != 0:
            raise ValueError("patterns must be rows of even length")
        if not np.all(np.isin(self.patterns, (-1.0, 1.0))):
            raise ValueError("pattern entries must be ±1")
        if not np.all(self.patterns.sum(axis=1) == 0):
            raise ValueError("each pattern must balance +1 and -1 entries")

    def __len__(self) -> int:
        return self.patterns.shape[0]


def generate_patterns(rng: np.random.Generator, p_count: int, n: int = 100) -> MemoryPatternSet:
    """p_count random balanced ±1 patterns of length n."""
    if p_count < 1:
        raise ValueError("need at least one pattern")
    base = np.concatenate([np.ones(n // 2), -np.ones(n - n // 2)])
    patterns = np.stack([rng.permutation(base) for _ in range(p_count)])
    return MemoryPatternSet(patterns)


def corrupt_patterns(patterns: np.ndarray, beta: float, rng: np.random.Generator) -> np.ndarray:
    """Resample a fraction ``beta`` of the entries uniformly from ±1.

    A corrupted entry is drawn fresh, so it flips with probability 1/2."""
    if not 0.0 <= beta <= 1.0:
        raise ValueError("corruption fraction must lie in [0, 1]")
    patterns = np.asarray(patterns, dtype=float)
    out = patterns.copy()
    mask = rng.random(patterns.shape) < beta
    out[mask] = rng.choice(np.array([-1.0, 1.0]), size=int(mask.sum()))
    return out
