"""Reader and writer for the big-endian IDX files used by MNIST."""

from __future__ import annotations

import gzip
import struct
from pathlib import Path

import numpy as np

from .errors import FormatError

IMAGE_MAGIC = 0x00000803
LABEL_MAGIC = 0x00000801
_UBYTE = 0x08


def _open(path):
    path = Path(path)
    if path.suffix == ".gz":
        return gzip.open(path, "rb")
    return path.open("rb")


def read_idx(path, expected_magic: int | None = None, max_items: int | None = None) -> np.ndarray:
    """Read an unsigned-byte IDX file into an array of its declared shape.

    Raises FormatError on a wrong magic number or a payload shorter than
    the header promises.
    """
    with _open(path) as fh:
        header = fh.read(4)
        if len(header) < 4:
            raise FormatError(f"{path}: truncated header")
        (magic,) = struct.unpack(">I", header)
        if expected_magic is not None and magic != expected_magic:
            raise FormatError(f"{path}: magic 0x{magic:08x}, expected 0x{expected_magic:08x}")
        if magic >> 16 != 0 or (magic >> 8) & 0xFF != _UBYTE:
            raise FormatError(f"{path}: unsupported IDX magic 0x{magic:08x}")
        ndim = magic & 0xFF
        raw_dims = fh.read(4 * ndim)
        if len(raw_dims) < 4 * ndim:
            raise FormatError(f"{path}: truncated dimension table")
        dims = struct.unpack(">" + "I" * ndim, raw_dims)
        item = int(np.prod(dims[1:], dtype=np.int64))
        count = dims[0] if max_items is None else min(dims[0], max_items)
        payload = fh.read(count * item)
        if len(payload) < count * item:
            raise FormatError(f"{path}: truncated payload ({len(payload)} of {count * item} bytes)")
    return np.frombuffer(payload, dtype=np.uint8).reshape((count, *dims[1:]))


def write_idx(path, array) -> Path:
    """Write a uint8 array as IDX (magic 0x0000080<ndim>)."""
    array = np.asarray(array)
    if array.dtype != np.uint8:
        raise ValueError("only uint8 IDX files are supported")
    path = Path(path)
    header = struct.pack(">I", (_UBYTE << 8) | array.ndim) + struct.pack(">" + "I" * array.ndim, *array.shape)
    opener = gzip.open if path.suffix == ".gz" else open
    with opener(path, "wb") as fh:
        fh.write(header + array.tobytes())
    return path


def load_mnist_subset(path, max_images: int) -> np.ndarray:
    """First ``max_images`` 28x28 images flattened to rows of 784 values in [0, 1]."""
    images = read_idx(path, IMAGE_MAGIC, max_images)
    if images.shape[1:] != (28, 28):
        raise FormatError(f"{path}: images are {images.shape[1:]}, expected (28, 28)")
    return images.reshape(len(images), -1).astype(float) / 255.0


def load_mnist_labels(path, max_items: int | None = None) -> np.ndarray:
    return read_idx(path, LABEL_MAGIC, max_items).astype(np.int64)
