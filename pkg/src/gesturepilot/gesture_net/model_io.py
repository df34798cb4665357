"""Binary weight files for MlpModel.

Layout, all little-endian:

    8 bytes   magic  b"GPMLPNET"
    u32       format version (1)
    u32       layer count L
    L x (u32 rows, u32 cols)   weight shapes
    per layer: rows*cols f64 weights (row-major), cols f64 biases
    u32       CRC-32 of every preceding byte

Layer sizes are read from the file, so any consistent chain loads, not
just the default architecture.
"""

from __future__ import annotations

import struct
import zlib

import numpy as np

from ..errors import FormatError
from .mlp import MlpModel

MAGIC = b"GPMLPNET"
FORMAT_VERSION = 1


def model_to_bytes(model: MlpModel) -> bytes:
    parts = [MAGIC, struct.pack("<II", FORMAT_VERSION, len(model.weights))]
    for w in model.weights:
        parts.append(struct.pack("<II", w.shape[0], w.shape[1]))
    for w, b in zip(model.weights, model.biases):
        parts.append(np.ascontiguousarray(w, dtype="<f8").tobytes())
        parts.append(np.ascontiguousarray(b, dtype="<f8").tobytes())
    body = b"".join(parts)
    return body + struct.pack("<I", zlib.crc32(body))


def model_from_bytes(data: bytes) -> MlpModel:
    if len(data) < len(MAGIC) + 8 + 4:
        raise FormatError("file too short")
    if data[:len(MAGIC)] != MAGIC:
        raise FormatError("bad magic")
    version, layer_count = struct.unpack_from("<II", data, len(MAGIC))
    if version != FORMAT_VERSION:
        raise FormatError(f"unsupported format version {version}")
    if layer_count == 0:
        raise FormatError("zero layers")

    offset = len(MAGIC) + 8
    shapes = []
    for _ in range(layer_count):
        if offset + 8 > len(data):
            raise FormatError("truncated layer header")
        rows, cols = struct.unpack_from("<II", data, offset)
        offset += 8
        if rows == 0 or cols == 0:
            raise FormatError("zero-sized layer")
        shapes.append((rows, cols))
    for (_, prev_cols), (rows, _) in zip(shapes[:-1], shapes[1:]):
        if prev_cols != rows:
            raise FormatError(f"dimension mismatch: {prev_cols} -> {rows}")

    payload = sum(rows * cols + cols for rows, cols in shapes) * 8
    expected = offset + payload + 4
    if len(data) != expected:
        raise FormatError(f"expected {expected} bytes, got {len(data)}")
    stored_crc, = struct.unpack_from("<I", data, len(data) - 4)
    if zlib.crc32(data[:-4]) != stored_crc:
        raise FormatError("checksum mismatch")

    weights, biases = [], []
    for rows, cols in shapes:
        w = np.frombuffer(data, dtype="<f8", count=rows * cols, offset=offset)
        offset += rows * cols * 8
        b = np.frombuffer(data, dtype="<f8", count=cols, offset=offset)
        offset += cols * 8
        weights.append(w.reshape(rows, cols).astype(float))
        biases.append(b.astype(float))
    return MlpModel(weights, biases)


def save_model(model: MlpModel, path) -> None:
    with open(path, "wb") as fh:
        fh.write(model_to_bytes(model))


def load_model(path) -> MlpModel:
    with open(path, "rb") as fh:
        return model_from_bytes(fh.read())
