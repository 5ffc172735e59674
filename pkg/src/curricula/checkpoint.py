"""Versioned binary checkpoints for model states.

Byte layout (all little-endian, offsets in bytes):

    0   8   magic ``CURRCKPT``
    8   2   format version (u16), currently 1
    10  1   activation code (u8): 0 relu, 1 tanh
    11  1   reserved, 0
    12  4   input_dim (u32)
    16  4   num_classes (u32)
    20  4   number of hidden layers H (u32)
    24  4   epoch_tag (u32)
    28  8   model seed (u64)
    36  8   parameter count P (u64)
    44  4H  hidden layer widths (u32 each)
    ..  8P  parameters (f64)
    ..  4   crc32 of all preceding bytes (u32)

The fixed layout gives bit-exact round trips, which the determinism
contracts elsewhere rely on.
"""

from __future__ import annotations

import struct
import zlib
from pathlib import Path

import numpy as np

from .errors import FormatError, UnsupportedVersionError
from .model import ACTIVATIONS, ModelSpec, ModelState

MAGIC = b"CURRCKPT"
VERSION = 1
_HEADER = struct.Struct("<8sHBBIIIIQQ")


def state_to_bytes(state: ModelState) -> bytes:
    spec = state.spec
    header = _HEADER.pack(
        MAGIC,
        VERSION,
        spec.activation_code,
        0,
        spec.input_dim,
        spec.num_classes,
        len(spec.hidden_dims),
        state.epoch_tag,
        spec.seed,
        spec.param_count,
    )
    hidden = struct.pack(f"<{len(spec.hidden_dims)}I", *spec.hidden_dims)
    params = state.parameters.astype("<f8").tobytes()
    body = header + hidden + params
    return body + struct.pack("<I", zlib.crc32(body))


def state_from_bytes(raw: bytes) -> ModelState:
    if len(raw) < _HEADER.size:
        raise FormatError("truncated header", offset=len(raw))
    (
        magic,
        version,
        act_code,
        _reserved,
        input_dim,
        num_classes,
        n_hidden,
        epoch_tag,
        seed,
        param_count,
    ) = _HEADER.unpack_from(raw, 0)
    if magic != MAGIC:
        raise FormatError(f"bad magic {magic!r}", offset=0)
    if version != VERSION:
        raise UnsupportedVersionError(f"unsupported format version {version}", offset=8)
    if act_code >= len(ACTIVATIONS):
        raise FormatError(f"unknown activation code {act_code}", offset=10)

    expected = _HEADER.size + 4 * n_hidden + 8 * param_count + 4
    if len(raw) != expected:
        raise FormatError(
            f"expected {expected} bytes, got {len(raw)}",
            offset=min(len(raw), expected),
        )
    body, (crc,) = raw[:-4], struct.unpack("<I", raw[-4:])
    if zlib.crc32(body) != crc:
        raise FormatError("crc mismatch", offset=len(raw) - 4)

    off = _HEADER.size
    hidden = struct.unpack_from(f"<{n_hidden}I", raw, off)
    off += 4 * n_hidden
    params = np.frombuffer(raw, dtype="<f8", count=param_count, offset=off)
    spec = ModelSpec(
        input_dim=input_dim,
        hidden_dims=tuple(hidden),
        num_classes=num_classes,
        activation=ACTIVATIONS[act_code],
        seed=seed,
    )
    if spec.param_count != param_count:
        raise FormatError(
            f"parameter count {param_count} does not match dims {spec.dims}", offset=36
        )
    return ModelState(np.asarray(params, dtype=np.float64), spec, epoch_tag=epoch_tag)


def save_state(state: ModelState, path: str | Path) -> None:
    Path(path).write_bytes(state_to_bytes(state))


def load_state(path: str | Path) -> ModelState:
    return state_from_bytes(Path(path).read_bytes())
