"""Binary checkpoint format.

Layout (little-endian)::

    b"RMXC" | u8 version | u32 header_len | header JSON (utf-8)
    | float64 parameter blob | u64 checksum

The header carries the model config, parameter names and shapes in declared
layer order, and training metadata. The checksum is the 8-byte BLAKE2b digest
of the blob.
"""

from __future__ import annotations

import hashlib
import json
import struct

import numpy as np

from .errors import CheckpointError
from .io_utils import atomic_write_bytes
from .model import ModelConfig, RaMixNet, parameter_count

MAGIC = b"RMXC"
VERSION = 1
_PREFIX = struct.Struct("<4sBI")
_CHECKSUM = struct.Struct("<Q")


def _checksum(blob: bytes) -> int:
    return _CHECKSUM.unpack(hashlib.blake2b(blob, digest_size=8).digest())[0]


def dump_checkpoint(model: RaMixNet, metadata: dict | None = None) -> bytes:
    params = model.params()
    header = {
        "config": model.cfg.to_dict(),
        "parameters": [[name, list(p.shape)] for name, p in params.items()],
        "metadata": metadata or {},
    }
    hbytes = json.dumps(header, sort_keys=True, separators=(",", ":"), allow_nan=False).encode("utf-8")
    blob = b"".join(np.ascontiguousarray(p, dtype="<f8").tobytes() for p in params.values())
    return _PREFIX.pack(MAGIC, VERSION, len(hbytes)) + hbytes + blob + _CHECKSUM.pack(_checksum(blob))


def save_checkpoint(model: RaMixNet, path, metadata: dict | None = None) -> None:
    atomic_write_bytes(path, dump_checkpoint(model, metadata))


def parse_checkpoint(data: bytes, variant: str | None = None):
    """Decode checkpoint bytes into ``(model, metadata)``.

    ``variant`` optionally pins the expected architecture; a mismatch raises
    :class:`CheckpointError` before any model is built.
    """
    if len(data) < _PREFIX.size:
        raise CheckpointError("checkpoint truncated before header")
    magic, version, hlen = _PREFIX.unpack_from(data)
    if magic != MAGIC:
        raise CheckpointError(f"bad checkpoint magic {magic!r}")
    if version != VERSION:
        raise CheckpointError(f"unsupported checkpoint version {version}")
    start = _PREFIX.size
    if len(data) < start + hlen:
        raise CheckpointError("checkpoint truncated inside header")
    try:
        header = json.loads(data[start : start + hlen].decode("utf-8"))
        cfg = ModelConfig.from_dict(header["config"])
        shapes = [(name, tuple(shape)) for name, shape in header["parameters"]]
    except (ValueError, KeyError, TypeError) as exc:
        raise CheckpointError(f"corrupt checkpoint header: {exc}") from None
    if variant is not None and cfg.variant != variant:
        raise CheckpointError(f"checkpoint holds a {cfg.variant} model, expected {variant}")
    n_values = sum(int(np.prod(s)) for _, s in shapes)
    if n_values != parameter_count(cfg):
        raise CheckpointError(f"checkpoint has {n_values} parameters, config implies {parameter_count(cfg)}")
    blob_start = start + hlen
    blob_end = blob_start + 8 * n_values
    if len(data) != blob_end + _CHECKSUM.size:
        raise CheckpointError(f"checkpoint is {len(data)} bytes, expected {blob_end + _CHECKSUM.size}")
    blob = data[blob_start:blob_end]
    (stored,) = _CHECKSUM.unpack_from(data, blob_end)
    if stored != _checksum(blob):
        raise CheckpointError("parameter checksum mismatch")
    model = RaMixNet(cfg)
    params = model.params()
    if [(k, p.shape) for k, p in params.items()] != shapes:
        raise CheckpointError("parameter layout does not match the config")
    values = np.frombuffer(blob, dtype="<f8")
    offset = 0
    for p in params.values():
        p[...] = values[offset : offset + p.size].reshape(p.shape)
        offset += p.size
    return model, header.get("metadata", {})


def load_checkpoint(path, variant: str | None = None):
    """Read a checkpoint file; returns ``(model, metadata)``."""
    try:
        with open(path, "rb") as fh:
            data = fh.read()
    except OSError as exc:
        raise CheckpointError(f"cannot read checkpoint {path}: {exc}") from None
    return parse_checkpoint(data, variant)
