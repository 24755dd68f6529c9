"""DYNM checkpoint files: config JSON block plus named f32 tensors."""

from __future__ import annotations

import json
import struct
from dataclasses import asdict
from pathlib import Path

import numpy as np

from .config import ModelConfig
from .network import ModelParams

MAGIC = b"DYNM"
FORMAT_VERSION = 1


def save_checkpoint(path: str | Path, params: ModelParams):
    """Layout: magic, version u32, config-JSON length u32 + bytes, tensor
    count u32, then per tensor: name length u16, name bytes, rank u8,
    dims u32 each, f32 LE row-major data."""
    config_blob = json.dumps(asdict(params.config), sort_keys=True).encode()
    parts = [MAGIC, struct.pack("<I", FORMAT_VERSION), struct.pack("<I", len(config_blob)), config_blob]
    parts.append(struct.pack("<I", len(params.tensors)))
    for name in sorted(params.tensors):
        tensor = params.tensors[name]
        encoded = name.encode()
        parts.append(struct.pack("<H", len(encoded)))
        parts.append(encoded)
        parts.append(struct.pack("<B", tensor.ndim))
        parts.append(struct.pack(f"<{tensor.ndim}I", *tensor.shape))
        parts.append(np.ascontiguousarray(tensor, dtype="<f4").tobytes())
    tmp = Path(path).with_name(Path(path).name + ".tmp")
    tmp.write_bytes(b"".join(parts))
    tmp.replace(path)


def load_checkpoint(path: str | Path) -> ModelParams:
    raw = Path(path).read_bytes()
    if len(raw) < 12 or raw[:4] != MAGIC:
        raise ValueError(f"{path}: not a DYNM checkpoint")
    (version,) = struct.unpack_from("<I", raw, 4)
    if version != FORMAT_VERSION:
        raise ValueError(f"{path}: unsupported DYNM version {version}")
    (config_len,) = struct.unpack_from("<I", raw, 8)
    offset = 12
    config = ModelConfig(**json.loads(raw[offset: offset + config_len].decode()))
    offset += config_len
    (count,) = struct.unpack_from("<I", raw, offset)
    offset += 4
    tensors: dict[str, np.ndarray] = {}
    for _ in range(count):
        (name_len,) = struct.unpack_from("<H", raw, offset)
        offset += 2
        name = raw[offset: offset + name_len].decode()
        offset += name_len
        (rank,) = struct.unpack_from("<B", raw, offset)
        offset += 1
        dims = struct.unpack_from(f"<{rank}I", raw, offset)
        offset += 4 * rank
        size = int(np.prod(dims)) if rank else 1
        data = np.frombuffer(raw, dtype="<f4", count=size, offset=offset)
        offset += 4 * size
        tensors[name] = data.reshape(dims).astype(np.float32)
    if offset != len(raw):
        raise ValueError(f"{path}: {len(raw) - offset} trailing bytes")
    return ModelParams(config=config, tensors=tensors)
