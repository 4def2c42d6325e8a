"""Versioned binary checkpoint container.

Byte layout (all integers little-endian unsigned 32-bit):

    magic   8 bytes  b"SFCKPT01"
    hlen    u32      length of the JSON header in bytes
    header  hlen     UTF-8 JSON: {"format_version", "config", "tokenizer_hash",
                     "best_valid_perplexity", "step", "tensors": [
                        {"name", "shape": [...]}, ...]}
    data             for each tensor, in header order: shape-product
                     little-endian float32 values, C order

Tensors are stored as float32 regardless of the in-memory dtype; loading a
float32 model therefore reproduces forward outputs bit-for-bit.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from .model import ModelConfig, parameter_shapes
from .training import Checkpoint

_MAGIC = b"SFCKPT01"
_FORMAT_VERSION = 1


def save_checkpoint(ckpt: Checkpoint, path: str | Path) -> None:
    names = sorted(ckpt.params)
    header = {
        "format_version": _FORMAT_VERSION,
        "config": ckpt.config.to_dict(),
        "tokenizer_hash": ckpt.tokenizer_hash,
        "best_valid_perplexity": ckpt.best_valid_perplexity,
        "step": ckpt.step,
        "tensors": [{"name": n, "shape": list(ckpt.params[n].shape)} for n in names],
    }
    header_bytes = json.dumps(header, sort_keys=True).encode("utf-8")
    with Path(path).open("wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<I", len(header_bytes)))
        fh.write(header_bytes)
        for name in names:
            arr = np.ascontiguousarray(ckpt.params[name], dtype="<f4")
            fh.write(arr.tobytes())


def load_checkpoint(path: str | Path) -> Checkpoint:
    raw = Path(path).read_bytes()
    if raw[:8] != _MAGIC:
        raise ValueError(f"{path}: not a checkpoint file (bad magic)")
    (hlen,) = struct.unpack("<I", raw[8:12])
    header = json.loads(raw[12 : 12 + hlen].decode("utf-8"))
    if header["format_version"] != _FORMAT_VERSION:
        raise ValueError(f"unsupported checkpoint version {header['format_version']}")
    config = ModelConfig(**header["config"])
    expected = parameter_shapes(config)
    params: dict[str, np.ndarray] = {}
    offset = 12 + hlen
    for spec in header["tensors"]:
        name, shape = spec["name"], tuple(spec["shape"])
        if name not in expected:
            raise ValueError(f"unexpected tensor {name!r} in checkpoint")
        if expected[name] != shape:
            raise ValueError(
                f"tensor {name!r} has shape {shape}, config implies {expected[name]}"
            )
        count = int(np.prod(shape)) if shape else 1
        arr = np.frombuffer(raw, dtype="<f4", count=count, offset=offset)
        params[name] = arr.reshape(shape).copy()
        offset += 4 * count
    missing = set(expected) - set(params)
    if missing:
        raise ValueError(f"checkpoint missing tensors: {sorted(missing)}")
    return Checkpoint(
        config=config,
        params=params,
        tokenizer_hash=header["tokenizer_hash"],
        best_valid_perplexity=header["best_valid_perplexity"],
        step=header["step"],
    )


__all__ = ["save_checkpoint", "load_checkpoint"]
