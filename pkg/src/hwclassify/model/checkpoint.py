"""Checkpoint file format.

Layout: magic line, 8-byte little-endian header length, JSON header
(config, parameter name/shape/dtype table, optional optimizer marker,
metadata), then the raw little-endian array blobs in table order:
parameters first, then Adam m and v moments when present. Parameters
round-trip bitwise.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field

import numpy as np

from ..errors import ConfigurationError
from .network import ModelConfig, param_shapes
from .optim import AdamState

MAGIC = b"HWCL-CKPT-v1\n"


@dataclass
class Checkpoint:
    config: ModelConfig
    params: dict[str, np.ndarray]
    opt_state: AdamState | None = None
    metadata: dict = field(default_factory=dict)


def _blob(arr: np.ndarray) -> bytes:
    return np.ascontiguousarray(arr).astype(arr.dtype.newbyteorder("<"), copy=False).tobytes()


def save_checkpoint(path, ckpt: Checkpoint) -> None:
    names = sorted(ckpt.params)
    table = [
        {"name": n, "shape": list(ckpt.params[n].shape), "dtype": str(ckpt.params[n].dtype)}
        for n in names
    ]
    header = {
        "config": ckpt.config.to_dict(),
        "params": table,
        "opt_state": None if ckpt.opt_state is None else {"t": ckpt.opt_state.t},
        "metadata": ckpt.metadata,
    }
    header_bytes = json.dumps(header, sort_keys=True).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<Q", len(header_bytes)))
        fh.write(header_bytes)
        for n in names:
            fh.write(_blob(ckpt.params[n]))
        if ckpt.opt_state is not None:
            for n in names:
                fh.write(_blob(ckpt.opt_state.m[n]))
            for n in names:
                fh.write(_blob(ckpt.opt_state.v[n]))


def load_checkpoint(path) -> Checkpoint:
    with open(path, "rb") as fh:
        magic = fh.read(len(MAGIC))
        if magic != MAGIC:
            raise ConfigurationError(f"not a checkpoint file (bad magic {magic!r})")
        (header_len,) = struct.unpack("<Q", fh.read(8))
        header = json.loads(fh.read(header_len).decode("utf-8"))
        cfg = ModelConfig.from_dict(header["config"])
        expected = param_shapes(cfg)
        table = header["params"]
        names = [entry["name"] for entry in table]
        if set(names) != set(expected):
            missing = sorted(set(expected) - set(names))
            extra = sorted(set(names) - set(expected))
            raise ConfigurationError(
                f"parameter names do not match config (missing {missing}, unexpected {extra})"
            )
        def read_group():
            group = {}
            for entry in table:
                shape = tuple(entry["shape"])
                dtype = np.dtype(entry["dtype"]).newbyteorder("<")
                raw = fh.read(int(np.prod(shape)) * dtype.itemsize)
                group[entry["name"]] = np.frombuffer(raw, dtype=dtype).reshape(shape).astype(
                    np.dtype(entry["dtype"]), copy=True
                )
            return group

        for entry in table:
            if tuple(entry["shape"]) != expected[entry["name"]]:
                raise ConfigurationError(
                    f"parameter {entry['name']!r} has shape {tuple(entry['shape'])}, "
                    f"config expects {expected[entry['name']]}"
                )
        params = read_group()
        opt_state = None
        if header["opt_state"] is not None:
            opt_state = AdamState(m=read_group(), v=read_group(), t=int(header["opt_state"]["t"]))
    return Checkpoint(config=cfg, params=params, opt_state=opt_state, metadata=header["metadata"])
