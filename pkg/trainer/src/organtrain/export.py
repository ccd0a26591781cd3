"""ORGC weight-bundle export and (for verification) re-import.

Layout: little-endian header ``<4s6I`` = magic b"ORGC", version, input_dim,
hidden, num_blocks, num_classes, byte length of the label-name table; then
the newline-joined UTF-8 label names; then float32 tensors in canonical
order:

    projection weight (hidden, input_dim), projection bias (hidden,)
    per block: fc1 weight, fc1 bias, ln1 gamma, ln1 beta,
               fc2 weight, fc2 bias, ln2 gamma, ln2 beta
    head weight (num_classes, hidden), head bias (num_classes,)

Matrices are stored row-major as (out, in), i.e. torch's native Linear
layout — no transposition happens on export.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np
import torch

from .errors import FormatError
from .net import PointClassifierNet

WEIGHTS_MAGIC = b"ORGC"
WEIGHTS_VERSION = 1
_HEADER = struct.Struct("<4s6I")


def _tensor_bytes(t: torch.Tensor) -> bytes:
    return t.detach().cpu().contiguous().to(torch.float32).numpy().tobytes()


def export_weights(net: PointClassifierNet, label_names: list[str]) -> bytes:
    if len(label_names) != net.num_classes:
        raise FormatError(
            f"{len(label_names)} label names for {net.num_classes} classes")
    names_blob = "\n".join(label_names).encode("utf-8")
    parts = [
        _HEADER.pack(WEIGHTS_MAGIC, WEIGHTS_VERSION, net.input_dim,
                     net.hidden, len(net.blocks), net.num_classes,
                     len(names_blob)),
        names_blob,
        _tensor_bytes(net.proj.weight), _tensor_bytes(net.proj.bias),
    ]
    for block in net.blocks:
        for t in (block.fc1.weight, block.fc1.bias,
                  block.ln1.weight, block.ln1.bias,
                  block.fc2.weight, block.fc2.bias,
                  block.ln2.weight, block.ln2.bias):
            parts.append(_tensor_bytes(t))
    parts.append(_tensor_bytes(net.head.weight))
    parts.append(_tensor_bytes(net.head.bias))
    return b"".join(parts)


def save_weights(path: Path | str, net: PointClassifierNet,
                 label_names: list[str]) -> None:
    Path(path).write_bytes(export_weights(net, label_names))


def load_weights(data: bytes) -> tuple[PointClassifierNet, list[str]]:
    """Rebuild a network from an ORGC blob. Used to verify round-trips."""
    if len(data) < _HEADER.size:
        raise FormatError("weights blob shorter than header")
    magic, version, input_dim, hidden, blocks, classes, name_bytes = \
        _HEADER.unpack_from(data)
    if magic != WEIGHTS_MAGIC:
        raise FormatError(f"bad weights magic {magic!r}")
    if version != WEIGHTS_VERSION:
        raise FormatError(f"unsupported weights version {version}")
    pos = _HEADER.size
    names = data[pos:pos + name_bytes].decode("utf-8").split("\n")
    if len(names) != classes:
        raise FormatError(f"{len(names)} label names for {classes} classes")
    pos += name_bytes

    def take(shape: tuple[int, ...]) -> torch.Tensor:
        nonlocal pos
        n = int(np.prod(shape))
        end = pos + 4 * n
        if end > len(data):
            raise FormatError("weights blob truncated")
        arr = np.frombuffer(data, dtype="<f4", count=n, offset=pos).reshape(shape)
        pos = end
        return torch.from_numpy(arr.copy())

    net = PointClassifierNet(input_dim, hidden, blocks, classes)
    with torch.no_grad():
        net.proj.weight.copy_(take((hidden, input_dim)))
        net.proj.bias.copy_(take((hidden,)))
        for block in net.blocks:
            block.fc1.weight.copy_(take((hidden, hidden)))
            block.fc1.bias.copy_(take((hidden,)))
            block.ln1.weight.copy_(take((hidden,)))
            block.ln1.bias.copy_(take((hidden,)))
            block.fc2.weight.copy_(take((hidden, hidden)))
            block.fc2.bias.copy_(take((hidden,)))
            block.ln2.weight.copy_(take((hidden,)))
            block.ln2.bias.copy_(take((hidden,)))
        net.head.weight.copy_(take((classes, hidden)))
        net.head.bias.copy_(take((classes,)))
    if pos != len(data):
        raise FormatError(
            f"weights blob has {len(data) - pos} trailing bytes")
    return net, names
