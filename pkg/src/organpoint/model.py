"""Residual feed-forward classifier: weight format, forward pass, prediction.

The network is a dense projection followed by two-layer residual blocks and
a linear head. Each block applies linear -> layer norm -> swish, then a
second linear -> layer norm, and adds the result onto the running hidden
state. All arithmetic is float32. This module never touches volumes; its
cost per query depends only on the descriptor and weight sizes.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionMismatch,
    MalformedHeader,
    TruncatedData,
    UnsupportedVersion,
)

WEIGHTS_MAGIC = b"ORGC"
WEIGHTS_VERSION = 1
NORM_EPS = 1e-5

_HEADER = struct.Struct("<4s6I")


def _f32(a, shape, name) -> np.ndarray:
    arr = np.ascontiguousarray(a, dtype=np.float32)
    if arr.shape != shape:
        raise DimensionMismatch(f"{name} has shape {arr.shape}, expected {shape}")
    return arr


@dataclass(frozen=True)
class ResidualBlock:
    """Weights of one two-linear-layer block with per-layer normalization."""

    w1: np.ndarray
    b1: np.ndarray
    gamma1: np.ndarray
    beta1: np.ndarray
    w2: np.ndarray
    b2: np.ndarray
    gamma2: np.ndarray
    beta2: np.ndarray

    def tensors(self) -> tuple[np.ndarray, ...]:
        return (self.w1, self.b1, self.gamma1, self.beta1,
                self.w2, self.b2, self.gamma2, self.beta2)


@dataclass(frozen=True)
class ModelWeights:
    input_dim: int
    hidden_dim: int
    num_classes: int
    label_names: tuple[str, ...]
    projection_w: np.ndarray  # (hidden, input)
    projection_b: np.ndarray  # (hidden,)
    blocks: tuple[ResidualBlock, ...]
    head_w: np.ndarray  # (classes, hidden)
    head_b: np.ndarray  # (classes,)

    def __post_init__(self):
        d, h, c = int(self.input_dim), int(self.hidden_dim), int(self.num_classes)
        if min(d, h) < 1:
            raise DimensionMismatch(f"input_dim {d} and hidden_dim {h} must be positive")
        if c < 2:
            raise DimensionMismatch(f"num_classes {c} must be at least 2")
        if len(self.blocks) < 1:
            raise DimensionMismatch("at least one residual block required")
        names = tuple(str(n) for n in self.label_names)
        if len(names) != c:
            raise DimensionMismatch(f"{len(names)} label names for {c} classes")
        if any("\n" in n for n in names):
            raise ValueError("label names may not contain newlines")
        object.__setattr__(self, "input_dim", d)
        object.__setattr__(self, "hidden_dim", h)
        object.__setattr__(self, "num_classes", c)
        object.__setattr__(self, "label_names", names)
        object.__setattr__(self, "projection_w", _f32(self.projection_w, (h, d), "projection_w"))
        object.__setattr__(self, "projection_b", _f32(self.projection_b, (h,), "projection_b"))
        checked = []
        for i, blk in enumerate(self.blocks):
            checked.append(ResidualBlock(
                _f32(blk.w1, (h, h), f"block{i}.w1"),
                _f32(blk.b1, (h,), f"block{i}.b1"),
                _f32(blk.gamma1, (h,), f"block{i}.gamma1"),
                _f32(blk.beta1, (h,), f"block{i}.beta1"),
                _f32(blk.w2, (h, h), f"block{i}.w2"),
                _f32(blk.b2, (h,), f"block{i}.b2"),
                _f32(blk.gamma2, (h,), f"block{i}.gamma2"),
                _f32(blk.beta2, (h,), f"block{i}.beta2"),
            ))
        object.__setattr__(self, "blocks", tuple(checked))
        object.__setattr__(self, "head_w", _f32(self.head_w, (c, h), "head_w"))
        object.__setattr__(self, "head_b", _f32(self.head_b, (c,), "head_b"))

    def tensors(self) -> list[np.ndarray]:
        """All tensors in ORGC declaration order."""
        out = [self.projection_w, self.projection_b]
        for blk in self.blocks:
            out.extend(blk.tensors())
        out.extend([self.head_w, self.head_b])
        return out


def save_weights(w: ModelWeights) -> bytes:
    names = "\n".join(w.label_names).encode("utf-8")
    header = _HEADER.pack(WEIGHTS_MAGIC, WEIGHTS_VERSION, w.input_dim, w.hidden_dim,
                          len(w.blocks), w.num_classes, len(names))
    body = b"".join(t.astype("<f4", copy=False).tobytes() for t in w.tensors())
    return header + names + body


def load_weights(data: bytes) -> ModelWeights:
    if len(data) < _HEADER.size:
        raise TruncatedData(f"{len(data)} bytes is shorter than the ORGC header")
    magic, version, input_dim, hidden, num_blocks, num_classes, name_bytes = \
        _HEADER.unpack_from(data, 0)
    if magic != WEIGHTS_MAGIC:
        raise MalformedHeader(f"bad ORGC magic {magic!r}")
    if version != WEIGHTS_VERSION:
        raise UnsupportedVersion(f"ORGC version {version}")
    if min(input_dim, hidden, num_blocks) < 1 or num_classes < 2:
        raise DimensionMismatch(
            f"bad header dims input={input_dim} hidden={hidden} "
            f"blocks={num_blocks} classes={num_classes}"
        )

    pos = _HEADER.size
    if len(data) < pos + name_bytes:
        raise TruncatedData("name table extends past end of file")
    names = data[pos:pos + name_bytes].decode("utf-8").split("\n")
    if len(names) != num_classes:
        raise DimensionMismatch(f"{len(names)} label names for {num_classes} classes")
    pos += name_bytes

    shapes = [(hidden, input_dim), (hidden,)]
    for _ in range(num_blocks):
        shapes += [(hidden, hidden), (hidden,), (hidden,), (hidden,)] * 2
    shapes += [(num_classes, hidden), (num_classes,)]
    total = sum(int(np.prod(s)) for s in shapes)
    if len(data) - pos < 4 * total:
        raise TruncatedData(f"need {4 * total} tensor bytes, found {len(data) - pos}")
    if len(data) - pos > 4 * total:
        raise MalformedHeader(f"{len(data) - pos - 4 * total} trailing bytes after tensors")

    flat = np.frombuffer(data, dtype="<f4", count=total, offset=pos)
    tensors = []
    at = 0
    for s in shapes:
        n = int(np.prod(s))
        tensors.append(flat[at:at + n].reshape(s).copy())
        at += n

    blocks = tuple(
        ResidualBlock(*tensors[2 + 8 * i:2 + 8 * (i + 1)]) for i in range(num_blocks)
    )
    return ModelWeights(input_dim, hidden, num_classes, tuple(names),
                        tensors[0], tensors[1], blocks, tensors[-2], tensors[-1])


# ---------------------------------------------------------------------------
# Forward pass


def _swish(x: np.ndarray) -> np.ndarray:
    # x * sigmoid(x), split by sign so exp never overflows
    out = np.empty_like(x)
    pos = x >= 0
    xp = x[pos]
    out[pos] = xp / (1.0 + np.exp(-xp))
    xn = x[~pos]
    e = np.exp(xn)
    out[~pos] = xn * e / (1.0 + e)
    return out


def _norm(x: np.ndarray, gamma: np.ndarray, beta: np.ndarray) -> np.ndarray:
    mean = x.mean()
    var = np.mean((x - mean) ** 2)
    return (x - mean) / np.sqrt(var + np.float32(NORM_EPS)) * gamma + beta


def forward(w: ModelWeights, values: np.ndarray) -> np.ndarray:
    """Logits for one descriptor of length input_dim."""
    x = np.asarray(values, dtype=np.float32).ravel()
    if x.shape != (w.input_dim,):
        raise DimensionMismatch(f"descriptor length {x.size}, model expects {w.input_dim}")
    h = _swish(w.projection_w @ x + w.projection_b)
    for blk in w.blocks:
        t = _swish(_norm(blk.w1 @ h + blk.b1, blk.gamma1, blk.beta1))
        u = _norm(blk.w2 @ t + blk.b2, blk.gamma2, blk.beta2)
        h = h + u
    return w.head_w @ h + w.head_b


@dataclass(frozen=True)
class ClassProbabilities:
    probs: np.ndarray
    argmax_label: int


def predict(w: ModelWeights, values: np.ndarray) -> ClassProbabilities:
    """Softmax class probabilities; argmax ties resolve to the lowest index."""
    logits = forward(w, values)
    z = logits - logits.max()
    e = np.exp(z)
    probs = e / e.sum()
    return ClassProbabilities(probs, int(np.argmax(logits)))
