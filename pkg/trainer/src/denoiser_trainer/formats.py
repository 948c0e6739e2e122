"""File formats shared with the reconstruction package.

CSID1 (read): magic "CSID1", u32 num_samples, u32 Ns, u32 Nt, u8 dtype
(0 = f32 complex interleaved), payload sample-major row-major re/im
interleaved, little-endian.

PPPW1 (write/read): magic "PPPW1", u32 layer_count; per layer u32 in_ch,
u32 out_ch, u32 kernel, u8 activation (0=relu 1=tanh 2=linear), f32 weights
in [out][in][k][k] order, f32 bias[out].  Little-endian, no padding.
"""
from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

CSID_MAGIC = b"CSID1"
PPPW_MAGIC = b"PPPW1"
ACTIVATIONS = ("relu", "tanh", "linear")

_CSID_HEADER = struct.Struct("<IIIB")
_PPPW_LAYER = struct.Struct("<IIIB")


class FormatError(ValueError):
    """Raised for malformed CSID1/PPPW1 files."""


def load_csid(path) -> np.ndarray:
    """Read a CSID1 dataset as a complex array of shape (num, Ns, Nt)."""
    with open(path, "rb") as f:
        raw = f.read()
    if raw[:5] != CSID_MAGIC:
        raise FormatError(f"{path}: bad magic {raw[:5]!r}")
    if len(raw) < 5 + _CSID_HEADER.size:
        raise FormatError(f"{path}: truncated header")
    num, ns, nt, dtype = _CSID_HEADER.unpack_from(raw, 5)
    if dtype != 0:
        raise FormatError(f"{path}: unknown dtype code {dtype}")
    expected = 5 + _CSID_HEADER.size + num * ns * nt * 2 * 4
    if len(raw) != expected:
        raise FormatError(f"{path}: expected {expected} bytes, got {len(raw)}")
    payload = np.frombuffer(raw, dtype="<f4", offset=5 + _CSID_HEADER.size)
    payload = payload.reshape(num, ns, nt, 2).astype(np.float64)
    return payload[..., 0] + 1j * payload[..., 1]


@dataclass(frozen=True)
class ExportLayer:
    """One folded convolution ready for serialization."""

    weights: np.ndarray  # (out_ch, in_ch, k, k)
    bias: np.ndarray  # (out_ch,)
    activation: str

    def __post_init__(self):
        if self.weights.ndim != 4 or self.weights.shape[2] != self.weights.shape[3]:
            raise FormatError(f"weights must be (out, in, k, k), got {self.weights.shape}")
        if self.bias.shape != (self.weights.shape[0],):
            raise FormatError(f"bias shape {self.bias.shape} does not match {self.weights.shape}")
        if self.activation not in ACTIVATIONS:
            raise FormatError(f"unknown activation {self.activation!r}")
        if not (np.all(np.isfinite(self.weights)) and np.all(np.isfinite(self.bias))):
            raise FormatError("non-finite parameters")


def save_pppw(layers: list[ExportLayer], path) -> None:
    with open(path, "wb") as f:
        f.write(PPPW_MAGIC)
        f.write(struct.pack("<I", len(layers)))
        for layer in layers:
            out_ch, in_ch, k, _ = layer.weights.shape
            f.write(_PPPW_LAYER.pack(in_ch, out_ch, k, ACTIVATIONS.index(layer.activation)))
            f.write(np.ascontiguousarray(layer.weights, dtype="<f4").tobytes())
            f.write(np.ascontiguousarray(layer.bias, dtype="<f4").tobytes())


def load_pppw(path) -> list[ExportLayer]:
    with open(path, "rb") as f:
        raw = f.read()
    if raw[:5] != PPPW_MAGIC:
        raise FormatError(f"{path}: bad magic {raw[:5]!r}")
    off = 5
    if len(raw) < off + 4:
        raise FormatError(f"{path}: truncated layer count")
    (count,) = struct.unpack_from("<I", raw, off)
    off += 4
    layers = []
    for i in range(count):
        if len(raw) < off + _PPPW_LAYER.size:
            raise FormatError(f"{path}: truncated header of layer {i}")
        in_ch, out_ch, k, act = _PPPW_LAYER.unpack_from(raw, off)
        off += _PPPW_LAYER.size
        if act >= len(ACTIVATIONS):
            raise FormatError(f"{path}: unknown activation code {act} in layer {i}")
        nw, nb = out_ch * in_ch * k * k, out_ch
        if len(raw) < off + 4 * (nw + nb):
            raise FormatError(f"{path}: truncated parameters of layer {i}")
        w = np.frombuffer(raw, dtype="<f4", count=nw, offset=off).astype(np.float64)
        off += 4 * nw
        b = np.frombuffer(raw, dtype="<f4", count=nb, offset=off).astype(np.float64)
        off += 4 * nb
        layers.append(
            ExportLayer(
                weights=w.reshape(out_ch, in_ch, k, k), bias=b, activation=ACTIVATIONS[act]
            )
        )
    if off != len(raw):
        raise FormatError(f"{path}: {len(raw) - off} trailing bytes")
    return layers
