"""CSID1 dataset files and the synthetic sparse-channel generator.

CSID1 layout, little-endian: magic "CSID1", u32 num_samples, u32 Ns, u32 Nt,
u8 dtype (0 = f32 complex interleaved), then the payload sample-major,
row-major, re/im interleaved.
"""
from __future__ import annotations

import struct

import numpy as np

from .errors import DatasetDtypeError, DatasetMagicError, DatasetTruncatedError
from .linalg import SeededRng
from .transform import ChannelSample, to_spatial_freq

_MAGIC = b"CSID1"
_HEADER = struct.Struct("<IIIB")


def save_dataset(path, samples: list[ChannelSample]) -> None:
    if samples:
        ns, nt = samples[0].spatial_freq.shape
    else:
        ns = nt = 0
    with open(path, "wb") as f:
        f.write(_MAGIC)
        f.write(_HEADER.pack(len(samples), ns, nt, 0))
        for s in samples:
            if s.spatial_freq.shape != (ns, nt):
                raise ValueError("all samples must share one shape")
            inter = np.empty((ns, nt, 2), dtype="<f4")
            inter[:, :, 0] = s.spatial_freq.real
            inter[:, :, 1] = s.spatial_freq.imag
            f.write(inter.tobytes())


def load_dataset(path) -> list[ChannelSample]:
    with open(path, "rb") as f:
        raw = f.read()
    if raw[:5] != _MAGIC:
        raise DatasetMagicError(f"bad magic in {path}")
    if len(raw) < 5 + _HEADER.size:
        raise DatasetTruncatedError(f"{path}: header truncated")
    num, ns, nt, dtype = _HEADER.unpack_from(raw, 5)
    if dtype != 0:
        raise DatasetDtypeError(f"unknown dtype code {dtype}")
    expected = 5 + _HEADER.size + num * ns * nt * 2 * 4
    if len(raw) != expected:
        raise DatasetTruncatedError(f"{path}: expected {expected} bytes, got {len(raw)}")
    payload = np.frombuffer(raw, dtype="<f4", offset=5 + _HEADER.size)
    payload = payload.reshape(num, ns, nt, 2)
    return [
        ChannelSample(spatial_freq=(payload[i, :, :, 0] + 1j * payload[i, :, :, 1]).astype(complex))
        for i in range(num)
    ]


def generate_synthetic(
    rng: SeededRng,
    count: int,
    ns: int,
    nt: int,
    taps: int,
    decay: float,
) -> list[ChannelSample]:
    """Sparse multipath-like channels built directly in the angular-delay domain.

    Each sample places `taps` complex Gaussian coefficients at random
    positions; the delay row of each tap is geometric-like with rate `decay`
    (concentrating energy in early rows) and its magnitude also decays as
    exp(-decay * row).  Samples are inverse-transformed to spatial-frequency.
    """
    if taps < 1 or taps > ns * nt:
        raise ValueError(f"taps must be in [1, {ns * nt}]")
    samples = []
    for i in range(count):
        child = rng.split(i)
        h_ad = np.zeros((ns, nt), dtype=complex)
        u = child.uniform(taps)
        rows = np.minimum((-np.log(u) / max(decay, 1e-9)).astype(int), ns - 1)
        cols = child.integers(taps, nt)
        coeffs = child.complex_normal_matrix(1, taps).ravel() * np.exp(-decay * rows)
        for r, c, v in zip(rows, cols, coeffs):
            h_ad[r, c] += v
        samples.append(ChannelSample(spatial_freq=to_spatial_freq(h_ad), meta=f"synthetic-{i}"))
    return samples
