"""Synthetic clustered-multipath channels for training and evaluation.

Each sample is a handful of paths; a path occupies one delay row with a
smooth circular-Gaussian envelope over the angle columns and a linear phase
ramp, so the angular-delay matrix has the clustered, spatially smooth
structure that convolutional denoisers are built to exploit.  Samples are
returned in the spatial-frequency domain.
"""
from __future__ import annotations

import struct

import numpy as np


def clustered_channels(
    rng: np.random.Generator,
    num: int,
    ns: int = 64,
    nt: int = 16,
    paths: int = 6,
    decay: float = 0.25,
    spread: float = 1.5,
) -> np.ndarray:
    if paths < 1:
        raise ValueError("need at least one path")
    out = np.zeros((num, ns, nt), dtype=complex)
    cols = np.arange(nt)
    for i in range(num):
        h_ad = np.zeros((ns, nt), dtype=complex)
        for _ in range(paths):
            row = min(int(rng.geometric(decay)) - 1, ns - 1)
            center = rng.uniform(0, nt)
            width = spread * (0.5 + rng.uniform())
            dist = np.minimum(np.abs(cols - center), nt - np.abs(cols - center))
            envelope = np.exp(-0.5 * (dist / width) ** 2)
            phase = np.exp(1j * (rng.uniform(0, 2 * np.pi) + rng.uniform(-0.5, 0.5) * cols))
            amp = (rng.standard_normal() + 1j * rng.standard_normal()) * np.exp(-decay * row)
            h_ad[row] += amp * envelope * phase
        out[i] = np.fft.ifft(np.fft.ifft(h_ad, axis=0, norm="ortho"), axis=1, norm="ortho")
    return out


def save_csid(path, samples: np.ndarray) -> None:
    """Write (num, Ns, Nt) complex samples as a CSID1 file."""
    num, ns, nt = samples.shape
    with open(path, "wb") as f:
        f.write(b"CSID1")
        f.write(struct.pack("<IIIB", num, ns, nt, 0))
        inter = np.empty((num, ns, nt, 2), dtype="<f4")
        inter[..., 0] = samples.real
        inter[..., 1] = samples.imag
        f.write(inter.tobytes())
