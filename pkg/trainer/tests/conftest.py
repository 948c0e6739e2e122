import struct

import numpy as np
import pytest


def write_csid(path, samples: np.ndarray) -> None:
    """Minimal CSID1 writer for fixtures (complex array (num, Ns, Nt))."""
    num, ns, nt = samples.shape
    with open(path, "wb") as f:
        f.write(b"CSID1")
        f.write(struct.pack("<IIIB", num, ns, nt, 0))
        inter = np.empty((num, ns, nt, 2), dtype="<f4")
        inter[..., 0] = samples.real
        inter[..., 1] = samples.imag
        f.write(inter.tobytes())


def sparse_channels(seed: int, num: int, ns: int = 32, nt: int = 8, taps: int = 6) -> np.ndarray:
    """Synthetic multipath-like channels, sparse in the angular-delay domain."""
    rng = np.random.default_rng(seed)
    out = np.zeros((num, ns, nt), dtype=complex)
    for i in range(num):
        h_ad = np.zeros((ns, nt), dtype=complex)
        rows = np.minimum(rng.geometric(0.25, size=taps) - 1, ns - 1)
        cols = rng.integers(0, nt, size=taps)
        vals = (rng.standard_normal(taps) + 1j * rng.standard_normal(taps)) * np.exp(-0.25 * rows)
        for r, c, v in zip(rows, cols, vals):
            h_ad[r, c] += v
        out[i] = np.fft.ifft(np.fft.ifft(h_ad, axis=0, norm="ortho"), axis=1, norm="ortho")
    return out


@pytest.fixture
def tiny_dataset(tmp_path):
    path = tmp_path / "tiny.csid"
    write_csid(path, sparse_channels(0, 24))
    return path
