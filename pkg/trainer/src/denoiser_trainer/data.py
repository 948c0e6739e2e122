"""Dataset preparation: angular-delay transform, truncation, noisy pairs."""
from __future__ import annotations

import warnings

import numpy as np


def to_angular_delay(h_sf: np.ndarray) -> np.ndarray:
    """Unitary 2-D DFT of each (Ns, Nt) spatial-frequency matrix."""
    return np.fft.fft(np.fft.fft(h_sf, axis=-2, norm="ortho"), axis=-1, norm="ortho")


def prepare_tensors(samples: np.ndarray, nd: int) -> np.ndarray:
    """(num, Ns, Nt) complex -> (num, 2, nd, Nt) float32, normalized to [-1, 1].

    Keeps the first nd delay rows and scales each sample by the maximum
    absolute real/imaginary component, the same convention the reconstruction
    side uses before calling the denoiser.
    """
    if nd > samples.shape[1]:
        raise ValueError(f"truncation length {nd} exceeds {samples.shape[1]} delay rows")
    h_ad = to_angular_delay(samples)[:, :nd, :]
    stacked = np.stack([h_ad.real, h_ad.imag], axis=1)
    scale = np.max(np.abs(stacked), axis=(1, 2, 3), keepdims=True)
    if np.any(scale == 0):
        raise ValueError("dataset contains an all-zero sample")
    return (stacked / scale).astype(np.float32)


def make_noisy_pairs(
    clean: np.ndarray,
    snr_range_db: tuple[float, float],
    rng: np.random.Generator,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Draw one noisy realization per clean tensor.

    Per sample an SNR is drawn uniformly in snr_range_db, sigma follows from
    the sample's mean power, and white Gaussian noise is added.  Returns
    (clean, noisy, sigma) with zero-power samples dropped.
    """
    lo, hi = snr_range_db
    if hi < lo:
        raise ValueError(f"empty SNR range [{lo}, {hi}]")
    keep, noisy, sigmas = [], [], []
    for i, x in enumerate(clean):
        power = float(np.mean(x.astype(np.float64) ** 2))
        if power == 0.0:
            warnings.warn(f"skipping zero-power sample {i}", RuntimeWarning)
            continue
        snr_db = lo if lo == hi else float(rng.uniform(lo, hi))
        sigma = 0.0 if np.isinf(snr_db) else float(np.sqrt(power / 10.0 ** (snr_db / 10.0)))
        keep.append(x)
        noisy.append(x + sigma * rng.standard_normal(x.shape).astype(np.float32))
        sigmas.append(sigma)
    if not keep:
        raise ValueError("no usable samples")
    return (
        np.stack(keep),
        np.stack(noisy).astype(np.float32),
        np.asarray(sigmas, dtype=np.float32),
    )
