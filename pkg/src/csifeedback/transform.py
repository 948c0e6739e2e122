"""Channel domain transforms and the real solver-domain vectorization.

Spatial-frequency <-> angular-delay via unitary 2-D DFT, delay truncation and
its zero-pad inverse, per-sample max-component normalization, and the fixed
[real block | imaginary block] vector layout shared with the projection
matrix and dataset formats.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateSampleError, ShapeError
from .linalg import dft_matrix


@dataclass(frozen=True)
class ChannelSample:
    """One spatial-frequency channel matrix (Ns x Nt) plus an optional tag."""

    spatial_freq: np.ndarray
    meta: str | None = None


@dataclass(frozen=True)
class TruncatedChannel:
    """Normalized truncated angular-delay matrix with its scale and full size."""

    angular_delay: np.ndarray  # (Nd, Nt), componentwise magnitudes <= 1
    scale: float
    ns_full: int


def to_angular_delay(h_sf: np.ndarray) -> np.ndarray:
    """F_s @ H~ @ F_t with unitary DFTs of the two dimensions."""
    h_sf = np.asarray(h_sf)
    ns, nt = h_sf.shape
    return dft_matrix(ns) @ h_sf @ dft_matrix(nt)


def to_spatial_freq(h_ad: np.ndarray) -> np.ndarray:
    """Inverse of to_angular_delay: F_s^H @ H @ F_t^H."""
    h_ad = np.asarray(h_ad)
    ns, nt = h_ad.shape
    return dft_matrix(ns).conj().T @ h_ad @ dft_matrix(nt).conj().T


def truncate_delay(h_ad: np.ndarray, nd: int) -> np.ndarray:
    """Keep the first nd delay rows."""
    ns = h_ad.shape[0]
    if nd > ns:
        raise ValueError(f"truncation length {nd} exceeds row count {ns}")
    return h_ad[:nd].copy()


def zero_pad_delay(h_trunc: np.ndarray, ns: int) -> np.ndarray:
    """Append zero rows back up to ns (inverse of truncation on zero-tailed input)."""
    nd, nt = h_trunc.shape
    if ns < nd:
        raise ValueError(f"target row count {ns} is below current {nd}")
    out = np.zeros((ns, nt), dtype=complex)
    out[:nd] = h_trunc
    return out


def delay_energy_fraction(h_ad: np.ndarray, nd: int) -> float:
    """Fraction of Frobenius energy in the first nd delay rows."""
    total = float(np.sum(np.abs(h_ad) ** 2))
    if total == 0.0:
        raise DegenerateSampleError("all-zero channel matrix")
    return float(np.sum(np.abs(h_ad[:nd]) ** 2)) / total


def normalize(h_trunc: np.ndarray, ns_full: int | None = None) -> TruncatedChannel:
    """Scale by the max of |Re| and |Im| over all entries.

    Every normalized component lies in [-1, 1], the range representable by
    the denoiser's tanh output.  The scale is kept so the estimate can be
    mapped back for rate evaluation.
    """
    h_trunc = np.asarray(h_trunc, dtype=complex)
    scale = float(max(np.abs(h_trunc.real).max(initial=0.0), np.abs(h_trunc.imag).max(initial=0.0)))
    if scale == 0.0:
        raise DegenerateSampleError("cannot normalize an all-zero matrix")
    return TruncatedChannel(
        angular_delay=h_trunc / scale,
        scale=scale,
        ns_full=h_trunc.shape[0] if ns_full is None else ns_full,
    )


def denormalize(tc: TruncatedChannel) -> np.ndarray:
    return tc.angular_delay * tc.scale


def vectorize(h: np.ndarray) -> np.ndarray:
    """Complex (Nd, Nt) -> real vector [Re row-major | Im row-major], length 2*Nd*Nt."""
    h = np.asarray(h)
    return np.concatenate([h.real.ravel(), h.imag.ravel()])


def devectorize(v: np.ndarray, nd: int, nt: int) -> np.ndarray:
    """Exact inverse of vectorize."""
    v = np.asarray(v, dtype=float)
    if v.shape != (2 * nd * nt,):
        raise ShapeError(f"expected length {2 * nd * nt}, got {v.shape}")
    half = nd * nt
    return (v[:half] + 1j * v[half:]).reshape(nd, nt)
