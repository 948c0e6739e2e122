"""Deterministic numerical primitives.

Unitary DFT matrices, a seeded cross-platform Gaussian stream, row
orthonormalization, and the factor-2 pixel shuffle/unshuffle permutations.
Everything here is a pure function of its inputs; SeededRng is a value that
can be cloned to fork its stream.
"""
from __future__ import annotations

import copy
from functools import lru_cache

import numpy as np

from .errors import RankDeficientError, ShapeError

_MASK64 = (1 << 64) - 1
_GOLDEN64 = 0x9E3779B97F4A7C15


def _splitmix64(x: int) -> int:
    """One step of the splitmix64 mixer; used only to derive child seeds."""
    x = (x + _GOLDEN64) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


class SeededRng:
    """Counter-based Gaussian stream: Philox4x64 raw words + Box-Muller.

    Philox is a counter-mode stream cipher, so the raw 64-bit word stream is
    bit-identical across platforms for a fixed seed.  Uniforms are the top 53
    bits mapped to (0, 1], and normals come from the classic Box-Muller
    transform on consecutive uniform pairs.  The BS regenerates the UE's
    projection matrix from the seed alone, so this construction is part of
    the wire contract and must never change.
    """

    def __init__(self, seed: int):
        self.seed = int(seed) & _MASK64
        self._bg = np.random.Philox(key=self.seed)

    def clone(self) -> "SeededRng":
        """Exact copy, including stream position."""
        other = SeededRng(self.seed)
        other._bg.state = copy.deepcopy(self._bg.state)
        return other

    def split(self, index: int) -> "SeededRng":
        """Independent child stream; deterministic in (seed, index)."""
        return SeededRng(_splitmix64(self.seed ^ ((index + 1) * _GOLDEN64 & _MASK64)))

    def raw(self, n: int) -> np.ndarray:
        """Next n raw 64-bit words."""
        return self._bg.random_raw(n)

    def uniform(self, n: int) -> np.ndarray:
        """n uniforms in (0, 1]; strictly positive so log() below is safe."""
        return ((self.raw(n) >> 11) + 1) * 2.0**-53

    def normal(self, n: int) -> np.ndarray:
        """n i.i.d. standard normals via Box-Muller."""
        m = (n + 1) // 2
        u = self.uniform(2 * m)
        r = np.sqrt(-2.0 * np.log(u[0::2]))
        theta = 2.0 * np.pi * u[1::2]
        z = np.empty(2 * m)
        z[0::2] = r * np.cos(theta)
        z[1::2] = r * np.sin(theta)
        return z[:n]

    def normal_matrix(self, rows: int, cols: int) -> np.ndarray:
        if rows < 1 or cols < 1:
            raise ValueError("rows and cols must be >= 1")
        return self.normal(rows * cols).reshape(rows, cols)

    def complex_normal_matrix(self, rows: int, cols: int) -> np.ndarray:
        """Circularly-symmetric unit-variance complex Gaussians."""
        z = self.normal(2 * rows * cols)
        return (z[0::2] + 1j * z[1::2]).reshape(rows, cols) / np.sqrt(2.0)

    def integers(self, n: int, high: int) -> np.ndarray:
        """n integers uniform on [0, high)."""
        if high < 1:
            raise ValueError("high must be >= 1")
        # Modulo bias is < 2**-50 for the ranges used here (high <= 2**13).
        return (self.raw(n) % high).astype(np.int64)


@lru_cache(maxsize=None)
def dft_matrix(n: int) -> np.ndarray:
    """Unitary n-point DFT matrix: F[j,k] = exp(-2*pi*i*j*k/n)/sqrt(n)."""
    if n < 1:
        raise ValueError(f"DFT size must be >= 1, got {n}")
    jk = np.outer(np.arange(n), np.arange(n))
    return np.exp(-2j * np.pi * jk / n) / np.sqrt(n)


def gaussian_matrix(rng: SeededRng, rows: int, cols: int) -> np.ndarray:
    """Seeded i.i.d. standard-normal real matrix (see SeededRng)."""
    return rng.normal_matrix(rows, cols)


def orthonormal_rows(mat: np.ndarray, method: str = "qr", m: int | None = None) -> np.ndarray:
    """Row-orthonormal M x N matrix derived from `mat`.

    qr:  orthonormalizes the M given rows (QR of mat^T); cheap.
    svd: takes the top-m right singular vectors of `mat` (any P x N source);
         `m` defaults to mat's row count.
    """
    mat = np.asarray(mat, dtype=float)
    if mat.ndim != 2:
        raise ShapeError("expected a 2-D matrix")
    if m is None:
        m = mat.shape[0]
    n = mat.shape[1]
    if m > n:
        raise ValueError(f"need m <= n, got m={m}, n={n}")

    if method == "svd":
        _, s, vt = np.linalg.svd(mat, full_matrices=False)
        if len(s) < m or s[m - 1] <= 1e-12 * s[0]:
            raise RankDeficientError("source matrix has rank below m")
        return vt[:m]
    if method == "qr":
        if mat.shape[0] != m:
            raise ShapeError("qr method orthonormalizes the given rows; row count must equal m")
        q, r = np.linalg.qr(mat.T)
        d = np.abs(np.diag(r))
        if np.any(d <= 1e-12 * d.max(initial=0.0)) or d.size < m:
            raise RankDeficientError("source rows are rank deficient")
        return q.T
    raise ValueError(f"unknown method {method!r}")


def pixel_unshuffle(t: np.ndarray) -> np.ndarray:
    """Factor-2 space-to-channel permutation.

    (d0, d1, c) -> (d0/2, d1/2, 4c) with out[i, j, 4c + 2a + b] = in[2i+a, 2j+b, c].
    """
    t = np.asarray(t)
    if t.ndim != 3:
        raise ShapeError("expected a rank-3 tensor")
    d0, d1, d2 = t.shape
    if d0 % 2 or d1 % 2:
        raise ShapeError(f"leading dims must be even, got {d0}x{d1}")
    return (
        t.reshape(d0 // 2, 2, d1 // 2, 2, d2)
        .transpose(0, 2, 4, 1, 3)
        .reshape(d0 // 2, d1 // 2, 4 * d2)
    )


def pixel_shuffle(t: np.ndarray) -> np.ndarray:
    """Exact inverse of pixel_unshuffle."""
    t = np.asarray(t)
    if t.ndim != 3:
        raise ShapeError("expected a rank-3 tensor")
    d0, d1, d2 = t.shape
    if d2 % 4:
        raise ShapeError(f"channel count must be divisible by 4, got {d2}")
    return (
        t.reshape(d0, d1, d2 // 4, 2, 2)
        .transpose(0, 3, 1, 4, 2)
        .reshape(2 * d0, 2 * d1, d2 // 4)
    )
