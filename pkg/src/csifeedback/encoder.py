"""UE-side processing: seeded projection matrix, linear compression, mu-law quantizer.

The UE never transmits the projection matrix; it sends the 18-byte tuple
(seed, M, N, method) and the BS regenerates the matrix bit-exactly with the
same SeededRng construction.
"""
from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np

from .linalg import SeededRng, orthonormal_rows

_METHODS = ("svd", "qr")
_WIRE = struct.Struct("<QIIH")  # seed u64, M u32, N u32, method u16 -> 18 bytes


@dataclass
class ProjectionCode:
    """Row-orthonormal M x N projection, identified by (seed, M, N, method).

    svd follows the full procedure: SVD of a seeded N x N Gaussian, top-M
    right singular vectors as rows.  qr orthonormalizes M seeded Gaussian
    rows directly, which is much cheaper at N = 2048 and satisfies the same
    A A^T = I contract consumed downstream.
    """

    seed: int
    m: int
    n: int
    method: str = "qr"
    _matrix: np.ndarray | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if not 1 <= self.m <= self.n:
            raise ValueError(f"need 1 <= M <= N, got M={self.m}, N={self.n}")
        if self.method not in _METHODS:
            raise ValueError(f"unknown method {self.method!r}")

    @property
    def matrix(self) -> np.ndarray:
        """Materialized projection matrix; computed once, then cached read-only."""
        if self._matrix is None:
            rng = SeededRng(self.seed)
            if self.method == "svd":
                source = rng.normal_matrix(self.n, self.n)
                a = orthonormal_rows(source, method="svd", m=self.m)
            else:
                source = rng.normal_matrix(self.m, self.n)
                a = orthonormal_rows(source, method="qr")
            a.setflags(write=False)
            object.__setattr__(self, "_matrix", a)
        return self._matrix

    def to_bytes(self) -> bytes:
        return _WIRE.pack(self.seed, self.m, self.n, _METHODS.index(self.method))

    @classmethod
    def from_bytes(cls, raw: bytes) -> "ProjectionCode":
        if len(raw) != _WIRE.size:
            raise ValueError(f"projection code must be {_WIRE.size} bytes, got {len(raw)}")
        seed, m, n, method_idx = _WIRE.unpack(raw)
        if method_idx >= len(_METHODS):
            raise ValueError(f"unknown method code {method_idx}")
        return cls(seed=seed, m=m, n=n, method=_METHODS[method_idx])


def generate_projection(seed: int, m: int, n: int, method: str = "qr") -> ProjectionCode:
    code = ProjectionCode(seed=seed, m=m, n=n, method=method)
    code.matrix  # materialize and validate eagerly
    return code


@dataclass(frozen=True)
class QuantizerConfig:
    """Mu-law companding followed by uniform B-bit midrise quantization."""

    bits: int
    clip: float
    mu: float = 200.0

    def __post_init__(self):
        if not 2 <= self.bits <= 16:
            raise ValueError(f"bits must be in [2, 16], got {self.bits}")
        if self.mu <= 0 or self.clip <= 0:
            raise ValueError("mu and clip must be positive")


@dataclass(frozen=True)
class Feedback:
    """What the UE reports: raw or dequantized values, plus codes if quantized."""

    values: np.ndarray
    codes: np.ndarray | None = None
    quant: QuantizerConfig | None = None


def compress(code: ProjectionCode, h: np.ndarray) -> Feedback:
    """Linear projection y = A h (quantization is applied separately)."""
    h = np.asarray(h, dtype=float)
    if h.shape != (code.n,):
        raise ValueError(f"expected CSI vector of length {code.n}, got {h.shape}")
    return Feedback(values=code.matrix @ h)


def _compand(x: np.ndarray, q: QuantizerConfig) -> np.ndarray:
    """sign(x) * ln(1 + mu |x|/clip) / ln(1 + mu), after clipping to +-clip."""
    x = np.clip(x / q.clip, -1.0, 1.0)
    return np.sign(x) * np.log1p(q.mu * np.abs(x)) / np.log1p(q.mu)


def _expand(c: np.ndarray, q: QuantizerConfig) -> np.ndarray:
    return q.clip * np.sign(c) * np.expm1(np.abs(c) * np.log1p(q.mu)) / q.mu


def quantize(y: np.ndarray, q: QuantizerConfig) -> np.ndarray:
    """Integer codes in [0, 2^B - 1] for the companded values."""
    levels = 1 << q.bits
    step = 2.0 / levels
    c = _compand(np.asarray(y, dtype=float), q)
    codes = np.floor((c + 1.0) / step).astype(np.int64)
    return np.clip(codes, 0, levels - 1)


def dequantize(codes: np.ndarray, q: QuantizerConfig) -> np.ndarray:
    """Inverse companding of the cell midpoints."""
    codes = np.asarray(codes)
    levels = 1 << q.bits
    if codes.size and (codes.min() < 0 or codes.max() >= levels):
        raise ValueError(f"codes out of range [0, {levels - 1}]")
    step = 2.0 / levels
    c_mid = -1.0 + (codes.astype(float) + 0.5) * step
    return _expand(c_mid, q)


def quantize_feedback(fb: Feedback, q: QuantizerConfig) -> Feedback:
    """Full quantize/dequantize roundtrip, as seen by the BS."""
    codes = quantize(fb.values, q)
    return Feedback(values=dequantize(codes, q), codes=codes, quant=q)
