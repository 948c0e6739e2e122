"""Reconstruction quality metrics: NMSE, cosine similarity, MF precoding, rate."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateSampleError

NEG_INF_DB = float("-inf")  # sentinel for a perfect reconstruction


def nmse(h_hat: np.ndarray, h: np.ndarray) -> float:
    """||H_hat - H||_F^2 / ||H||_F^2 (linear scale)."""
    h_hat = np.asarray(h_hat)
    h = np.asarray(h)
    if h_hat.shape != h.shape:
        raise ValueError(f"shape mismatch {h_hat.shape} vs {h.shape}")
    denom = float(np.sum(np.abs(h) ** 2))
    if denom == 0.0:
        raise DegenerateSampleError("reference matrix is all zero")
    return float(np.sum(np.abs(h_hat - h) ** 2)) / denom


def to_db(linear: float) -> float:
    return NEG_INF_DB if linear == 0.0 else 10.0 * math.log10(linear)


def mean_nmse_db(linear_values) -> float:
    """Dataset mean is taken in linear scale, then converted to dB."""
    vals = list(linear_values)
    if not vals:
        raise ValueError("no samples")
    return to_db(sum(vals) / len(vals))


def cosine_similarity(h_hat_sf: np.ndarray, h_sf: np.ndarray) -> float:
    """Mean per-subcarrier |h_hat_i^H h_i| / (||h_hat_i|| ||h_i||); rows are subcarriers.

    A zero estimated row contributes 0; a zero true row is degenerate.
    """
    h_hat_sf = np.asarray(h_hat_sf)
    h_sf = np.asarray(h_sf)
    if h_hat_sf.shape != h_sf.shape:
        raise ValueError(f"shape mismatch {h_hat_sf.shape} vs {h_sf.shape}")
    total = 0.0
    for est_row, true_row in zip(h_hat_sf, h_sf):
        tn = float(np.linalg.norm(true_row))
        if tn == 0.0:
            raise DegenerateSampleError("all-zero true subcarrier row")
        en = float(np.linalg.norm(est_row))
        if en == 0.0:
            continue
        total += abs(np.vdot(est_row, true_row)) / (en * tn)
    return total / h_sf.shape[0]


def mf_precoder(h_hat_i: np.ndarray) -> np.ndarray:
    """Matched-filter precoding row: conjugate transpose of the estimate, unit norm."""
    h_hat_i = np.asarray(h_hat_i)
    norm = float(np.linalg.norm(h_hat_i))
    if norm == 0.0:
        raise DegenerateSampleError("cannot precode from a zero estimate")
    return h_hat_i.conj() / norm


def achievable_rate(h_hat_sf: np.ndarray, h_sf: np.ndarray, snr_db: float) -> float:
    """Mean over subcarriers of log2(1 + SNR |w_i h_i|^2) with MF precoding."""
    h_hat_sf = np.asarray(h_hat_sf)
    h_sf = np.asarray(h_sf)
    if h_hat_sf.shape != h_sf.shape:
        raise ValueError(f"shape mismatch {h_hat_sf.shape} vs {h_sf.shape}")
    snr = 10.0 ** (snr_db / 10.0)
    total = 0.0
    for est_row, true_row in zip(h_hat_sf, h_sf):
        w = mf_precoder(est_row)
        total += math.log2(1.0 + snr * abs(np.dot(w, true_row)) ** 2)
    return total / h_sf.shape[0]


RATE_SNRS_DB = (0.0, 10.0, 20.0)


@dataclass
class MetricsReport:
    """Aggregated evaluation over a sample set for one (method, CR, B) cell."""

    method: str
    cr: str
    bits: str  # integer as text, or "none"
    nmse_db: float = float("nan")
    cos: float = float("nan")
    rate_bps_hz: dict = field(default_factory=dict)
    sample_count: int = 0

    _nmse_acc: list = field(default_factory=list, repr=False)
    _cos_acc: list = field(default_factory=list, repr=False)
    _rate_acc: dict = field(default_factory=dict, repr=False)

    def add_sample(self, nmse_linear: float, cos: float, rates: dict) -> None:
        self._nmse_acc.append(nmse_linear)
        self._cos_acc.append(cos)
        for snr, r in rates.items():
            self._rate_acc.setdefault(snr, []).append(r)
        self.sample_count += 1

    def finalize(self) -> "MetricsReport":
        self.nmse_db = mean_nmse_db(self._nmse_acc)
        self.cos = sum(self._cos_acc) / len(self._cos_acc)
        self.rate_bps_hz = {snr: sum(v) / len(v) for snr, v in self._rate_acc.items()}
        return self

    CSV_COLUMNS = "method,cr,bits,nmse_db,cos,rate_0db,rate_10db,rate_20db,samples"

    def csv_row(self) -> str:
        rates = [self.rate_bps_hz.get(snr, float("nan")) for snr in RATE_SNRS_DB]
        return ",".join(
            [
                self.method,
                self.cr,
                self.bits,
                f"{self.nmse_db:.6f}",
                f"{self.cos:.6f}",
                *(f"{r:.6f}" for r in rates),
                str(self.sample_count),
            ]
        )
