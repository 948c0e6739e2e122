"""BS-side reconstruction.

Top-K least-squares initialization, the half-quadratic splitting loop with a
closed-form data-consistency update and a plugged denoiser, an OMP baseline
used as a recovery oracle in tests, and grid tuning of (lambda, rho0, alpha).
"""
from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .denoisers import DenoiserFn
from .encoder import ProjectionCode
from .errors import DivergenceError


@dataclass(frozen=True)
class SolverConfig:
    lam: float = 2e-3  # regularization weight
    rho0: float = 1e-3  # initial penalty
    alpha: float = 1.8  # geometric penalty growth, > 1
    max_iters: int = 10
    init_sparsity: int | None = None  # default M // 4
    tol: float = 0.0  # relative-change early stop; 0 disables
    denoiser: str = "soft_threshold"
    denoiser_gain: float = 1.0
    z_path: str = "woodbury"  # or "direct"

    def __post_init__(self):
        if self.lam <= 0 or self.rho0 <= 0:
            raise ValueError("lam and rho0 must be positive")
        if self.alpha <= 1.0:
            raise ValueError("alpha must exceed 1")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if self.tol < 0:
            raise ValueError("tol must be >= 0")


@dataclass
class SolverTrace:
    iters: list[int] = field(default_factory=list)
    rhos: list[float] = field(default_factory=list)
    sigmas: list[float] = field(default_factory=list)
    residuals: list[float] = field(default_factory=list)
    nmses: list[float | None] = field(default_factory=list)

    def record(self, it, rho, sigma, residual, nmse=None):
        self.iters.append(it)
        self.rhos.append(rho)
        self.sigmas.append(sigma)
        self.residuals.append(residual)
        self.nmses.append(nmse)

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as f:
            w = csv.writer(f)
            w.writerow(["iter", "rho", "sigma", "residual", "nmse"])
            for row in zip(self.iters, self.rhos, self.sigmas, self.residuals, self.nmses):
                w.writerow([row[0], *(f"{v:.12g}" for v in row[1:4]),
                            "" if row[4] is None else f"{row[4]:.12g}"])


def _ls_on_support(a_sub: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Normal-equation solve with a ridge fallback for singular supports."""
    gram = a_sub.T @ a_sub
    rhs = a_sub.T @ y
    try:
        return np.linalg.solve(gram, rhs)
    except np.linalg.LinAlgError:
        warnings.warn("singular least-squares support; using ridge fallback", RuntimeWarning)
        return np.linalg.solve(gram + 1e-10 * np.eye(gram.shape[0]), rhs)


def init_support_ls(a: np.ndarray, y: np.ndarray, k: int) -> np.ndarray:
    """Least-squares estimate on the K largest-correlation indices of A^T y.

    Ties break toward the lowest index so runs are deterministic.
    """
    m, n = a.shape
    if not 1 <= k <= m:
        raise ValueError(f"need 1 <= K <= M, got K={k}, M={m}")
    corr = a.T @ y
    order = np.argsort(-np.abs(corr), kind="stable")
    omega = np.sort(order[:k])
    h0 = np.zeros(n)
    h0[omega] = _ls_on_support(a[:, omega], y)
    return h0


def z_update(a: np.ndarray, y: np.ndarray, h: np.ndarray, rho: float, path: str = "woodbury") -> np.ndarray:
    """Closed-form data-consistency step: z = (A^T A + rho I)^-1 (A^T y + rho h).

    The woodbury path exploits A A^T = I to avoid the N x N solve:
    z = (1/rho) * (r - A^T (A r) / (1 + rho)) with r = A^T y + rho h.
    """
    if rho <= 0:
        raise ValueError("rho must be positive")
    r = a.T @ y + rho * h
    if path == "woodbury":
        return (r - a.T @ (a @ r) / (1.0 + rho)) / rho
    if path == "direct":
        n = a.shape[1]
        return np.linalg.solve(a.T @ a + rho * np.eye(n), r)
    raise ValueError(f"unknown z_update path {path!r}")


def _nmse_linear(est: np.ndarray, truth: np.ndarray) -> float:
    denom = float(np.dot(truth, truth))
    return float(np.dot(est - truth, est - truth)) / denom if denom else float("nan")


def solve(
    code: ProjectionCode,
    y: np.ndarray,
    cfg: SolverConfig,
    denoiser: DenoiserFn,
    truth: np.ndarray | None = None,
) -> tuple[np.ndarray, SolverTrace]:
    """Run the penalty loop: z-update, denoise at sigma_t = sqrt(lam / (2 rho_t)),
    rho_{t+1} = alpha * rho_t.  Returns the last data-consistent iterate z.
    """
    a = code.matrix
    k = cfg.init_sparsity if cfg.init_sparsity is not None else max(1, code.m // 4)
    h = init_support_ls(a, y, k)
    trace = SolverTrace()
    rho = cfg.rho0
    z = h
    for t in range(1, cfg.max_iters + 1):
        z = z_update(a, y, h, rho, path=cfg.z_path)
        sigma = float(np.sqrt(cfg.lam / (2.0 * rho)))
        h_new = denoiser(z, sigma)
        if not np.all(np.isfinite(h_new)):
            raise DivergenceError(t)
        residual = float(np.linalg.norm(y - a @ z))
        nmse = _nmse_linear(z, truth) if truth is not None else None
        trace.record(t, rho, sigma, residual, nmse)
        h_norm = float(np.linalg.norm(h))
        rel = float(np.linalg.norm(h_new - h)) / h_norm if h_norm else float("inf")
        h = h_new
        rho *= cfg.alpha
        if cfg.tol > 0 and rel < cfg.tol:
            break
    return z, trace


def omp_baseline(a: np.ndarray, y: np.ndarray, k: int) -> np.ndarray:
    """Orthogonal matching pursuit: K greedy picks with full LS re-solves."""
    m, n = a.shape
    if not 1 <= k <= m:
        raise ValueError(f"need 1 <= K <= M, got K={k}, M={m}")
    support: list[int] = []
    residual = y.astype(float).copy()
    x = np.zeros(n)
    for _ in range(k):
        corr = np.abs(a.T @ residual)
        corr[support] = -1.0
        idx = int(np.argmax(corr))
        if corr[idx] <= 0:
            break
        support.append(idx)
        cols = sorted(support)
        coeff = _ls_on_support(a[:, cols], y)
        x = np.zeros(n)
        x[cols] = coeff
        residual = y - a @ x
    return x


def tune(
    pairs: Sequence[tuple[np.ndarray, np.ndarray]],
    code: ProjectionCode,
    grid: Sequence[tuple[float, float, float]],
    template: SolverConfig,
    denoiser_factory=None,
) -> tuple[SolverConfig, list[dict]]:
    """Pick the (lam, rho0, alpha) grid point with the lowest mean NMSE.

    `pairs` holds (y, truth) vectors.  Ties break toward earlier grid order.
    Returns the winning config and a per-point report.
    """
    if not pairs or not grid:
        raise ValueError("tune requires a nonempty dataset and grid")
    from .denoisers import make_denoiser  # local import to avoid a cycle at module load

    report = []
    best = None
    for lam, rho0, alpha in grid:
        cfg = replace(template, lam=lam, rho0=rho0, alpha=alpha)
        if denoiser_factory is not None:
            den = denoiser_factory(cfg)
        else:
            nd_nt = int(np.sqrt(code.n // 2))
            den = make_denoiser(cfg.denoiser, (nd_nt, nd_nt), gain=cfg.denoiser_gain)
        total = 0.0
        for y, truth in pairs:
            est, _ = solve(code, y, cfg, den, truth=truth)
            total += _nmse_linear(est, truth)
        mean_nmse = total / len(pairs)
        report.append({"lam": lam, "rho0": rho0, "alpha": alpha, "mean_nmse": mean_nmse})
        if best is None or mean_nmse < best[0]:
            best = (mean_nmse, cfg)
    return best[1], report
