"""Experiment orchestration: CR x quantization sweeps, tuning, reports, manifest."""
from __future__ import annotations

import csv
import json
import traceback
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__
from .dataset import load_dataset
from .denoisers import make_denoiser
from .encoder import QuantizerConfig, generate_projection, quantize, dequantize
from .metrics import RATE_SNRS_DB, MetricsReport, achievable_rate, cosine_similarity, nmse
from .solver import SolverConfig, solve, tune
from .transform import (
    normalize,
    to_angular_delay,
    to_spatial_freq,
    truncate_delay,
    vectorize,
    devectorize,
    zero_pad_delay,
)


@dataclass
class ExperimentConfig:
    dataset: str
    outdir: str
    nd: int = 32
    crs: tuple = ("1/4",)
    bits: tuple = ()  # quantization levels; an unquantized cell always runs
    seed: int = 0
    projection_method: str = "qr"
    denoiser: str = "soft_threshold"
    denoiser_gain: float = 1.0
    weights: str | None = None
    solver: SolverConfig = field(default_factory=SolverConfig)
    tune_grid: tuple | None = None  # iterable of (lam, rho0, alpha)
    tune_samples: int = 16
    trace_samples: int = 4
    max_samples: int | None = None
    nmse_domain: str = "truncated"  # or "spatial_freq"

    def __post_init__(self):
        for cr in self.crs:
            f = Fraction(cr)
            if not 0 < f <= 1:
                raise ValueError(f"CR must be in (0, 1], got {cr}")
        if self.denoiser == "cnn" and not self.weights:
            raise ValueError("cnn denoiser requires a weights path")

    @classmethod
    def from_json(cls, path, overrides: dict | None = None) -> "ExperimentConfig":
        with open(path) as f:
            data = json.load(f)
        if overrides:
            data.update(overrides)
        solver = data.pop("solver", {})
        cfg = cls(**{k: tuple(v) if isinstance(v, list) else v for k, v in data.items()})
        cfg.solver = SolverConfig(**solver)
        if cfg.tune_grid is not None:
            cfg.tune_grid = tuple(tuple(p) for p in cfg.tune_grid)
        return cfg


def _cr_tag(cr: str) -> str:
    return str(Fraction(cr)).replace("/", "_")


class _Manifest:
    """Flat key/value record of everything a run consumed."""

    def __init__(self):
        self.lines: list[tuple[str, str]] = []

    def add(self, key: str, value) -> None:
        self.lines.append((key, str(value)))

    def write(self, path) -> None:
        with open(path, "w") as f:
            f.write("# experiment manifest\n")
            for k, v in self.lines:
                f.write(f"{k}: {v}\n")


def run_experiment(cfg: ExperimentConfig) -> Path:
    """Run the full sweep; returns the output directory.

    A failure inside one (CR, B) cell is recorded in the manifest and the
    remaining cells continue.
    """
    outdir = Path(cfg.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    (outdir / "traces").mkdir(exist_ok=True)

    manifest = _Manifest()
    manifest.add("code_version", __version__)
    for k, v in asdict(cfg).items():
        manifest.add(f"config.{k}", v)
    manifest.add("retraining_steps", 0)

    samples = load_dataset(cfg.dataset)
    if cfg.max_samples is not None:
        samples = samples[: cfg.max_samples]
    if not samples:
        raise ValueError("dataset is empty")
    ns, nt = samples[0].spatial_freq.shape
    n = 2 * cfg.nd * nt
    manifest.add("dataset.samples", len(samples))
    manifest.add("dataset.ns", ns)
    manifest.add("dataset.nt", nt)
    manifest.add("vector_length", n)
    manifest.add("note.normalization_scale", "oracle metadata assumed available at the BS")

    prepared = []
    for s in samples:
        tc = normalize(truncate_delay(to_angular_delay(s.spatial_freq), cfg.nd), ns_full=ns)
        prepared.append((tc, vectorize(tc.angular_delay), s.spatial_freq))

    denoiser = make_denoiser(
        cfg.denoiser, (cfg.nd, nt), gain=cfg.denoiser_gain, weights_path=cfg.weights
    )

    reports: list[MetricsReport] = []
    for cr in cfg.crs:
        m = int(Fraction(cr) * n)
        code = generate_projection(cfg.seed, m, n, method=cfg.projection_method)
        manifest.add(f"cr.{cr}.m", m)
        manifest.add(f"cr.{cr}.projection", code.to_bytes().hex())

        y_all = [code.matrix @ truth for _, truth, _ in prepared]

        scfg = cfg.solver
        if cfg.tune_grid:
            pairs = [(y_all[i], prepared[i][1]) for i in range(min(cfg.tune_samples, len(prepared)))]
            scfg, report = tune(
                pairs, code, cfg.tune_grid, cfg.solver, denoiser_factory=lambda c: denoiser
            )
            _write_tuning_report(outdir / f"tuning_cr{_cr_tag(cr)}.csv", report)
            manifest.add(f"cr.{cr}.tuned", f"lam={scfg.lam} rho0={scfg.rho0} alpha={scfg.alpha}")
        manifest.add(
            f"cr.{cr}.solver",
            f"lam={scfg.lam} rho0={scfg.rho0} alpha={scfg.alpha} iters={scfg.max_iters} "
            f"K={scfg.init_sparsity if scfg.init_sparsity is not None else m // 4} tol={scfg.tol}",
        )

        clip = max(float(np.max(np.abs(y))) for y in y_all)
        manifest.add(f"cr.{cr}.quantizer_clip", f"{clip:.12g}")

        for b in (None, *cfg.bits):
            bits_tag = "none" if b is None else str(b)
            try:
                reports.append(
                    _run_cell(cfg, outdir, prepared, y_all, code, scfg, denoiser, cr, b, clip, ns)
                )
                manifest.add(f"cell.{cr}.{bits_tag}", "ok")
            except Exception as exc:  # cell isolation: record and continue
                manifest.add(f"cell.{cr}.{bits_tag}", f"error: {exc!r}")
                manifest.add(f"cell.{cr}.{bits_tag}.trace", traceback.format_exc().strip().splitlines()[-1])

    with open(outdir / "results.csv", "w") as f:
        f.write(MetricsReport.CSV_COLUMNS + "\n")
        for r in reports:
            f.write(r.csv_row() + "\n")
    manifest.write(outdir / "manifest.txt")
    return outdir


def _run_cell(cfg, outdir, prepared, y_all, code, scfg, denoiser, cr, b, clip, ns) -> MetricsReport:
    report = MetricsReport(method=cfg.denoiser, cr=str(Fraction(cr)), bits="none" if b is None else str(b))
    qcfg = None if b is None else QuantizerConfig(bits=b, clip=clip)
    trace_rows = []
    for i, (tc, truth, h_sf_true) in enumerate(prepared):
        y = y_all[i]
        if qcfg is not None:
            y = dequantize(quantize(y, qcfg), qcfg)
        est_vec, trace = solve(code, y, scfg, denoiser, truth=truth)
        est_norm = devectorize(est_vec, cfg.nd, h_sf_true.shape[1])
        nmse_lin = nmse(est_norm, tc.angular_delay)
        est_sf = to_spatial_freq(zero_pad_delay(est_norm * tc.scale, ns))
        if cfg.nmse_domain == "spatial_freq":
            nmse_lin = nmse(est_sf, h_sf_true)
        cos = cosine_similarity(est_sf, h_sf_true)
        rates = {snr: achievable_rate(est_sf, h_sf_true, snr) for snr in RATE_SNRS_DB}
        report.add_sample(nmse_lin, cos, rates)
        if i < cfg.trace_samples:
            for row in zip(trace.iters, trace.rhos, trace.sigmas, trace.residuals, trace.nmses):
                trace_rows.append((i, *row))
    bits_tag = "none" if b is None else str(b)
    trace_path = outdir / "traces" / f"cr{_cr_tag(cr)}_b{bits_tag}.csv"
    with open(trace_path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["sample", "iter", "rho", "sigma", "residual", "nmse"])
        for row in trace_rows:
            w.writerow([row[0], row[1], *(f"{v:.12g}" for v in row[2:5]),
                        "" if row[5] is None else f"{row[5]:.12g}"])
    return report.finalize()


def _write_tuning_report(path, report: list[dict]) -> None:
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["lam", "rho0", "alpha", "mean_nmse"])
        for row in report:
            w.writerow([row["lam"], row["rho0"], row["alpha"], f"{row['mean_nmse']:.12g}"])
