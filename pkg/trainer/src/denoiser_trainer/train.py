"""Training loop: normalized Frobenius loss, plateau schedule, CSV log."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import torch

from .data import make_noisy_pairs, prepare_tensors
from .formats import load_csid, save_pppw
from .model import DenoiserNet, fold_batchnorm


class TrainingDivergedError(RuntimeError):
    def __init__(self, epoch: int):
        super().__init__(f"loss became non-finite at epoch {epoch}")
        self.epoch = epoch


@dataclass
class TrainConfig:
    dataset: str
    out_weights: str
    nd: int = 32
    snr_range_db: tuple = (0.0, 40.0)
    batch_size: int = 128
    lr: float = 1e-4
    plateau_patience: int = 20
    plateau_factor: float = 0.5
    lr_floor: float = 1e-7
    epochs: int = 100
    seed: int = 0
    val_fraction: float = 0.1
    num_layers: int = 8
    features: int = 48
    log_path: str | None = None

    def __post_init__(self):
        lo, hi = self.snr_range_db
        if hi < lo:
            raise ValueError(f"empty SNR range [{lo}, {hi}]")
        for name in ("lr", "plateau_factor", "lr_floor"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if not 0 < self.val_fraction < 1:
            raise ValueError("val_fraction must be in (0, 1)")


def frobenius_loss(out: torch.Tensor, clean: torch.Tensor) -> torch.Tensor:
    """Mean over the batch of ||clean - out||_F^2 / ||clean||_F^2."""
    num = torch.sum((clean - out) ** 2, dim=(1, 2, 3))
    den = torch.sum(clean**2, dim=(1, 2, 3))
    return torch.mean(num / den)


@dataclass
class TrainResult:
    model: DenoiserNet
    train_losses: list = field(default_factory=list)
    val_losses: list = field(default_factory=list)
    lrs: list = field(default_factory=list)


def _evaluate(model: DenoiserNet, clean: torch.Tensor, noisy: torch.Tensor, sigma: torch.Tensor,
              batch_size: int) -> float:
    model.eval()
    losses = []
    with torch.no_grad():
        for i in range(0, len(clean), batch_size):
            sl = slice(i, i + batch_size)
            out = model(noisy[sl], sigma[sl])
            losses.append(float(frobenius_loss(out, clean[sl])) * len(clean[sl]))
    return sum(losses) / len(clean)


def train(cfg: TrainConfig) -> TrainResult:
    torch.manual_seed(cfg.seed)
    rng = np.random.default_rng(cfg.seed)

    clean_all = prepare_tensors(load_csid(cfg.dataset), cfg.nd)
    n_val = max(1, int(len(clean_all) * cfg.val_fraction))
    if len(clean_all) <= n_val:
        raise ValueError("dataset too small for the validation split")
    train_clean, val_clean = clean_all[:-n_val], clean_all[-n_val:]
    # the validation realizations are drawn once so the curve is comparable
    vc, vn, vs = make_noisy_pairs(val_clean, cfg.snr_range_db, rng)
    val = tuple(torch.from_numpy(a) for a in (vc, vn, vs))

    model = DenoiserNet(num_layers=cfg.num_layers, features=cfg.features)
    opt = torch.optim.Adam(model.parameters(), lr=cfg.lr)
    sched = torch.optim.lr_scheduler.ReduceLROnPlateau(
        opt, factor=cfg.plateau_factor, patience=cfg.plateau_patience, min_lr=cfg.lr_floor
    )

    result = TrainResult(model=model)
    for epoch in range(1, cfg.epochs + 1):
        # fresh noise realizations each epoch
        tc, tn, ts = make_noisy_pairs(train_clean, cfg.snr_range_db, rng)
        order = rng.permutation(len(tc))
        tc, tn, ts = tc[order], tn[order], ts[order]
        model.train()
        total = 0.0
        for i in range(0, len(tc), cfg.batch_size):
            sl = slice(i, i + cfg.batch_size)
            clean = torch.from_numpy(tc[sl])
            noisy = torch.from_numpy(tn[sl])
            sigma = torch.from_numpy(ts[sl])
            opt.zero_grad()
            loss = frobenius_loss(model(noisy, sigma), clean)
            if not torch.isfinite(loss):
                raise TrainingDivergedError(epoch)
            loss.backward()
            opt.step()
            total += loss.item() * len(tc[sl])
        train_loss = total / len(tc)
        val_loss = _evaluate(model, *val, cfg.batch_size)
        if not math.isfinite(val_loss):
            raise TrainingDivergedError(epoch)
        sched.step(val_loss)
        result.train_losses.append(train_loss)
        result.val_losses.append(val_loss)
        result.lrs.append(opt.param_groups[0]["lr"])

    if cfg.log_path:
        write_log(cfg.log_path, result)
    fold_and_export(result.model, cfg.out_weights)
    return result


def write_log(path, result: TrainResult) -> None:
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["epoch", "lr", "train_loss", "val_loss"])
        for e, (lr, tl, vl) in enumerate(
            zip(result.lrs, result.train_losses, result.val_losses), start=1
        ):
            w.writerow([e, f"{lr:.3e}", f"{tl:.8f}", f"{vl:.8f}"])


def fold_and_export(model: DenoiserNet, path) -> Path:
    """Fold batch norm into the convolutions and write a PPPW1 file."""
    save_pppw(fold_batchnorm(model), path)
    return Path(path)
