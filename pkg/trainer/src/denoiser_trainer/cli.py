"""Command line: train a denoiser from a CSID1 dataset and export PPPW1."""
from __future__ import annotations

import argparse
import sys

from .train import TrainConfig, TrainingDivergedError, train


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="csidenoiser-train")
    p.add_argument("--dataset", required=True, help="CSID1 input file")
    p.add_argument("--out", required=True, help="PPPW1 output file")
    p.add_argument("--nd", type=int, default=32)
    p.add_argument("--epochs", type=int, default=100)
    p.add_argument("--batch-size", type=int, default=128)
    p.add_argument("--lr", type=float, default=1e-4)
    p.add_argument("--snr-min", type=float, default=0.0)
    p.add_argument("--snr-max", type=float, default=40.0)
    p.add_argument("--layers", type=int, default=8)
    p.add_argument("--features", type=int, default=48)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--log", default=None, help="training-log CSV path")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    cfg = TrainConfig(
        dataset=args.dataset,
        out_weights=args.out,
        nd=args.nd,
        snr_range_db=(args.snr_min, args.snr_max),
        batch_size=args.batch_size,
        lr=args.lr,
        epochs=args.epochs,
        seed=args.seed,
        num_layers=args.layers,
        features=args.features,
        log_path=args.log,
    )
    try:
        result = train(cfg)
    except TrainingDivergedError as exc:
        print(f"training diverged: {exc}", file=sys.stderr)
        return 2
    except (ValueError, FileNotFoundError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    print(
        f"trained {cfg.epochs} epochs, final val loss {result.val_losses[-1]:.6f}, "
        f"weights -> {cfg.out_weights}"
    )
    return 0


if __name__ == "__main__":
    sys.exit(main())
