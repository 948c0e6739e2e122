#!/usr/bin/env python3
"""Regenerate tests/data/reference_golden.npz from the reference weights.

The golden pair pins the exact numerical behaviour of the exported PPPW1
artifact: a fixed input patch and noise level together with the model output
computed through the folded-layer torch path.  Consumers of the format can
check their own inference against it.
"""
import argparse
from pathlib import Path

import numpy as np
import torch

from denoiser_trainer.formats import load_pppw
from denoiser_trainer.model import forward_folded

ND, NT = 16, 16


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--weights", required=True)
    ap.add_argument("--out", required=True)
    args = ap.parse_args()

    layers = load_pppw(args.weights)
    rng = np.random.default_rng(7)
    z = rng.normal(scale=0.1, size=2 * ND * NT).astype(np.float64)
    sigma = 0.05
    zt = torch.from_numpy(
        np.stack([z[: ND * NT].reshape(ND, NT), z[ND * NT :].reshape(ND, NT)])[None].astype(np.float32)
    )
    out = forward_folded(layers, zt, torch.tensor([sigma], dtype=torch.float32)).numpy()[0]
    expected = np.concatenate([out[0].ravel(), out[1].ravel()])
    np.savez(args.out, z=z, sigma=sigma, expected=expected)
    print(f"wrote {args.out} (output range [{expected.min():.4f}, {expected.max():.4f}])")


if __name__ == "__main__":
    main()
