#!/usr/bin/env python3
"""End-to-end demo: synthesize a dataset, sweep CR x quantization, plot.

Runs entirely on the CPU in about a minute and leaves a browsable output
directory (results.csv, manifest.txt, traces/, figures/).
"""
import argparse
import json
import subprocess
import sys
from pathlib import Path


def sh(*args):
    print("+", " ".join(args))
    subprocess.run(args, check=True)


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("--workdir", default="demo_out")
    ap.add_argument("--samples", type=int, default=32)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    work = Path(args.workdir)
    work.mkdir(parents=True, exist_ok=True)
    dataset = work / "demo.csid"

    sh(
        sys.executable, "-m", "csifeedback.cli", "gen",
        "--out", str(dataset),
        "--count", str(args.samples),
        "--ns", "64", "--nt", "16", "--taps", "40", "--decay", "0.25",
        "--seed", str(args.seed),
    )

    config = {
        "dataset": str(dataset),
        "outdir": str(work / "sweep"),
        "nd": 16,
        "crs": ["1/2", "1/4", "1/8"],
        "bits": [3, 4],
        "seed": 11,
        "denoiser": "soft_threshold",
        "solver": {"lam": 3e-4, "rho0": 1e-2, "alpha": 1.8, "max_iters": 10},
        "trace_samples": 4,
    }
    cfg_path = work / "config.json"
    cfg_path.write_text(json.dumps(config, indent=2))

    sh(sys.executable, "-m", "csifeedback.cli", "run", "--config", str(cfg_path))
    sh(
        sys.executable, "-m", "csifeedback.cli", "plot",
        "--results", str(work / "sweep" / "results.csv"),
        "--traces", str(work / "sweep" / "traces" / "cr1_4_bnone.csv"),
        "--outdir", str(work / "figures"),
    )

    print(f"\ndone; see {work}/sweep/results.csv and {work}/figures/")
    return 0


if __name__ == "__main__":
    sys.exit(main())
