"""Command-line entry points: gen, tune, run, plot, inspect.

Exit codes: 0 success, 1 configuration error, 2 runtime error.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .errors import CsiFeedbackError


def _parse_overrides(pairs):
    overrides = {}
    for pair in pairs or []:
        key, _, value = pair.partition("=")
        if not _:
            raise ValueError(f"override must look like key=value, got {pair!r}")
        try:
            overrides[key] = json.loads(value)
        except json.JSONDecodeError:
            overrides[key] = value
    return overrides


def cmd_gen(args) -> int:
    from .dataset import generate_synthetic, save_dataset
    from .linalg import SeededRng

    samples = generate_synthetic(
        SeededRng(args.seed), args.count, args.ns, args.nt, args.taps, args.decay
    )
    save_dataset(args.out, samples)
    print(f"wrote {len(samples)} samples ({args.ns}x{args.nt}) to {args.out}")
    return 0


def cmd_run(args) -> int:
    from .experiment import ExperimentConfig, run_experiment

    cfg = ExperimentConfig.from_json(args.config, overrides=_parse_overrides(args.set))
    outdir = run_experiment(cfg)
    print(f"results written to {outdir}")
    return 0


def cmd_tune(args) -> int:
    from .experiment import ExperimentConfig, run_experiment

    cfg = ExperimentConfig.from_json(args.config, overrides=_parse_overrides(args.set))
    if not cfg.tune_grid:
        print("config has no tune_grid", file=sys.stderr)
        return 1
    outdir = run_experiment(cfg)
    for line in (outdir / "manifest.txt").read_text().splitlines():
        if ".tuned:" in line:
            print(line)
    return 0


def cmd_plot(args) -> int:
    from .plotting import plot_convergence, plot_rate_vs_cr

    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    made = [plot_rate_vs_cr(args.results, outdir / "rate_vs_cr.svg")]
    for trace in args.traces or []:
        made.append(plot_convergence(trace, outdir / (Path(trace).stem + ".svg")))
    for p in made:
        print(f"wrote {p}")
    return 0


def cmd_inspect(args) -> int:
    path = Path(args.path)
    head = path.read_bytes()[:5]
    if head == b"CSID1":
        from .dataset import load_dataset

        samples = load_dataset(path)
        shape = samples[0].spatial_freq.shape if samples else ("-", "-")
        print(f"CSID1 dataset: {len(samples)} samples, Ns={shape[0]}, Nt={shape[1]}")
    elif head == b"PPPW1":
        from .denoisers import load_weights

        model = load_weights(path)
        chain = " -> ".join(
            f"{l.weights.shape[1]}x{l.weights.shape[0]}({l.activation})" for l in model.layers
        )
        print(f"PPPW1 weights: {len(model.layers)} layers, {model.parameter_count} params, {chain}")
    else:
        print(f"unrecognized file magic {head!r}", file=sys.stderr)
        return 1
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="csifeedback")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a synthetic CSID1 dataset")
    p.add_argument("--out", required=True)
    p.add_argument("--count", type=int, default=100)
    p.add_argument("--ns", type=int, default=256)
    p.add_argument("--nt", type=int, default=32)
    p.add_argument("--taps", type=int, default=24)
    p.add_argument("--decay", type=float, default=0.3)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("run", help="run a sweep from a JSON config")
    p.add_argument("--config", required=True)
    p.add_argument("--set", action="append", metavar="KEY=VALUE")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("tune", help="grid-tune solver parameters per CR")
    p.add_argument("--config", required=True)
    p.add_argument("--set", action="append", metavar="KEY=VALUE")
    p.set_defaults(func=cmd_tune)

    p = sub.add_parser("plot", help="emit figures from results/trace CSVs")
    p.add_argument("--results", required=True)
    p.add_argument("--traces", nargs="*")
    p.add_argument("--outdir", required=True)
    p.set_defaults(func=cmd_plot)

    p = sub.add_parser("inspect", help="describe a CSID1 or PPPW1 file")
    p.add_argument("path")
    p.set_defaults(func=cmd_inspect)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 1 if exc.code else 0
    try:
        return args.func(args)
    except (ValueError, FileNotFoundError, json.JSONDecodeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except CsiFeedbackError as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
