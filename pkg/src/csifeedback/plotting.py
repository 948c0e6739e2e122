"""Figure emission: rate-vs-CR curves and convergence traces as SVG.

Each emitted SVG carries its plotted data series inside a <desc> element so
tests (and readers) can recover the exact numbers from the figure file.
"""
from __future__ import annotations

import csv
import json
import math
import re
import warnings
from fractions import Fraction
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

_DESC_ID = "embedded-data"


def _embed_data(svg_path: Path, payload: dict) -> None:
    text = svg_path.read_text()
    blob = json.dumps(payload)
    # xml-escape the JSON so the SVG stays well-formed
    blob = blob.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
    m = re.search(r"<svg\b[^>]*>", text)
    if m is None:
        raise ValueError(f"{svg_path} does not look like an SVG file")
    injected = text[: m.end()] + f'\n<desc id="{_DESC_ID}">{blob}</desc>' + text[m.end() :]
    svg_path.write_text(injected)


def extract_embedded_data(svg_path) -> dict:
    text = Path(svg_path).read_text()
    m = re.search(rf'<desc id="{_DESC_ID}">(.*?)</desc>', text, re.S)
    if m is None:
        raise ValueError(f"no embedded data in {svg_path}")
    blob = m.group(1).replace("&lt;", "<").replace("&gt;", ">").replace("&amp;", "&")
    return json.loads(blob)


def _read_results(results_csv) -> list[dict]:
    rows = []
    with open(results_csv, newline="") as f:
        reader = csv.DictReader(f)
        if reader.fieldnames is None or "cr" not in reader.fieldnames:
            raise ValueError(f"{results_csv} line 1: missing results header")
        for lineno, row in enumerate(reader, start=2):
            try:
                rows.append(
                    {
                        "method": row["method"],
                        "cr": float(Fraction(row["cr"])),
                        "bits": row["bits"],
                        "nmse_db": float(row["nmse_db"]),
                        "rates": {
                            0.0: float(row["rate_0db"]),
                            10.0: float(row["rate_10db"]),
                            20.0: float(row["rate_20db"]),
                        },
                    }
                )
            except (KeyError, ValueError, ZeroDivisionError) as exc:
                raise ValueError(f"{results_csv} line {lineno}: {exc}") from exc
    return rows


def plot_rate_vs_cr(results_csv, out_svg) -> Path:
    """One curve per (method, bits, SNR): achievable rate against CR."""
    rows = _read_results(results_csv)
    out_svg = Path(out_svg)
    fig, ax = plt.subplots(figsize=(6, 4))
    series = {}
    if not rows:
        warnings.warn("no results to plot; emitting an empty figure", RuntimeWarning)
    for snr in (0.0, 10.0, 20.0):
        for key in sorted({(r["method"], r["bits"]) for r in rows}):
            pts = sorted(
                ((r["cr"], r["rates"][snr]) for r in rows if (r["method"], r["bits"]) == key)
            )
            label = f"{key[0]} B={key[1]} {snr:g}dB"
            xs = [p[0] for p in pts]
            ys = [p[1] for p in pts]
            ax.plot(xs, ys, marker="o", label=label)
            series[label] = {"cr": xs, "rate": ys}
    ax.set_xlabel("compression ratio M/N")
    ax.set_ylabel("achievable rate (bps/Hz)")
    if series:
        ax.legend(fontsize=6)
    fig.savefig(out_svg, format="svg")
    plt.close(fig)
    _embed_data(out_svg, {"kind": "rate_vs_cr", "series": series})
    return out_svg


def plot_convergence(trace_csv, out_svg) -> Path:
    """NMSE against iteration, one curve per traced sample."""
    out_svg = Path(out_svg)
    per_sample: dict[str, list[tuple[int, float]]] = {}
    with open(trace_csv, newline="") as f:
        reader = csv.DictReader(f)
        if reader.fieldnames is None or "iter" not in reader.fieldnames:
            raise ValueError(f"{trace_csv} line 1: missing trace header")
        for lineno, row in enumerate(reader, start=2):
            if not row.get("nmse"):
                continue
            try:
                per_sample.setdefault(row["sample"], []).append(
                    (int(row["iter"]), float(row["nmse"]))
                )
            except (KeyError, ValueError) as exc:
                raise ValueError(f"{trace_csv} line {lineno}: {exc}") from exc
    fig, ax = plt.subplots(figsize=(6, 4))
    series = {}
    if not per_sample:
        warnings.warn("no traced NMSE values; emitting an empty figure", RuntimeWarning)
    for sample, pts in sorted(per_sample.items()):
        pts.sort()
        xs = [p[0] for p in pts]
        ys = [10 * math.log10(p[1]) if p[1] > 0 else float("-inf") for p in pts]
        ax.plot(xs, ys, marker=".", label=f"sample {sample}")
        series[sample] = {"iter": xs, "nmse_db": ys}
    ax.set_xlabel("iteration")
    ax.set_ylabel("NMSE (dB)")
    if series:
        ax.legend(fontsize=6)
    fig.savefig(out_svg, format="svg")
    plt.close(fig)
    _embed_data(out_svg, {"kind": "convergence", "series": series})
    return out_svg
