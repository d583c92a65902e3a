"""Simulation report emission: JSON, CSV samples, and rendered figures.

Figures use the Agg backend only; nothing here needs a display.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

from .sim import SimReport


def _figure_modules():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def write_sim_report(
    report: SimReport, out_dir, basename: str = "sim", with_csv: bool = True, with_figures: bool = True
) -> dict:
    """Write {basename}.json plus optional CSV samples and PNG charts.
    Returns a manifest of written paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = {}

    json_path = out / f"{basename}.json"
    json_path.write_text(json.dumps(report.to_json(), indent=2, sort_keys=True) + "\n")
    written["report"] = str(json_path)

    if with_csv:
        reorg_path = out / f"{basename}_reorgs.csv"
        with reorg_path.open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["depth", "count"])
            for depth, count in sorted(report.reorg_depth_histogram.items()):
                writer.writerow([depth, count])
        written["reorgs_csv"] = str(reorg_path)

        latency_path = out / f"{basename}_latency.csv"
        with latency_path.open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["tx_hash", "origin", "submitted", "confirmed", "latency"])
            for row in report.tx_confirmations:
                writer.writerow(
                    [row["tx_hash"], row["origin"], row["submitted"], row["confirmed"], row["latency"]]
                )
        written["latency_csv"] = str(latency_path)

    if with_figures:
        plt = _figure_modules()

        fig, ax = plt.subplots(figsize=(6, 4))
        depths = sorted(report.reorg_depth_histogram)
        counts = [report.reorg_depth_histogram[d] for d in depths]
        if depths:
            ax.bar(depths, counts, color="#4477aa")
            ax.set_xticks(depths)
        else:
            ax.text(0.5, 0.5, "no reorgs observed", ha="center", va="center", transform=ax.transAxes)
        ax.set_xlabel("reorg depth (blocks)")
        ax.set_ylabel("occurrences")
        ax.set_title(f"Reorg depths over {report.blocks_mined} blocks")
        fig.tight_layout()
        reorg_png = out / f"{basename}_reorgs.png"
        fig.savefig(reorg_png, dpi=120)
        plt.close(fig)
        written["reorgs_png"] = str(reorg_png)

        latencies = [r["latency"] for r in report.tx_confirmations if r["latency"] is not None]
        fig, ax = plt.subplots(figsize=(6, 4))
        if latencies:
            ax.hist(latencies, bins=min(30, max(5, len(latencies) // 5)), color="#66ccee")
        else:
            ax.text(0.5, 0.5, "no confirmed transactions", ha="center", va="center", transform=ax.transAxes)
        ax.set_xlabel("confirmation latency (s)")
        ax.set_ylabel("transactions")
        ax.set_title("Transaction confirmation latency")
        fig.tight_layout()
        latency_png = out / f"{basename}_latency.png"
        fig.savefig(latency_png, dpi=120)
        plt.close(fig)
        written["latency_png"] = str(latency_png)

    return written


def write_doublespend_report(
    rows: list[dict], out_dir, basename: str = "doublespend", with_figures: bool = True
) -> dict:
    """rows: one dict per (q, z) point with empirical and analytic rates."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = {}

    json_path = out / f"{basename}.json"
    json_path.write_text(json.dumps(rows, indent=2, sort_keys=True) + "\n")
    written["report"] = str(json_path)

    csv_path = out / f"{basename}.csv"
    with csv_path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["q", "z", "trials", "empirical", "analytic"])
        for row in rows:
            writer.writerow([row["q"], row["z"], row["trials"], row["empirical"], row["analytic"]])
    written["csv"] = str(csv_path)

    if with_figures:
        plt = _figure_modules()
        fig, ax = plt.subplots(figsize=(6, 4))
        by_q: dict[float, list[dict]] = {}
        for row in rows:
            by_q.setdefault(row["q"], []).append(row)
        for q, points in sorted(by_q.items()):
            points.sort(key=lambda r: r["z"])
            zs = [r["z"] for r in points]
            ax.plot(zs, [r["empirical"] for r in points], "o-", label=f"empirical q={q}")
            ax.plot(zs, [r["analytic"] for r in points], "k--", alpha=0.5)
        ax.set_xlabel("confirmations z")
        ax.set_ylabel("attack success probability")
        ax.set_yscale("log")
        ax.set_title("Double-spend success: Monte Carlo vs closed form")
        ax.legend()
        fig.tight_layout()
        png_path = out / f"{basename}.png"
        fig.savefig(png_path, dpi=120)
        plt.close(fig)
        written["png"] = str(png_path)

    return written
