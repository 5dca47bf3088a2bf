"""Write analysis results as CSV files and an SVG line plot."""

from __future__ import annotations

import csv
from pathlib import Path
from typing import Sequence

from .analysis import best_so_far, high_performer_counts, pca_top_configs, top_records
from .runlog import RunLog

PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"]


def _write_rows(path: Path, header: Sequence[str], rows) -> None:
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def svg_step_plot(series: dict[str, list[tuple[float, float]]], title: str = "",
                  xlabel: str = "time (s)", ylabel: str = "best objective",
                  width: int = 640, height: int = 400) -> str:
    """Render step curves as a standalone SVG document."""
    margin = 60
    pts = [p for s in series.values() for p in s]
    if pts:
        x0, x1 = min(p[0] for p in pts), max(p[0] for p in pts)
        y0, y1 = min(p[1] for p in pts), max(p[1] for p in pts)
    else:
        x0, x1, y0, y1 = 0.0, 1.0, 0.0, 1.0
    if x1 <= x0:
        x1 = x0 + 1.0
    if y1 <= y0:
        y0, y1 = y0 - 0.5, y1 + 0.5

    def sx(x):
        return margin + (x - x0) / (x1 - x0) * (width - 2 * margin)

    def sy(y):
        return height - margin - (y - y0) / (y1 - y0) * (height - 2 * margin)

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<line x1="{margin}" y1="{height - margin}" x2="{width - margin}" y2="{height - margin}" stroke="black"/>',
        f'<line x1="{margin}" y1="{margin}" x2="{margin}" y2="{height - margin}" stroke="black"/>',
        f'<text x="{width / 2:.1f}" y="{height - 15}" text-anchor="middle" font-size="12">{xlabel}</text>',
        f'<text x="15" y="{height / 2:.1f}" text-anchor="middle" font-size="12" '
        f'transform="rotate(-90 15 {height / 2:.1f})">{ylabel}</text>',
        f'<text x="{width / 2:.1f}" y="25" text-anchor="middle" font-size="14">{title}</text>',
    ]
    for frac in (0.0, 0.5, 1.0):
        xv, yv = x0 + frac * (x1 - x0), y0 + frac * (y1 - y0)
        out.append(f'<text x="{sx(xv):.1f}" y="{height - margin + 16}" text-anchor="middle" font-size="10">{xv:.4g}</text>')
        out.append(f'<text x="{margin - 6}" y="{sy(yv) + 3:.1f}" text-anchor="end" font-size="10">{yv:.4g}</text>')
    for i, (name, curve) in enumerate(series.items()):
        color = PALETTE[i % len(PALETTE)]
        if curve:
            path = [f"M{sx(curve[0][0]):.2f},{sy(curve[0][1]):.2f}"]
            for (_, ya), (xb, yb) in zip(curve, curve[1:]):
                path.append(f"H{sx(xb):.2f}V{sy(yb):.2f}")
            out.append(f'<path d="{"".join(path)}" fill="none" stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{width - margin + 4}" y="{margin + 14 * i}" font-size="10" fill="{color}">{name}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def emit_artifacts(logs: RunLog | Sequence[RunLog], out_dir, top_fraction: float = 0.01,
                   quantile_level: float = 0.99) -> list[Path]:
    """Write trajectory, high-performer count and PCA tables plus a plot into ``out_dir``.

    Several logs share one high-performer threshold. Outputs depend only on the
    log contents, so identical logs produce byte-identical files.
    """
    if isinstance(logs, RunLog):
        logs = [logs]
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    names = [log.name or f"run{i}" for i, log in enumerate(logs)]
    written = []

    traj_rows = []
    series = {}
    for name, log in zip(names, logs):
        curve = best_so_far(log)
        series[name] = curve
        ok = sorted(log.ok_records(), key=lambda r: (r.finish_time, r.job_id))
        for rec, (t, b) in zip(ok, curve):
            traj_rows.append([name, rec.job_id, repr(t), repr(rec.objective), repr(b)])
    p = out / "trajectory.csv"
    _write_rows(p, ["run", "job_id", "time", "objective", "best_so_far"], traj_rows)
    written.append(p)

    count_rows = []
    if any(log.ok_records() for log in logs):
        threshold, curves = high_performer_counts(logs, quantile_level)
        for name, curve in zip(names, curves):
            count_rows += [[name, repr(t), c, repr(threshold)] for t, c in curve]
    p = out / "counts.csv"
    _write_rows(p, ["run", "time", "count", "threshold"], count_rows)
    written.append(p)

    pca_rows, var_rows = [], []
    for name, log in zip(names, logs):
        if len(top_records(log, top_fraction)) < 3:
            continue
        res = pca_top_configs(log, top_fraction)
        for space, proj in (("arch", res.arch), ("hp", res.hp)):
            var_rows.append([name, space, repr(float(proj.variance_ratio[0])), repr(float(proj.variance_ratio[1]))])
            for job_id, (a, b) in zip(res.job_ids, proj.points):
                pca_rows.append([name, space, job_id, repr(float(a)), repr(float(b))])
    p = out / "pca.csv"
    _write_rows(p, ["run", "space", "job_id", "pc1", "pc2"], pca_rows)
    written.append(p)
    p = out / "pca_variance.csv"
    _write_rows(p, ["run", "space", "ratio_pc1", "ratio_pc2"], var_rows)
    written.append(p)

    p = out / "best_so_far.svg"
    p.write_text(svg_step_plot(series, title="best objective so far"))
    written.append(p)
    return written
