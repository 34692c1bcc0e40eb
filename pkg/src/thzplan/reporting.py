"""Stable on-disk formats for metrics, sweeps, heat maps, and events.

All writers are byte-deterministic: fixed column order, shortest
round-trip float text, LF newlines, atomic replace on close. Identical
inputs give identical files on any platform.
"""

from __future__ import annotations

import json
import os
import tempfile
from dataclasses import dataclass

import numpy as np

from .simulation import LABEL_NAMES, HeatmapGrid, MetricsReport

RESULT_COLUMNS = (
    "placement_type", "n_aps", "h_m", "seed",
    "user_coverage", "mean_throughput_bps", "ap_idle_fraction", "handoff_count",
)

EVENT_COLUMNS = ("t_s", "event_kind", "user_id", "ap_id")


def fmt(value) -> str:
    """Shortest decimal text that round-trips the value."""
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


class _AtomicText:
    """Write to a sibling temp file, atomically replace on success."""

    def __init__(self, path):
        self.path = os.fspath(path)
        d = os.path.dirname(self.path) or "."
        fd, self.tmp = tempfile.mkstemp(dir=d, suffix=".tmp")
        self.fh = os.fdopen(fd, "w", newline="\n")

    def __enter__(self):
        return self.fh

    def __exit__(self, exc_type, exc, tb):
        self.fh.close()
        if exc_type is None:
            os.replace(self.tmp, self.path)
        else:
            os.unlink(self.tmp)
        return False


def result_row(report: MetricsReport) -> tuple:
    return (
        report.placement_type, report.n_aps, report.effective_height_m,
        report.seed, report.user_coverage, report.mean_throughput_bps,
        report.ap_idle_fraction, report.handoff_count,
    )


def write_results(reports, path) -> None:
    """Long-format sweep table, one row per run."""
    try:
        with _AtomicText(path) as fh:
            fh.write(",".join(RESULT_COLUMNS) + "\n")
            for r in reports:
                fh.write(",".join(fmt(v) for v in result_row(r)) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write results table {path}: {exc}") from exc


def read_results(path) -> list[dict]:
    rows = []
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        for line in fh:
            parts = line.rstrip("\n").split(",")
            row = dict(zip(header, parts))
            row["n_aps"] = int(row["n_aps"])
            row["seed"] = int(row["seed"])
            row["handoff_count"] = int(row["handoff_count"])
            for k in ("h_m", "user_coverage", "mean_throughput_bps", "ap_idle_fraction"):
                row[k] = float(row[k])
            rows.append(row)
    return rows


def write_events(events, path) -> None:
    try:
        with _AtomicText(path) as fh:
            fh.write(",".join(EVENT_COLUMNS) + "\n")
            for t, kind, user, ap in events:
                fh.write(f"{fmt(t)},{kind},{user},{ap}\n")
    except OSError as exc:
        raise OSError(f"cannot write event log {path}: {exc}") from exc


def write_heatmap(grid: HeatmapGrid, rates_path, labels_path, meta_path) -> None:
    """Rate grid and label grid as CSV (rows indexed by x), sidecar JSON."""
    try:
        with _AtomicText(rates_path) as fh:
            for row in grid.rates_bps:
                fh.write(",".join(fmt(v) for v in row) + "\n")
        with _AtomicText(labels_path) as fh:
            for row in grid.labels:
                fh.write(",".join(str(int(v)) for v in row) + "\n")
        meta = {
            "resolution_cells_per_m": grid.resolution_cells_per_m,
            "length_m": grid.length_m,
            "width_m": grid.width_m,
            "device_height_m": grid.device_height_m,
            "probe_rate_bps": grid.probe_rate_bps,
            "label_legend": {str(i): name for i, name in enumerate(LABEL_NAMES)},
            "shape": [int(grid.rates_bps.shape[0]), int(grid.rates_bps.shape[1])],
        }
        write_json(meta, meta_path)
    except OSError as exc:
        raise OSError(f"cannot write heat map {rates_path}: {exc}") from exc


def read_heatmap(rates_path, labels_path, meta_path) -> HeatmapGrid:
    with open(meta_path) as fh:
        meta = json.load(fh)
    rates = np.loadtxt(rates_path, delimiter=",", ndmin=2)
    labels = np.loadtxt(labels_path, delimiter=",", dtype=np.int8, ndmin=2)
    return HeatmapGrid(
        resolution_cells_per_m=meta["resolution_cells_per_m"],
        length_m=meta["length_m"],
        width_m=meta["width_m"],
        device_height_m=meta["device_height_m"],
        probe_rate_bps=meta["probe_rate_bps"],
        rates_bps=rates,
        labels=labels,
    )


def write_json(payload: dict, path) -> None:
    try:
        with _AtomicText(path) as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)
            fh.write("\n")
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc


def summary_payload(report: MetricsReport) -> dict:
    return {
        "placement_type": report.placement_type,
        "n_aps": report.n_aps,
        "effective_height_m": report.effective_height_m,
        "seed": report.seed,
        "n_steps": report.n_steps,
        "blockage_enabled": report.blockage_enabled,
        "user_coverage": report.user_coverage,
        "mean_throughput_bps": report.mean_throughput_bps,
        "ap_idle_fraction": report.ap_idle_fraction,
        "handoff_count": report.handoff_count,
        "p_t_w": report.p_t_w,
        "p_o_w": report.p_o_w,
        "height_correction_m": report.height_correction_m,
        "per_user_coverage": list(report.per_user_coverage),
        "per_user_throughput_bps": list(report.per_user_throughput_bps),
        "per_ap_idle_fraction": list(report.per_ap_idle_fraction),
    }


@dataclass(frozen=True)
class CrossoverResult:
    """First height where two metric series swap order."""

    metric: str
    series_a: str
    series_b: str
    crossover_h_m: float | None
    bracket: tuple[float, float] | None
    gaps: tuple[float, float] | None  # (a - b) on each side of the bracket


def detect_crossover(
    series_a, series_b, metric: str = "metric",
    name_a: str = "a", name_b: str = "b",
) -> CrossoverResult:
    """Locate the first sign change of (a - b) over a shared height grid.

    Both series are (h, value) sequences on identical grids. The reported
    height linearly interpolates the gap to zero inside the bracketing
    interval.
    """
    ha = [h for h, _ in series_a]
    hb = [h for h, _ in series_b]
    if ha != hb:
        raise ValueError("crossover detection needs identical height grids")
    if len(ha) < 2:
        raise ValueError("crossover detection needs at least two samples")
    gaps = [va - vb for (_, va), (_, vb) in zip(series_a, series_b)]
    for i in range(len(gaps) - 1):
        g0, g1 = gaps[i], gaps[i + 1]
        if g0 * g1 < 0.0:
            h0, h1 = ha[i], ha[i + 1]
            h_star = h0 + (h1 - h0) * g0 / (g0 - g1)
            return CrossoverResult(metric, name_a, name_b, h_star, (h0, h1), (g0, g1))
    return CrossoverResult(metric, name_a, name_b, None, None, None)
