"""Trace serialization (CSV) and figure rendering for the report path."""

from __future__ import annotations

import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .harness import SimTrace


def write_trace_csv(trace: SimTrace, path) -> Path:
    """Write ``k, y_1..y_l, truth_1.., est_1.., abs_err_1..`` with 12
    significant digits and ``\\n`` line endings."""
    path = Path(path)
    l = trace.y.shape[1]
    ch = trace.truth.shape[1]
    header = (
        ["k"]
        + [f"y_{i + 1}" for i in range(l)]
        + [f"truth_{i + 1}" for i in range(ch)]
        + [f"est_{i + 1}" for i in range(ch)]
        + [f"abs_err_{i + 1}" for i in range(ch)]
    )
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for i in range(len(trace.k)):
            row = [str(int(trace.k[i]))]
            for block in (trace.y[i], trace.truth[i], trace.estimate[i], trace.abs_err[i]):
                row.extend(f"{v:.12g}" for v in block)
            writer.writerow(row)
    return path


def read_trace_csv(path) -> dict[str, np.ndarray]:
    """Read a trace CSV back into column arrays keyed by header block."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    header, data = rows[0], np.asarray(rows[1:], dtype=float)
    out: dict[str, list] = {"k": [], "y": [], "truth": [], "est": [], "abs_err": []}
    for j, name in enumerate(header):
        key = name.rsplit("_", 1)[0] if name != "k" else "k"
        out[key].append(data[:, j])
    return {
        "k": out["k"][0].astype(int),
        "y": np.column_stack(out["y"]),
        "truth": np.column_stack(out["truth"]),
        "est": np.column_stack(out["est"]),
        "abs_err": np.column_stack(out["abs_err"]),
    }


def render_trace_figure(trace: SimTrace, path, title: str | None = None) -> Path:
    """Render truth vs. estimate per channel plus the error curve to a file."""
    path = Path(path)
    ch = trace.truth.shape[1]
    fig, axes = plt.subplots(2, 1, figsize=(7.0, 5.6), sharex=True)
    for c in range(ch):
        axes[0].plot(trace.k, trace.truth[:, c], "--", lw=1.2,
                     label=f"truth ch{c + 1} (delay {trace.delay})")
        axes[0].plot(trace.k, trace.estimate[:, c], lw=1.0, label=f"estimate ch{c + 1}")
    axes[0].set_ylabel("signal")
    axes[0].legend(loc="best", fontsize=8)
    axes[0].set_title(title or trace.label or "reconstruction")
    err = np.maximum(trace.abs_err.max(axis=1), 1e-18)
    axes[1].semilogy(trace.k, err, lw=1.0)
    axes[1].set_xlabel("sample k")
    axes[1].set_ylabel("max |error|")
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)
    return path


def write_case_outputs(result, out_dir) -> list[Path]:
    """Write one CSV and one PNG per trace of a case run."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    for label, trace in result.traces.items():
        stem = f"case{result.case_id}_{label}"
        written.append(write_trace_csv(trace, out_dir / f"{stem}.csv"))
        written.append(render_trace_figure(trace, out_dir / f"{stem}.png"))
    return written
