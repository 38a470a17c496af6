"""Render the four standard figures from CLI payload directories.

A payload directory is whatever the sampling CLI wrote: samples.csv,
summary.json (with histogram bin edges/heights and an overlay index) and
overlay_*.csv curves.  Rendering is a pure function of those files: bars
come straight from the stored edges and heights, never recomputed, so the
image and the payload can never disagree about binning.
"""

from __future__ import annotations

import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

FIGURE_IDS = ("fig1", "fig2", "fig3", "fig4")

# params drawn per figure; None means one panel per payload subdirectory
_PANEL_PARAMS = {
    "fig1": None,
    "fig2": None,
    "fig3": ("p1", "p2", "p3", "p4"),
    "fig4": ("tau", "tau1"),
}

_LINESTYLE = {"solid": "-", "dashed": "--", "dotted": ":"}


class PayloadError(Exception):
    """The payload directory is missing, incomplete, or malformed."""


def _load_payload(path: Path) -> dict:
    summary_file = path / "summary.json"
    if not summary_file.is_file():
        raise PayloadError(f"no summary.json in {path}")
    try:
        summary = json.loads(summary_file.read_text())
    except json.JSONDecodeError as exc:
        raise PayloadError(f"unreadable summary.json in {path}: {exc}") from exc
    for key in ("params", "hist", "overlays"):
        if key not in summary:
            raise PayloadError(f"summary.json in {path} lacks {key!r}")
    samples = path / "samples.csv"
    if not samples.is_file() or samples.stat().st_size == 0:
        raise PayloadError(f"missing or empty samples.csv in {path}")
    curves = {}
    for entry in summary["overlays"]:
        curve_file = path / entry["file"]
        if not curve_file.is_file():
            raise PayloadError(f"missing overlay {entry['file']} in {path}")
        data = np.genfromtxt(curve_file, delimiter=",", names=True)
        if data.size == 0:
            raise PayloadError(f"empty overlay {entry['file']} in {path}")
        curves[entry["file"]] = data
    return {"dir": path, "summary": summary, "curves": curves}


def _panels(figure_id: str, payload_dir: Path) -> list[dict]:
    """One dict per panel: payload + parameter name."""
    if figure_id not in FIGURE_IDS:
        raise PayloadError(f"unknown figure id {figure_id!r}")
    params = _PANEL_PARAMS[figure_id]
    if params is None:
        subdirs = sorted(p for p in payload_dir.iterdir()
                         if p.is_dir() and (p / "summary.json").is_file())
        if not subdirs:
            raise PayloadError(
                f"{figure_id} expects payload subdirectories under {payload_dir}")
        panels = []
        for sub in subdirs:
            payload = _load_payload(sub)
            names = list(payload["summary"]["params"])
            if len(names) != 1:
                raise PayloadError(f"{sub} should hold a single-parameter payload")
            panels.append({"payload": payload, "param": names[0]})
        return panels
    payload = _load_payload(payload_dir)
    panels = []
    for name in params:
        if name not in payload["summary"]["hist"]:
            raise PayloadError(f"payload lacks histogram data for {name!r}")
        panels.append({"payload": payload, "param": name})
    return panels


def _draw_panel(ax, panel: dict, label: str):
    summary = panel["payload"]["summary"]
    name = panel["param"]
    hist = summary["hist"][name]
    edges = np.asarray(hist["edges"], dtype=float)
    heights = np.asarray(hist["heights"], dtype=float)
    ax.bar(edges[:-1], heights, width=np.diff(edges), align="edge",
           color="0.82", edgecolor="0.5", linewidth=0.4)
    for entry in summary["overlays"]:
        if entry.get("param") != name:
            continue
        curve = panel["payload"]["curves"][entry["file"]]
        ax.plot(curve["x"], curve["density"],
                _LINESTYLE.get(entry.get("style", "solid"), "-"),
                color="black", linewidth=1.1, label=entry["name"])
    ax.set_xlabel(name)
    ax.set_ylabel("density")
    ax.set_title(label, loc="left", fontsize=10)
    if any(e.get("param") == name for e in summary["overlays"]):
        ax.legend(fontsize=7, frameon=False)
    return edges


def render(figure_id: str, payload_dir, out_image) -> dict:
    """Render one figure; returns metadata including the bin edges used.

    All payload files are read and validated before the output file is
    touched, so a bad payload never leaves a partial image behind.
    """
    payload_dir = Path(payload_dir)
    out_image = Path(out_image)
    if not payload_dir.is_dir():
        raise PayloadError(f"payload directory {payload_dir} does not exist")
    panels = _panels(figure_id, payload_dir)

    ncols = 2
    nrows = (len(panels) + 1) // 2
    fig, axes = plt.subplots(nrows, ncols, figsize=(5.0 * ncols, 3.4 * nrows))
    axes = np.atleast_1d(axes).ravel()
    meta_panels = []
    for i, (ax, panel) in enumerate(zip(axes, panels)):
        label = f"({chr(ord('a') + i)})"
        edges = _draw_panel(ax, panel, label)
        meta_panels.append({
            "param": panel["param"],
            "payload": str(panel["payload"]["dir"]),
            "edges": edges.tolist(),
        })
    for ax in axes[len(panels):]:
        ax.set_visible(False)
    fig.tight_layout()
    out_image.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out_image, dpi=150, metadata=_scrubbed_metadata(out_image))
    plt.close(fig)
    return {"figure": figure_id, "out": str(out_image), "panels": meta_panels}


def _scrubbed_metadata(out_image: Path) -> dict:
    """Keep output bytes stable across re-runs (no timestamps)."""
    if out_image.suffix.lower() == ".svg":
        return {"Date": None}
    return {}


__all__ = ["render", "PayloadError", "FIGURE_IDS"]
