"""Renderer unit tests against hand-built minimal payloads."""

import json
from pathlib import Path

import numpy as np
import pytest

from fidfigures import PayloadError, render


def write_min_payload(d: Path, param="p", overlays=True):
    d.mkdir(parents=True, exist_ok=True)
    edges = [0.0, 0.25, 0.5, 0.75, 1.0]
    heights = [0.4, 1.2, 1.6, 0.8]
    summary = {
        "params": {param: {"mean": 0.5}},
        "hist": {param: {"edges": edges, "heights": heights}},
        "overlays": [],
    }
    (d / "samples.csv").write_text(param + "\n0.1\n0.4\n0.6\n0.9\n")
    if overlays:
        summary["overlays"].append(
            {"param": param, "name": "ref", "style": "solid", "file": "overlay_ref.csv"})
        (d / "overlay_ref.csv").write_text(
            "x,density\n" + "\n".join(f"{x},{1.0}" for x in np.linspace(0, 1, 16)))
    (d / "summary.json").write_text(json.dumps(summary))
    return summary


class TestErrors:
    def test_missing_dir(self, tmp_path):
        with pytest.raises(PayloadError):
            render("fig1", tmp_path / "nope", tmp_path / "o.png")

    def test_empty_payload_no_partial_image(self, tmp_path):
        (tmp_path / "payload").mkdir()
        out = tmp_path / "o.png"
        with pytest.raises(PayloadError):
            render("fig1", tmp_path / "payload", out)
        assert not out.exists()

    def test_missing_overlay_file(self, tmp_path):
        sub = tmp_path / "a"
        summary = write_min_payload(sub)
        (sub / "overlay_ref.csv").unlink()
        out = tmp_path / "o.png"
        with pytest.raises(PayloadError, match="overlay"):
            render("fig1", tmp_path, out)
        assert not out.exists()

    def test_missing_samples(self, tmp_path):
        sub = tmp_path / "a"
        write_min_payload(sub)
        (sub / "samples.csv").unlink()
        with pytest.raises(PayloadError, match="samples"):
            render("fig1", tmp_path, tmp_path / "o.png")

    def test_missing_column_for_fig4(self, tmp_path):
        write_min_payload(tmp_path, param="tau")   # lacks tau1
        with pytest.raises(PayloadError, match="tau1"):
            render("fig4", tmp_path, tmp_path / "o.png")

    def test_unknown_figure(self, tmp_path):
        write_min_payload(tmp_path / "a")
        with pytest.raises(PayloadError):
            render("fig9", tmp_path, tmp_path / "o.png")


class TestRendering:
    def test_two_panel_from_subdirs(self, tmp_path):
        write_min_payload(tmp_path / "a")
        write_min_payload(tmp_path / "b")
        out = tmp_path / "fig.png"
        meta = render("fig1", tmp_path, out)
        assert out.is_file() and out.stat().st_size > 0
        assert [p["param"] for p in meta["panels"]] == ["p", "p"]
        assert meta["panels"][0]["edges"] == [0.0, 0.25, 0.5, 0.75, 1.0]

    def test_rerender_is_byte_identical(self, tmp_path):
        write_min_payload(tmp_path / "a")
        out = tmp_path / "fig.png"
        render("fig1", tmp_path, out)
        first = out.read_bytes()
        render("fig1", tmp_path, out)
        assert out.read_bytes() == first
