"""Report emission: tables, CSV, plot specs, SVG, PNG rendering."""

import json
import xml.etree.ElementTree as ET

import numpy as np

from trajvault import coverage_report, density, histogram, summarize
from trajvault.report import (SUMMARY_HEADERS, density_csv, density_plot_spec,
                              fmt_float, format_table, histogram_csv,
                              histogram_plot_spec, render_density_png,
                              render_histogram_png, render_spectrum_png,
                              spectrum_csv, spectrum_plot_spec, summary_row,
                              svg_histogram)

from conftest import make_dataset


def test_format_table_alignment():
    text = format_table(["A", "Blong"], [["1", "2"], ["333", "4"]])
    lines = text.splitlines()
    assert lines[0].startswith("A")
    assert set(lines[1]) <= {"-", " "}
    assert len(lines) == 4
    widths = {len(ln.rstrip()) for ln in lines[:2]}
    assert len(widths) == 1


def test_fmt_float():
    assert fmt_float(1.23456) == "1.23"
    assert fmt_float(None) == "n/a"
    assert fmt_float(2.0, places=4) == "2.0000"


def test_summary_row_shape():
    s = summarize(np.array([1.0, 2.0]), n_transitions=20)
    row = summary_row("x", s, 0.5)
    assert len(row) == len(SUMMARY_HEADERS)
    assert row[0] == "x" and row[-1] == "0.50"
    assert summary_row("y", s, None)[-1] == "n/a"


def test_histogram_csv_parses_back():
    h = histogram(np.array([0.0, 1.0, 2.0, 3.0]), bins=2)
    text = histogram_csv(h)
    lines = text.strip().splitlines()
    assert lines[0] == "edge_left,edge_right,count"
    rows = [ln.split(",") for ln in lines[1:]]
    assert len(rows) == 2
    assert [int(r[2]) for r in rows] == h.counts.tolist()
    assert float(rows[0][0]) == h.bin_edges[0]
    assert float(rows[-1][1]) == h.bin_edges[-1]


def test_density_csv_parses_back():
    c = density(np.array([0.0, 1.0, 2.0]))
    lines = density_csv(c).strip().splitlines()
    assert lines[0] == "x,y"
    assert len(lines) == 257
    xs = np.array([float(ln.split(",")[0]) for ln in lines[1:]])
    np.testing.assert_array_equal(xs, c.xs)


def test_spectrum_csv():
    d = make_dataset(state_dim=1, n_actions=2, obs_dim=1, seed=2)
    rep = coverage_report(d)
    lines = spectrum_csv(rep).strip().splitlines()
    assert lines[0] == "multiplicity,frequency"
    total = sum(int(a) * int(b) for a, b in
                (ln.split(",") for ln in lines[1:]))
    assert total == d.n_transitions


def test_plot_specs_are_json_ready():
    h = histogram(np.array([1.0, 2.0, 3.0]), bins=3)
    c = density(np.array([1.0, 2.0, 3.0]))
    rep = coverage_report(make_dataset(state_dim=1))
    for spec in (histogram_plot_spec(h, "t1"), density_plot_spec(c, "t2"),
                 spectrum_plot_spec(rep, "t3")):
        doc = json.loads(json.dumps(spec))
        assert doc["kind"] in ("histogram", "density", "loglog-spectrum")
        assert doc["title"]
        for series in doc["series"]:
            assert len(series["x"]) == len(series["y"])


def test_svg_histogram_well_formed():
    h = histogram(np.array([0.0, 0.5, 1.0, 1.5, 9.0]), bins=4)
    svg = svg_histogram(h, "returns")
    root = ET.fromstring(svg)
    assert root.tag.endswith("svg")
    rects = [el for el in root.iter() if el.tag.endswith("rect")]
    assert len(rects) >= 4


def test_png_renderers_produce_files(tmp_path):
    h = histogram(np.array([0.0, 1.0, 2.0, 5.0]), bins=3)
    c = density(np.array([0.0, 1.0, 2.0, 5.0]))
    rep = coverage_report(make_dataset(state_dim=1))
    files = [tmp_path / "h.png", tmp_path / "d.png", tmp_path / "s.png"]
    render_histogram_png(h, str(files[0]), "h")
    render_density_png(c, str(files[1]), "d")
    render_spectrum_png(rep, str(files[2]), "s")
    for f in files:
        blob = f.read_bytes()
        assert blob[:8] == b"\x89PNG\r\n\x1a\n"
        assert len(blob) > 1000
