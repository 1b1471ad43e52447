import re
import xml.etree.ElementTree as ET

import pytest

from totcorr.experiments import SweepConfig, SweepRecord, sweep
from totcorr.measures import parse_measures
from totcorr.plotting import render_panels, render_scatter

SVG = "{http://www.w3.org/2000/svg}"


def _marker_group(path, gid="markers"):
    root = ET.parse(path).getroot()
    for g in root.iter(f"{SVG}g"):
        if g.get("id") == gid:
            return g
    raise AssertionError(f"no group {gid}")


def _uses(group):
    return list(group.iter(f"{SVG}use"))


@pytest.fixture(scope="module")
def records():
    return sweep(SweepConfig(n_states=1000, measures=tuple(parse_measures("qmi,geometric:1")), seed=5))


def test_one_marker_per_record(records, tmp_path):
    out = render_scatter(records, "qmi", "geometric:1", tmp_path / "s.svg")
    assert len(_uses(_marker_group(out))) == 1000
    text = out.read_text()
    assert text.startswith("<?xml")


def test_empty_records_give_axes_only(tmp_path):
    out = render_scatter([], "qmi", "pcc", tmp_path / "e.svg")
    assert _uses(_marker_group(out)) == []
    ET.parse(out)


def _xy(u):
    return float(u.get("x")), float(u.get("y"))


def test_diagonal_when_x_equals_y(records, tmp_path):
    out = render_scatter(records[:50], "qmi", "qmi", tmp_path / "d.svg")
    pts = [_xy(u) for u in _uses(_marker_group(out))]
    # equal aspect: SVG y grows downwards, so x + y is constant on the diagonal
    c = pts[0][0] + pts[0][1]
    assert all(x + y == pytest.approx(c, abs=0.5) for x, y in pts)


def test_deterministic_output(records, tmp_path):
    a = render_scatter(records[:20], "qmi", "geometric:1", tmp_path / "a.svg").read_bytes()
    b = render_scatter(records[:20], "qmi", "geometric:1", tmp_path / "b.svg").read_bytes()
    assert a == b


def test_panels(records, tmp_path):
    out = render_panels(records[:30], "qmi", ["geometric:1", "qmi"], tmp_path / "p.svg")
    assert len(_uses(_marker_group(out, "markers-0"))) == 30
    assert len(_uses(_marker_group(out, "markers-1"))) == 30


def test_axes_span_unit_interval(tmp_path):
    corners = [SweepRecord(0, 0, 0, {"qmi": 0.0, "kl": 0.0}, {"qmi": 0.0, "kl": 0.0}),
               SweepRecord(1, 0, 0, {"qmi": 1.0, "kl": 1.0}, {"qmi": 1.0, "kl": 1.0})]
    out = render_scatter(corners, "qmi", "kl", tmp_path / "c.svg")
    (x0, y0), (x1, y1) = [_xy(u) for u in _uses(_marker_group(out))]
    root = ET.parse(out).getroot()
    frame = next(g for g in root.iter(f"{SVG}g") if g.get("id") == "patch_2")
    nums = [float(t) for t in re.findall(r"-?\d+\.?\d*", frame.find(f"{SVG}path").get("d"))]
    xs, ys = nums[0::2], nums[1::2]
    assert (x0, y0) == pytest.approx((min(xs), max(ys)), abs=0.01)
    assert (x1, y1) == pytest.approx((max(xs), min(ys)), abs=0.01)
