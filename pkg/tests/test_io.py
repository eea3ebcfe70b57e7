import json
import math
import xml.etree.ElementTree as ET

import numpy as np
from hypothesis import given, strategies as st

from multifrac import io


@given(st.floats(allow_nan=False, allow_infinity=False))
def test_fmt_round_trips(x):
    assert float(io.fmt(x)) == x


def test_fmt_types():
    assert io.fmt(True) == "true" and io.fmt(np.bool_(False)) == "false"
    assert io.fmt(np.int64(7)) == "7"
    assert io.fmt(0.1) == "0.10000000000000001"


def test_csv_round_trip(tmp_path):
    rows = [[1, 0.1, "a"], [2, math.pi, "b"]]
    p = tmp_path / "x.csv"
    io.write_csv(str(p), ["i", "v", "s"], rows)
    hdr, back = io.read_csv(str(p))
    assert hdr == ["i", "v", "s"]
    assert [float(r[1]) for r in back] == [0.1, math.pi]


def test_json_non_finite(tmp_path):
    p = tmp_path / "x.json"
    io.write_json(str(p), {"a": np.inf, "b": np.array([1.0, np.nan]), "c": np.int32(3)})
    d = json.loads(p.read_text())
    assert d == {"a": "inf", "b": [1.0, "nan"], "c": 3}


def test_svg_well_formed(tmp_path):
    p = tmp_path / "a.svg"
    io.svg_lines(str(p), [0, 0.5, 1], {"x<y": [0, 1, np.nan], "z": [1, 1, 1]}, "t & s")
    root = ET.parse(p).getroot()
    assert root.tag.endswith("svg")
    q = tmp_path / "b.svg"
    io.svg_errorbars(str(q), ["g1", "g2"], [1.0, 2.0], [0.1, 0.0], [1.0, math.nan])
    assert ET.parse(q).getroot().tag.endswith("svg")
