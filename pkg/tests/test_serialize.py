from __future__ import annotations

import json
import os

import numpy as np
import pytest

from circum import (
    INF,
    ExpSum,
    Mobius,
    PointCloud,
    Polynomial,
    RationalMap,
    fit_circline,
    koenigs_chart,
)
from circum.serialize import (
    atomic_write_text,
    complex_pair,
    expsum_from_dict,
    expsum_to_dict,
    fit_report_to_dict,
    format_float,
    json_dumps,
    koenigs_chart_from_dict,
    koenigs_chart_to_dict,
    rational_map_from_dict,
    rational_map_to_dict,
    read_point_cloud_csv,
    run_manifest,
    sha256_file,
    write_pgm,
    write_point_cloud_csv,
)


def test_format_float_roundtrip():
    rng = np.random.default_rng(61)
    for _ in range(200):
        x = float(rng.standard_normal() * 10.0 ** rng.integers(-300, 300))
        assert float(format_float(x)) == x
    assert format_float(float("inf")) == "inf"
    assert format_float(float("-inf")) == "-inf"
    assert format_float(float("nan")) == "nan"
    assert format_float(0.1) == "0.10000000000000001"


def test_json_writer_is_deterministic_and_loadable():
    obj = {"b": 1, "a": [0.1, 2.0, None, True], "c": {"nested": [1e-300, -0.0]}}
    s1 = json_dumps(obj)
    s2 = json_dumps(obj)
    assert s1 == s2
    back = json.loads(s1)
    assert back["a"][0] == 0.1
    # insertion order preserved, not sorted
    assert s1.index('"b"') < s1.index('"a"')


def test_json_nonfinite_encoding():
    s = json_dumps({"x": float("inf"), "y": float("-inf"), "z": float("nan")})
    assert "1e999" in s and "-1e999" in s
    back = json.loads(s)
    assert back["x"] == float("inf")
    assert back["y"] == float("-inf")
    assert back["z"] is None


def test_point_cloud_csv_roundtrip(tmp_path):
    cloud = PointCloud([1.5 - 2.25j, INF, 0.1 + 0.3j])
    path = str(tmp_path / "cloud.csv")
    write_point_cloud_csv(path, cloud)
    text = open(path).read()
    assert text.splitlines()[1] == "inf"
    back = read_point_cloud_csv(path)
    assert back.points == cloud.points


def test_point_cloud_csv_rejects_bad_rows(tmp_path):
    path = str(tmp_path / "bad.csv")
    atomic_write_text(path, "1.0,2.0\nnot-a-number\n")
    with pytest.raises(ValueError):
        read_point_cloud_csv(path)
    atomic_write_text(path, "# only a comment\n")
    with pytest.raises(ValueError):
        read_point_cloud_csv(path)


def test_atomic_write_leaves_no_temp_files(tmp_path):
    path = str(tmp_path / "out.txt")
    atomic_write_text(path, "payload")
    assert open(path).read() == "payload"
    leftovers = [n for n in os.listdir(tmp_path) if n != "out.txt"]
    assert leftovers == []


def test_rational_map_dict_roundtrip():
    f = RationalMap(Polynomial([-3.0, 0.0, 1.0]), Polynomial([1.0, 0.05]))
    d = rational_map_to_dict(f)
    g = rational_map_from_dict(json.loads(json_dumps(d)))
    assert np.allclose(g.num.coeffs, f.num.coeffs)
    assert np.allclose(g.den.coeffs, f.den.coeffs)


def test_expsum_dict_roundtrip():
    g = ExpSum([(1.0 + 2.0j, 0.0), (-1.0, np.sqrt(2.0))])
    d = expsum_to_dict(g)
    assert d["terms"][0]["coeff"] == [1.0, 2.0]
    back = expsum_from_dict(json.loads(json_dumps(d)))
    assert back.terms == g.terms


def test_koenigs_chart_dict_roundtrip():
    f = RationalMap(Polynomial([-2.0, 0.0, 1.0]))
    chart = koenigs_chart(f, p=2.0, validity_radius=0.35)
    back = koenigs_chart_from_dict(json.loads(json_dumps(koenigs_chart_to_dict(chart))))
    assert back.p == chart.p
    assert back.multiplier == chart.multiplier
    assert back.validity_radius == chart.validity_radius
    assert back.max_depth == chart.max_depth


def test_fit_report_dict_fields():
    theta = np.linspace(0, 2 * np.pi, 40, endpoint=False)
    rep = fit_circline(PointCloud([complex(np.cos(a), np.sin(a)) for a in theta]))
    d = fit_report_to_dict(rep)
    assert set(d) >= {"circline", "rms_residual", "max_residual", "eigengap"}
    assert json.loads(json_dumps(d))["max_residual"] <= 1e-9


def test_complex_pair_layout():
    assert complex_pair(3.0 - 4.0j) == [3.0, -4.0]


def test_pgm_format(tmp_path):
    img = np.arange(12, dtype=np.uint8).reshape(3, 4)
    path = str(tmp_path / "img.pgm")
    write_pgm(path, img)
    data = open(path, "rb").read()
    assert data.startswith(b"P5\n4 3\n255\n")
    assert data[len(b"P5\n4 3\n255\n"):] == img.tobytes()
    with pytest.raises(ValueError):
        write_pgm(path, img.astype(np.int64))


def test_run_manifest_pins_output_bytes(tmp_path):
    p = str(tmp_path / "a.txt")
    atomic_write_text(p, "contents")
    m = run_manifest("julia", {"n": 5}, seed=7, outputs=[p], tool_version="0.1.0")
    assert m["outputs"][0]["path"] == "a.txt"
    assert m["outputs"][0]["sha256"] == sha256_file(p)
    assert "time" not in json_dumps(m).lower()
    # same inputs, same serialized manifest
    assert json_dumps(m) == json_dumps(
        run_manifest("julia", {"n": 5}, seed=7, outputs=[p], tool_version="0.1.0")
    )
