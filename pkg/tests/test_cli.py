from __future__ import annotations

import json

import numpy as np
import pytest

from circum.cli import main, parse_function_spec, parse_map_spec
from circum.serialize import sha256_file


def _write_circle_csv(path, n=64):
    theta = np.linspace(0, 2 * np.pi, n, endpoint=False)
    rows = "\n".join(f"{float(np.cos(a))!r},{float(np.sin(a))!r}" for a in theta)
    path.write_text(rows + "\n")


def test_parse_map_spec_forms(tmp_path):
    f = parse_map_spec("poly:1,0,-2")  # descending powers
    assert np.allclose(f.num.coeffs, [-2.0, 0.0, 1.0])
    g = parse_map_spec("rat:1|1,0")
    assert g.den.coeffs[1] == 1.0
    h = parse_map_spec("poly:1+2i,3i,-1.5")
    assert h.num.coeffs[2] == 1.0 + 2.0j
    doc = {"num": [[-2.0, 0.0], [0.0, 0.0], [1.0, 0.0]], "den": [[1.0, 0.0]]}
    p = tmp_path / "map.json"
    p.write_text(json.dumps(doc))
    k = parse_map_spec("@" + str(p))
    assert np.allclose(k.num.coeffs, [-2.0, 0.0, 1.0])
    for bad in ("poly:", "huh:1,2", "rat:1", "poly:1,,2"):
        with pytest.raises(ValueError):
            parse_map_spec(bad)


def test_parse_function_spec_forms():
    g = parse_function_spec("expsum:1@1;-0.5@1.5")
    assert len(g.terms) == 2
    p = parse_function_spec("exceptional:1,0,1.4142,0.3")
    assert p.c1 == 1.0
    f = parse_function_spec("poly:1,0,0")
    assert f.degree == 2


def test_julia_writes_sample_and_fit(tmp_path, capsys):
    out = str(tmp_path / "j")
    code = main(["julia", "--map", "poly:1,0,0", "--n", "400", "--seed", "7",
                 "--out", out])
    assert code == 0
    fit = json.loads((tmp_path / "j.fit.json").read_text())
    assert fit["contained"] is True
    assert fit["max_residual"] < 1e-6
    man = json.loads((tmp_path / "j.manifest.json").read_text())
    assert {o["path"] for o in man["outputs"]} == {"j.csv", "j.fit.json"}
    for entry in man["outputs"]:
        assert entry["sha256"] == sha256_file(str(tmp_path / entry["path"]))
    stdout = capsys.readouterr().out
    assert json.loads(stdout)["points"] == 400


def test_julia_rerun_is_byte_identical(tmp_path, capsys):
    a, b = str(tmp_path / "a"), str(tmp_path / "b")
    for out in (a, b):
        assert main(["julia", "--map", "poly:1,0,-2", "--n", "300",
                     "--seed", "3", "--out", out]) == 0
    capsys.readouterr()
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
    assert (tmp_path / "a.fit.json").read_bytes() == (tmp_path / "b.fit.json").read_bytes()


def test_julia_error_codes(tmp_path, capsys):
    assert main(["julia", "--map", "poly:1,0", "--out", str(tmp_path / "x")]) == 2
    # z^2 + z has only a parabolic finite fixed point: nothing repelling
    assert main(["julia", "--map", "poly:1,1,0", "--out", str(tmp_path / "y")]) == 3
    capsys.readouterr()


def test_circlefit_verdict_exit_codes(tmp_path, capsys):
    circle = tmp_path / "circle.csv"
    _write_circle_csv(circle)
    assert main(["circlefit", str(circle), "--out", str(tmp_path / "c")]) == 0

    t = np.linspace(-1, 1, 201)
    parab = tmp_path / "parab.csv"
    parab.write_text("\n".join(f"{float(x)!r},{float(x * x)!r}" for x in t) + "\n")
    assert main(["circlefit", str(parab), "--out", str(tmp_path / "p")]) == 1

    empty = tmp_path / "empty.csv"
    empty.write_text("")
    assert main(["circlefit", str(empty), "--out", str(tmp_path / "e")]) == 2
    capsys.readouterr()


def test_exceptional_generic_verdict(tmp_path, capsys):
    out = str(tmp_path / "exc")
    code = main(["exceptional", "--c", "1.4142135623730951", "--b", "0.3",
                 "--a", "2", "--out", out])
    assert code == 0
    doc = json.loads((tmp_path / "exc.json").read_text())
    assert doc["verdict"] == "GenericNonReal"
    assert doc["matched_rule"] is None
    assert len(doc["nonreal_evidence"]) >= 1
    capsys.readouterr()


def test_exceptional_degenerate_is_bad_input(tmp_path, capsys):
    code = main(["exceptional", "--c", "1", "--b", "0", "--a", "2",
                 "--out", str(tmp_path / "bad")])
    assert code == 2
    capsys.readouterr()


def test_criterion_command(tmp_path, capsys):
    out = str(tmp_path / "crit")
    code = main(["criterion", "--map", "poly:1,0,-2", "--a", "-2", "--b", "2",
                 "--out", out])
    assert code == 0
    doc = json.loads((tmp_path / "crit.json").read_text())
    assert doc["verdict"] is True
    assert doc["chebyshev_conjugate"] is True
    capsys.readouterr()


def test_order_command(tmp_path, capsys):
    out = str(tmp_path / "ord")
    code = main(["order", "--function", "expsum:1@1", "--r-min", "2",
                 "--r-max", "40", "--n-radii", "12", "--out", out])
    assert code == 0
    doc = json.loads((tmp_path / "ord.json").read_text())
    assert 0.85 <= doc["order_estimate"] <= 1.15
    capsys.readouterr()


def test_render_command(tmp_path, capsys):
    out = str(tmp_path / "img")
    code = main(["render", "--map", "poly:1,0,0", "--resolution", "32",
                 "--out", out])
    assert code == 0
    data = (tmp_path / "img.pgm").read_bytes()
    assert data.startswith(b"P5\n32 32\n255\n")
    capsys.readouterr()


def test_poincare_command(tmp_path, capsys):
    out = str(tmp_path / "poin")
    code = main(["poincare", "--map", "poly:1,0,-2", "--grid", "2",
                 "--out", out])
    assert code == 0
    doc = json.loads((tmp_path / "poin.json").read_text())
    assert "chart" in doc
    capsys.readouterr()


def test_thread_cap_validation(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("CIRCUM_THREADS", "zebra")
    assert main(["criterion", "--map", "poly:1,0,-2", "--a", "-2", "--b", "2",
                 "--out", str(tmp_path / "t1")]) == 2
    monkeypatch.setenv("CIRCUM_THREADS", "0")
    assert main(["criterion", "--map", "poly:1,0,-2", "--a", "-2", "--b", "2",
                 "--out", str(tmp_path / "t2")]) == 2
    monkeypatch.setenv("CIRCUM_THREADS", "4")
    assert main(["criterion", "--map", "poly:1,0,-2", "--a", "-2", "--b", "2",
                 "--out", str(tmp_path / "t3")]) == 0
    capsys.readouterr()
