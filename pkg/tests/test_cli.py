import csv
import json

import pytest

from catk import gallery
from catk.cli import run


@pytest.fixture
def files(tmp_path):
    out = {}
    for name in ("book", "triple_disk", "cone"):
        p = tmp_path / f"{name}.json"
        gallery.write(name, p)
        out[name] = str(p)
    return out


def _json(capsys):
    return json.loads(capsys.readouterr().out)


def test_check_exit_codes(files, capsys):
    assert run(["check", files["book"]]) == 0
    assert "pass: True" in capsys.readouterr().out
    assert run(["check", files["triple_disk"], "--report", "json"]) == 1
    doc = _json(capsys)
    assert doc["pass"] is False and len(doc["violations"]) == 24


def test_gallery_round_trip(tmp_path, capsys):
    for name in ("book", "cone", "branch"):
        p = tmp_path / f"{name}.json"
        assert run(["gallery", name, "--out", str(p)]) == 0
        capsys.readouterr()
        exp = json.loads((tmp_path / f"{name}.json.expected.json").read_text())
        assert run(["check", str(p), "--report", "json"]) == (0 if exp["cat_pass"] else 1)
        assert _json(capsys)["pass"] is exp["cat_pass"]


def test_gallery_params_and_seed(tmp_path, capsys):
    p = tmp_path / "cone.json"
    assert run(["gallery", "cone", "--param", "angle=3.0", "--param", "sectors=5", "--out", str(p)]) == 0
    exp = json.loads((tmp_path / "cone.json.expected.json").read_text())
    assert exp["params"] == {"angle": 3.0, "sectors": 5}
    q = tmp_path / "rf.json"
    assert run(["gallery", "random_flat", "--seed", "4", "--out", str(q)]) == 0
    assert json.loads((tmp_path / "rf.json.expected.json").read_text())["params"]["seed"] == 4
    assert run(["gallery", "cone", "--param", "sectors=1", "--out", str(p)]) == 2


def test_gb_named_domain(files, capsys):
    assert run(["gb", files["cone"], "--domain", "apex_disk"]) == 0
    text = capsys.readouterr().out
    assert run(["gb", files["cone"], "--domain", "apex_disk", "--report", "json"]) == 0
    doc = _json(capsys)
    assert abs(doc["residual"]) < 1e-9
    # text and json agree on printed numbers
    assert f"omega_open: {doc['omega_open']:.12g}" in text


def test_gb_inadmissible_is_input_error(files, capsys):
    assert run(["gb", files["book"], "--domain", "page0"]) == 2
    assert "NotAdmissible" in capsys.readouterr().err


def test_dist_json(files, capsys):
    assert run(["dist", files["book"], "0", "1", "--refine", "4", "--report", "json"]) == 0
    doc = _json(capsys)
    assert set(doc) == {"distance", "refine"} and doc["refine"] == 4


def test_measure_and_links(files, capsys):
    assert run(["measure", files["cone"], "--report", "json"]) == 0
    doc = _json(capsys)
    assert doc["atoms"]["0"] == pytest.approx(1.57079632679, abs=1e-11)
    assert run(["links", files["cone"], "--vertex", "0", "--report", "json"]) == 0
    (link,) = _json(capsys)["links"]
    assert link["systole"] == pytest.approx(4.71238898038, abs=1e-10)


def test_surgery_writes_table(tmp_path, capsys):
    p = tmp_path / "br.json"
    gallery.write("branch", p)
    prefix = tmp_path / "out"
    code = run(["surgery", str(p), "--vertex", "0", "--schedule", "0.2,0.1", "--domain", "tracked", "--no-distortion", "--out", str(prefix)])
    assert code == 0
    rows = list(csv.DictReader(open(f"{prefix}.csv")))
    assert [r["eps"] for r in rows] == ["0.2", "0.1"]
    assert (tmp_path / "out_eps0.2.json").exists()


def test_usage_errors(files, tmp_path, capsys, monkeypatch):
    assert run(["check", str(tmp_path / "missing.json")]) == 2
    assert run(["frobnicate"]) == 2
    assert run(["dist", files["book"], "zero", "1"]) == 2
    monkeypatch.setenv("CATK_THREADS", "lots")
    assert run(["check", files["book"]]) == 2
    monkeypatch.setenv("CATK_THREADS", "2")
    assert run(["check", files["book"]]) == 0
    assert run(["check", files["book"], "--threads", "0"]) == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run(["check", str(bad)]) == 2
