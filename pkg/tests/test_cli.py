import json

import pytest

from rescan.cli import CLUSTER_HEADER, FIELD_HEADER, ORACLE_HEADER, main, read_config_file

from conftest import WELL_ZEROS

SMALL = ["--box", "0.5", "1.5", "-1.2", "-0.8", "-H", "0.1", "-n", "10"]


def _lines(path):
    return path.read_text(encoding="utf-8").splitlines()


def test_zero_potential_scan(tmp_path):
    out = tmp_path / "z"
    assert main(["scan", "--potential", "zero", *SMALL, "--out", str(out)]) == 0
    assert _lines(out / "flagged.csv") == [",".join(FIELD_HEADER)]
    assert _lines(out / "clusters.csv") == [",".join(CLUSTER_HEADER)]
    body = _lines(out / "field.csv")
    assert body[0] == ",".join(FIELD_HEADER) and len(body) == 1 + 11 * 5
    assert all(r.endswith(",0,1.0,0") for r in body[1:])
    assert b"\r" not in (out / "field.csv").read_bytes()
    man = json.loads((out / "manifest.json").read_text())
    assert man["config"]["potential"] == "zero" and "numpy" in man["versions"]


def test_missing_potential_file(tmp_path, capsys):
    code = main(["scan", "--potential-file", str(tmp_path / "nope.txt"), *SMALL, "--out", str(tmp_path)])
    assert code == 2
    assert "nope.txt" in capsys.readouterr().err


def test_box_mode_needs_box(tmp_path):
    assert main(["scan", "--out", str(tmp_path)]) == 2


def test_bad_param(tmp_path):
    assert main(["scan", *SMALL, "--param", "depht=2", "--out", str(tmp_path)]) == 2


def test_io_error(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    assert main(["scan", "--potential", "zero", *SMALL, "--out", str(blocker / "sub")]) == 4


def test_n_rounded_up(tmp_path, caplog):
    out = tmp_path / "r"
    assert main(["scan", "--potential", "zero", "-M", "1.5", *SMALL[:-2], "-n", "3", "--out", str(out)]) == 0
    man = json.loads((out / "manifest.json").read_text())
    assert (man["n_requested"], man["n_used"]) == (3, 4)
    assert "using n=4" in caplog.text


def test_config_precedence(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# comment\npotential = square_well\nparam.depth = 2\nn = 8\nbox = 0.5, 1.5, -1.2, -0.8\n"
                   "spacing = 0.1\ncutoff = 50\n")
    assert read_config_file(cfg)["param.depth"] == "2"
    out = tmp_path / "c"
    assert main(["scan", "--config", str(cfg), "-n", "12", "--out", str(out)]) == 0
    man = json.loads((out / "manifest.json").read_text())
    assert man["n_used"] == 12                       # flag beats file
    assert man["config"]["cutoff"] == 50.0           # file beats default
    assert man["config"]["params"] == {"depth": 2.0}
    bad = tmp_path / "bad.cfg"
    bad.write_text("colour = red\n")
    assert main(["scan", "--config", str(bad), "--out", str(out)]) == 2


def test_worker_count_bitwise(tmp_path):
    bodies = []
    dense = ["--box", "0.5", "1.5", "-1.2", "-0.8", "-H", "0.02", "-n", "10"]   # > one chunk
    for w in ("1", "2"):
        out = tmp_path / f"w{w}"
        assert main(["scan", *dense, "-j", w, "--out", str(out)]) == 0
        bodies.append([(out / f).read_bytes() for f in ("field.csv", "flagged.csv", "clusters.csv")])
    assert bodies[0] == bodies[1]


def test_manifest_round_trip(tmp_path):
    a = tmp_path / "a"
    assert main(["scan", "--box", "-1", "1", "-1.3", "-0.7", "-H", "0.05", "-n", "20", "--out", str(a)]) == 0
    b = tmp_path / "b"
    assert main(["scan", "--manifest", str(a / "manifest.json"), "--out", str(b)]) == 0
    for f in ("field.csv", "flagged.csv", "clusters.csv"):
        assert (a / f).read_bytes() == (b / f).read_bytes()
    assert len(_lines(a / "clusters.csv")) == 2      # the anti-bound state at -i


def test_tiles_mode_streams_every_tile(tmp_path):
    out = tmp_path / "t"
    assert main(["scan", "--mode", "tiles", "--tiles", "3", "-H", "0.1", "-n", "10", "--out", str(out)]) == 0
    man = json.loads((out / "manifest.json").read_text())
    assert man["scan"]["tiles"] == [[1, 1], [2, 1], [3, 1]]
    assert len(_lines(out / "field.csv")) - 1 == man["scan"]["points"]


def test_figure(tmp_path):
    pytest.importorskip("matplotlib")
    out = tmp_path / "f"
    assert main(["scan", *SMALL, "--figure", "--out", str(out)]) == 0
    assert (out / "field.png").stat().st_size > 1000


def test_oracle(tmp_path):
    out = tmp_path / "o"
    assert main(["oracle", "--V0", "1", "-a", "1", "--box", "-3.2", "3.2", "-2.2", "-0.02", "--out", str(out)]) == 0
    rows = _lines(out / "zeros.csv")
    assert rows[0] == ",".join(ORACLE_HEADER)
    zs = [complex(float(r.split(",")[0]), float(r.split(",")[1])) for r in rows[1:]]
    assert all(abs(z - w) < 1e-12 for z, w in zip(zs, WELL_ZEROS)) and len(zs) == 3
    assert main(["oracle", "--V0", "0", "--box", "0.1", "3", "-2", "-0.1", "--out", str(out)]) == 0
    assert _lines(out / "zeros.csv") == [",".join(ORACLE_HEADER)]
    assert main(["oracle", "--box", "-1", "1", "-1", "1", "--out", str(out)]) == 2


def test_diagnostics(tmp_path, capsys):
    out = tmp_path / "d"
    assert main(["diagnostics", "--n-list", "10", "--box", "0.5", "1", "-1", "-0.5", "--out", str(out)]) == 2
    assert main(["diagnostics", "--potential", "zero", "--n-list", "5", "10", "--box", "0.5", "1.5", "-1", "-0.5",
                 "-H", "0.1", "--out", str(out)]) == 0
    assert _lines(out / "diagnostics.csv") == ["n_prev,n,aw_distance", "5,10,0.0"]
    assert "d_AW(n=5, n=10) = 0" in (out / "report.txt").read_text()


def test_fuzz(tmp_path):
    out = tmp_path / "fz"
    assert main(["fuzz", "--trials", "100", "--seed", "3", "--out", str(out)]) == 0
    rep = json.loads((out / "fuzz.json").read_text())
    assert rep["trials"] == 100 and rep["total_violations"] == 0
