import json
import shutil
import subprocess

import pytest

from chowlab.cli import ArtifactError, fmt, main, read_artifact, report


def run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def test_distance_value(capsys):
    code, out, _ = run(["distance", "--f", "liouville", "--g", "one", "--N", "20"], capsys)
    assert code == 0
    lines = out.splitlines()
    assert lines[0].startswith("# ")
    assert lines[1] == "N,distance_sq"
    assert abs(float(lines[2].split(",")[1]) - 2.9109556) <= 1e-6


def test_fmt_round_trips():
    for x in (0.1, 1 / 3, 2.9109555047635545, -1e-300):
        assert float(fmt(x)) == x
    assert fmt(7) == "7" and fmt(True) == "1"


@pytest.mark.parametrize("argv", [
    ["patterns", "--mode", "sign", "--eps", "+++", "--family", "n,n^2", "--box", "5:4",
     "--M", "100"],
    ["correlate", "--family", "n,2n", "--box", "1:3", "--M", "100"],
    ["distance", "--f", "nonsense", "--g", "one", "--N", "20"],
    ["distance", "--f", "liouville", "--N", "20"],
    ["katai", "--alpha", "0.4", "--p", "4", "--q", "3", "--N", "10"],
])
def test_validation_exit_2(argv, capsys):
    code, out, err = run(argv, capsys)
    assert code == 2
    err = json.loads(err)
    assert err["exit_code"] == 2 and err["message"]


def test_unknown_config_key(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"f": "liouville", "bogus": 1}))
    code, _, err = run(["distance", "--config", str(cfg)], capsys)
    assert code == 2 and "bogus" in err


def test_flag_beats_config(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"f": "liouville", "g": "one", "N": "30"}))
    code, out, _ = run(["distance", "--config", str(cfg), "--N", "20"], capsys)
    assert code == 0
    assert out.splitlines()[2].startswith("20,")


def test_correlate_artifacts(tmp_path, capsys):
    out = tmp_path / "c.csv"
    code, _, _ = run(["correlate", "--functions", "liouville", "--family", "n,n^2",
                      "--box", "1:5", "--M", "1e3,1e4", "--out", str(out)], capsys)
    assert code == 0
    meta, cols, rows = read_artifact(out)
    assert meta["command"] == "correlate"
    assert cols == ["n_1", "M", "re", "im", "abs"]
    assert len(rows) == 10
    summary = json.loads((tmp_path / "c.csv.summary.json").read_text())
    assert len(summary["ud_statistic"]) == 2
    assert "wall_time" in summary and "wall_time" not in out.read_text()


def test_config_round_trip_and_repeatability(tmp_path, capsys):
    first = tmp_path / "a.csv"
    argv = ["patterns", "--mode", "residue", "--moduli", "2,3,2", "--family", "n,n^2",
            "--box", "1:4", "--M", "2000,5000"]
    assert run(argv + ["--out", str(first)], capsys)[0] == 0
    meta, _, _ = read_artifact(first)
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps(meta["config"]))
    second = tmp_path / "b.csv"
    assert run(["patterns", "--config", str(cfg), "--out", str(second)], capsys)[0] == 0
    third = tmp_path / "c.csv"
    assert run(argv + ["--out", str(third)], capsys)[0] == 0
    assert first.read_bytes() == second.read_bytes() == third.read_bytes()


def test_threads_change_metadata_only(tmp_path, capsys):
    outs = []
    for th in ("1", "3"):
        p = tmp_path / f"t{th}.csv"
        run(["correlate", "--family", "n,n^2", "--box", "1:6", "--M", "3000",
             "--threads", th, "--out", str(p)], capsys)
        outs.append(read_artifact(p)[2])
    assert outs[0] == outs[1]


def test_coverage_exit_3(capsys):
    # 2^64 overflows the shift arithmetic
    code, _, err = run(["correlate", "--family", "n^64", "--box", "2:2", "--M", "10"], capsys)
    assert code == 3, err


def test_report_empty(capsys):
    code, out, _ = run(["report"], capsys)
    assert code == 0 and out == ""


def test_report_groups_kinds(tmp_path, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    run(["correlate", "--family", "n", "--box", "1:3", "--M", "100,1000", "--out", str(a)],
        capsys)
    run(["mrt", "--M", "1000", "--N", "5,10", "--out", str(b)], capsys)
    code, out, _ = run(["report", str(a), str(b)], capsys)
    assert code == 0
    assert "== correlate ==" in out and "== mrt ==" in out
    assert out.index("== correlate ==") < out.index("== mrt ==")
    assert "M=1000" in out


def test_report_malformed(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("n,value\n1,2\n")
    with pytest.raises(ArtifactError, match="metadata"):
        report([bad])
    code, _, err = run(["report", str(bad)], capsys)
    assert code == 2 and "bad.csv" in err


def test_sieve_and_eval(capsys):
    code, out, _ = run(["sieve", "--hi", "11", "--rows"], capsys)
    assert code == 0
    rows = out.splitlines()[2:]
    assert rows[-1] == "10,2,2,1,1"
    code, out, _ = run(["eval", "--f", "mobius", "--hi", "7"], capsys)
    assert [ln.split(",")[1] for ln in out.splitlines()[2:]] == ["1", "-1", "-1", "0", "-1", "1"]


@pytest.mark.skipif(shutil.which("chowlab") is None, reason="entry point not installed")
def test_console_script():
    p = subprocess.run(["chowlab", "distance", "--f", "liouville", "--g", "one", "--N", "20"],
                       capture_output=True, text=True)
    assert p.returncode == 0
    assert p.stdout.splitlines()[2] == "20,2.9109555047635545"
