"""Command-line interface: exit codes, file outputs, determinism."""

import json
import subprocess
import sys

from rpforge import cli


def run_cli(*args) -> tuple[int, str, str]:
    proc = subprocess.run([sys.executable, "-m", "rpforge.cli", *args],
                          capture_output=True, text=True)
    return proc.returncode, proc.stdout, proc.stderr


# ---------------------------------------------------------------------------
# generate
# ---------------------------------------------------------------------------

def test_generate_grouped(tmp_path):
    code = cli.main(["generate", "--n", "4", "--k", "2",
                     "--out", str(tmp_path)])
    assert code == 0
    data = json.loads((tmp_path / "family.json").read_text())
    assert data["n"] == 4
    assert data["groups"] == [[1, 2], [3, 4]]
    assert len(data["members"]) == 14


def test_generate_single_group(capsys):
    code = cli.main(["generate", "--n", "3", "--single-group"])
    assert code == 0
    out = capsys.readouterr().out
    assert "|V| = 7" in out


def test_generate_usage_error():
    code, _, err = run_cli("generate", "--n", "0")
    assert code == cli.EXIT_USAGE
    assert "invalid configuration" in err


def test_generate_conflicting_flags():
    code, _, _ = run_cli("generate", "--n", "4", "--k", "2", "--single-group")
    assert code == cli.EXIT_USAGE


# ---------------------------------------------------------------------------
# verify
# ---------------------------------------------------------------------------

def test_verify_good_family(tmp_path):
    cli.main(["generate", "--n", "4", "--k", "2", "--out", str(tmp_path)])
    code, out, _ = run_cli("verify", str(tmp_path / "family.json"))
    assert code == 0
    report = json.loads(out)
    assert report["singletons"]["passed"]
    assert report["exchange"]["passed"]
    assert report["witnesses_collected"]


def test_verify_missing_singleton(tmp_path):
    path = tmp_path / "family.json"
    path.write_text(json.dumps(
        {"n": 2, "groups": None, "members": [[1], [1, 2]]}))
    code, out, _ = run_cli("verify", str(path))
    assert code == cli.STAGE_EXIT["verify"]
    report = json.loads(out)
    assert report["singletons"]["violations"] == [["missing-singleton", 2]]


def test_verify_downward_closure_violation(tmp_path):
    path = tmp_path / "family.json"
    path.write_text(json.dumps(
        {"n": 3, "groups": None,
         "members": [[1], [2], [3], [1, 3], [2, 3], [1, 2, 3]]}))
    code, out, _ = run_cli("verify", str(path))
    assert code == cli.STAGE_EXIT["verify"]
    report = json.loads(out)
    assert ["not-closed", [1, 2, 3], 3] in report["downward-closed"]["violations"]


def test_verify_missing_file(tmp_path):
    code, _, err = run_cli("verify", str(tmp_path / "nope.json"))
    assert code == cli.EXIT_IO


def test_verify_larger_grouped_family(tmp_path):
    cli.main(["generate", "--n", "12", "--k", "3", "--out", str(tmp_path)])
    code, out, _ = run_cli("verify", str(tmp_path / "family.json"))
    assert code == 0
    report = json.loads(out)
    assert all(report[c]["passed"] for c in
               ("singletons", "downward-closed", "exchange"))
    assert not report["witnesses_collected"]  # 949 members > collection cap


# ---------------------------------------------------------------------------
# pipeline
# ---------------------------------------------------------------------------

def test_pipeline_n2_rp1(tmp_path, capsys):
    code = cli.main(["pipeline", "--n", "2", "--out", str(tmp_path)])
    assert code == 0
    summary = json.loads(capsys.readouterr().out)
    assert summary["verdict"] == "pass"
    assert summary["quotient"]["vertex_count"] == 3
    assert summary["homology"]["low_dim_class"] == "S^1"
    for name in ("family.json", "lattice.json", "lattice.off", "boundary_s.json",
                 "boundary_s.txt", "quotient.json", "quotient.txt",
                 "homology_z.json", "homology_z2.json", "summary.json"):
        assert (tmp_path / name).exists(), name


def test_pipeline_n3_single_rp2(capsys):
    code = cli.main(["pipeline", "--n", "3", "--single-group"])
    assert code == 0
    summary = json.loads(capsys.readouterr().out)
    assert summary["quotient"]["vertex_count"] == 7
    assert summary["homology"]["match"]
    assert summary["homology"]["low_dim_class"] == "RP^2"


def test_pipeline_n4_grouped_rp3(capsys):
    code = cli.main(["pipeline", "--n", "4", "--k", "2"])
    assert code == 0
    summary = json.loads(capsys.readouterr().out)
    assert summary["family"]["size"] == 14
    assert summary["quotient"]["vertex_count"] == 14
    dims = summary["homology"]["Z"]["dims"]
    assert dims[3] == {"d": 3, "rank": 1, "torsion": []}
    assert summary["homology"]["match"]


def test_pipeline_stage_prefix(tmp_path, capsys):
    code = cli.main(["pipeline", "--n", "4", "--k", "2", "--stage", "hull",
                     "--out", str(tmp_path)])
    assert code == 0
    summary = json.loads(capsys.readouterr().out)
    assert "hull" in summary and "triangulation" not in summary
    assert (tmp_path / "lattice.json").exists()
    assert not (tmp_path / "quotient.json").exists()


def test_pipeline_hull_limit():
    code, _, err = run_cli("pipeline", "--n", "8")
    assert code == cli.STAGE_EXIT["hull"]
    assert "exceeds the hull stage limit" in err


def test_pipeline_jobs_flag(capsys):
    code = cli.main(["pipeline", "--n", "3", "--single-group", "--jobs", "2"])
    assert code == 0
    summary = json.loads(capsys.readouterr().out)
    assert summary["verdict"] == "pass"


def test_pipeline_deterministic_output(tmp_path):
    out1, out2 = tmp_path / "a", tmp_path / "b"
    code1, _, _ = run_cli("pipeline", "--n", "3", "--k", "2", "--out", str(out1))
    code2, _, _ = run_cli("pipeline", "--n", "3", "--k", "2", "--out", str(out2))
    assert code1 == code2 == 0
    for name in ("family.json", "lattice.json", "summary.json", "quotient.txt"):
        assert (out1 / name).read_bytes() == (out2 / name).read_bytes()


def test_pipeline_text_format(capsys):
    code = cli.main(["pipeline", "--n", "2", "--format", "text"])
    assert code == 0
    out = capsys.readouterr().out
    assert "verdict: pass" in out


def test_pipeline_off_digits(tmp_path, capsys):
    code = cli.main(["pipeline", "--n", "2", "--stage", "hull",
                     "--off-digits", "5", "--out", str(tmp_path)])
    assert code == 0
    capsys.readouterr()
    off = (tmp_path / "lattice.off").read_text()
    coord_line = off.splitlines()[3]
    assert "0.70711" in coord_line or "1" in coord_line
    assert "0.707106781186547" not in off


# ---------------------------------------------------------------------------
# bound-table
# ---------------------------------------------------------------------------

def test_bound_table_json(capsys):
    code = cli.main(["bound-table", "--n-max", "6", "--format", "json"])
    assert code == 0
    rows = json.loads(capsys.readouterr().out)["rows"]
    assert rows[0] == {"n": 1, "k": 1, "s": 1, "size": 1, "bound": 2,
                       "baseline": 1, "ratio": None}
    assert rows[3]["size"] == 14 and rows[3]["bound"] == 24
    assert rows[3]["baseline"] == 15


def test_bound_table_text(capsys):
    code = cli.main(["bound-table", "--n-max", "10", "--format", "text"])
    assert code == 0
    out = capsys.readouterr().out
    assert out.splitlines()[0].split()[:3] == ["n", "k", "s"]


def test_bound_table_fixed_policy(capsys):
    code = cli.main(["bound-table", "--n-max", "8", "--k-policy", "fixed:2",
                     "--format", "json"])
    assert code == 0
    rows = json.loads(capsys.readouterr().out)["rows"]
    assert all(r["k"] == min(2, r["n"]) for r in rows)


def test_bound_table_n100_row():
    rows = cli.bound_table(100)
    row = rows[99]
    assert row["k"] == 10 and row["s"] == 10
    assert row["size"] < row["bound"]
    assert row["size"] * 10 ** 12 < (1 << 100) - 1  # vastly below the baseline
    assert 0.4 <= row["ratio"] <= 1.0


def test_pipeline_rejects_low_precision():
    code, _, err = run_cli("pipeline", "--n", "2", "--precision", "32")
    assert code == cli.EXIT_USAGE


# ---------------------------------------------------------------------------
# env-controlled logging
# ---------------------------------------------------------------------------

def test_log_env(monkeypatch, capsys):
    monkeypatch.setenv("RPFORGE_LOG", "DEBUG")
    import logging
    root = logging.getLogger()
    old = root.handlers[:]
    root.handlers.clear()
    try:
        code = cli.main(["generate", "--n", "2"])
    finally:
        root.handlers[:] = old
    assert code == 0
