import json

import pytest

from bccop.cli import main, parse_search_spec_file

PAPER_ARGS = ["--k1", "1.0020", "--k2", "1.0500", "--k3", "1.2500"]


def run(argv):
    return main(argv)


def test_rw_table_csv_golden_rows(tmp_path):
    out = tmp_path / "rw"
    assert run(["rw-table", "--d-min", "3", "--d-max", "10", "--out", str(out)]) == 0
    lines = (out / "rw_table.csv").read_text().strip().splitlines()
    assert lines[0] == "d,nu,eps1,eps2,N,policy"
    assert len(lines) == 1 + 16
    assert "3,1,3.932160e-01,inf,500,fast" in lines
    assert "9,1,2.143604e-03,2.410377e-03,500,fast" in lines
    payload = json.loads((out / "rw_table.json").read_text())
    assert payload[0]["entries"][0]["eps2"] == "inf"
    manifest = json.loads((out / "manifest.json").read_text())
    assert set(manifest["outputs"]) == {"rw_table.csv", "rw_table.json"}


def test_rw_table_single_dimension(tmp_path):
    out = tmp_path / "one"
    assert run(["rw-table", "--d-min", "9", "--d-max", "9", "--out", str(out)]) == 0
    lines = (out / "rw_table.csv").read_text().strip().splitlines()
    assert len(lines) == 1 + 2


def test_verify_exit_codes(tmp_path):
    assert run(["verify", "--d", "9", *PAPER_ARGS, "--out", str(tmp_path / "a")]) == 0
    assert run([
        "verify", "--d", "9", "--k1", "1.00001", "--k2", "1.00001",
        "--k3", "1.00001", "--out", str(tmp_path / "b"),
    ]) == 1
    assert run(["verify", "--d", "4", *PAPER_ARGS, "--out", str(tmp_path / "c")]) == 2
    report = json.loads((tmp_path / "c" / "verify_report.json").read_text())
    assert report["verdict"] == "divergent"
    assert report["g1"] == "inf"


def test_verify_replay_mode(tmp_path):
    out = tmp_path / "replaymode"
    assert run(["verify", "--d", "9", *PAPER_ARGS, "--mode", "replay",
                "--out", str(out)]) == 0
    report = json.loads((out / "verify_report.json").read_text())
    assert (report["g1"], report["g2"], report["g3"]) == (1.0002, 1.0445, 1.2433)


def test_verify_json_flag_prints_report(tmp_path, capsys):
    run(["verify", "--d", "9", *PAPER_ARGS, "--out", str(tmp_path / "j"), "--json"])
    report = json.loads(capsys.readouterr().out)
    assert report["verdict"] == "pass"


def test_search_spec_file_formats(tmp_path):
    text = tmp_path / "spec.txt"
    text.write_text(
        "# tiny grid\n"
        "d_min = 9\nd_max = 9\n"
        "k1_lo = 1.0\nk1_hi = 1.002\nk1_n = 1\n"
        "k2_lo = 1.0\nk2_hi = 1.05\nk2_n = 1\n"
        "k3_lo = 1.0\nk3_hi = 1.25\nk3_n = 1\n"
    )
    parsed = parse_search_spec_file(text)
    assert parsed["d_min"] == 9 and parsed["k3_hi"] == 1.25
    as_json = tmp_path / "spec.json"
    as_json.write_text(json.dumps(parsed))
    assert parse_search_spec_file(as_json) == parsed
    bad = tmp_path / "bad.txt"
    bad.write_text("d_min 9\n")
    with pytest.raises(ValueError):
        parse_search_spec_file(bad)


def test_search_command(tmp_path):
    spec = tmp_path / "spec.txt"
    spec.write_text(
        "d_min: 9\nd_max: 9\n"
        "k1_lo: 1.0\nk1_hi: 1.002\nk1_n: 1\n"
        "k2_lo: 1.0\nk2_hi: 1.05\nk2_n: 1\n"
        "k3_lo: 1.0\nk3_hi: 1.25\nk3_n: 1\n"
    )
    out = tmp_path / "search"
    assert run(["search", "--spec-file", str(spec), "--out", str(out)]) == 0
    summary = json.loads((out / "search_summary.json").read_text())
    assert summary["minimal_passing_d"] == 9
    point = json.loads((out / "search_points.jsonl").read_text().splitlines()[0])
    assert point["verdict"] == "pass"
    assert point["g2"] < 1.05


def test_validate_selectors(tmp_path):
    out = tmp_path / "val"
    assert run(["validate", "--checks", "d2k", "--dim", "1", "--out", str(out)]) == 0
    row = json.loads((out / "checks.jsonl").read_text().splitlines()[0])
    assert row["name"] == "d2k_dim1"
    assert row["min_margin"] == 0.0
    assert run([
        "validate", "--checks", "green", "--points", "31",
        "--out", str(tmp_path / "g"),
    ]) == 0
    with pytest.raises(SystemExit) as info:
        run(["validate", "--checks", "bogus", "--out", str(tmp_path / "x")])
    assert info.value.code == 2


def test_validate_all_small(tmp_path):
    out = tmp_path / "all"
    code = run([
        "validate", "--checks", "all", "--points", "21", "--samples", "4096",
        "--trials", "20000", "--dd-trials", "500", "--out", str(out),
    ])
    assert code == 0
    rows = [json.loads(line) for line in (out / "checks.jsonl").read_text().splitlines()]
    assert [r["name"] for r in rows] == [
        "green_lower", "mu_bound", "d2k", "cosine_telescope", "double_derivative",
    ]
    assert all(r["passed"] for r in rows)


def test_simulate_command_with_oracle_check(tmp_path):
    out = tmp_path / "sim"
    code = run([
        "simulate", "--d", "1", "--bond-prob", "0.35", "--t-max", "4",
        "--trials", "4000", "--seed", "5", "--oracle-check", "--out", str(out),
    ])
    assert code == 0
    stats = json.loads((out / "sim_stats.json").read_text())
    assert stats["config"]["d"] == 1
    assert stats["config"]["p"] == pytest.approx(0.7)
    oracle = json.loads((out / "oracle_check.json").read_text())
    assert oracle["worst_z"] < 4.0
    assert oracle["dp_1d"]
    header = (out / "two_point.csv").read_text().splitlines()[0]
    assert header == "x1,t,estimate,stderr"


def test_simulate_requires_one_parameterization(tmp_path):
    with pytest.raises(SystemExit):
        run(["simulate", "--d", "1", "--t-max", "2", "--out", str(tmp_path / "s")])


def test_replay_reproduces_and_detects_tampering(tmp_path):
    out = tmp_path / "v"
    run(["verify", "--d", "9", *PAPER_ARGS, "--out", str(out)])
    manifest = out / "manifest.json"
    assert run(["replay", "--manifest", str(manifest)]) == 0
    data = json.loads(manifest.read_text())
    data["outputs"]["verify_report.json"] = "0" * 64
    tampered = tmp_path / "tampered.json"
    tampered.write_text(json.dumps(data))
    assert run(["replay", "--manifest", str(tampered)]) == 1


def test_replay_write_regenerates_files(tmp_path):
    out = tmp_path / "rw"
    run(["rw-table", "--d-min", "9", "--d-max", "9", "--out", str(out)])
    redo = tmp_path / "redo"
    assert run(["replay", "--manifest", str(out / "manifest.json"), "--write",
                "--out", str(redo)]) == 0
    assert (redo / "rw_table.csv").read_text() == (out / "rw_table.csv").read_text()


def test_certified_policy_flag(tmp_path):
    out = tmp_path / "cert"
    assert run(["verify", "--d", "9", *PAPER_ARGS, "--policy", "certified",
                "--out", str(out)]) == 0
    report = json.loads((out / "verify_report.json").read_text())
    assert report["policy"] == "certified"
    assert report["verdict"] == "pass"
