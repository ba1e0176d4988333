import csv
import json
import math
import subprocess
import sys

import pytest

from immaculate.cli import int_range, main, real, real_list, sweep


def read(path):
    lines = path.read_text().splitlines()
    meta = [l for l in lines if l.startswith("#")]
    rows = list(csv.reader(l for l in lines if not l.startswith("#")))
    return meta, rows[0], rows[1:]


def test_argument_types():
    assert real("sqrt(2)") == math.sqrt(2)
    assert real_list("0.5,1,2,4") == [0.5, 1.0, 2.0, 4.0]
    assert int_range("2..5") == [2, 3, 4, 5]
    assert int_range("2..40:2")[-1] == 40
    assert int_range("4,8,16") == [4, 8, 16]
    assert sweep("0,1.5,121") == (0.0, 1.5, 121)


@pytest.mark.parametrize(
    "argv",
    [
        ["fig4", "--M", "5..2"],
        ["fig6", "--alpha", "0,1,1"],
        ["fig6", "--alpha", "1,0,5"],
        ["fig6", "--g", "0.5"],
        ["fig5", "--k", "x"],
        ["fig8", "--cutoff", "5"],
        ["fig4", "--M", "1..3"],
        ["nope"],
        [],
    ],
)
def test_usage_errors_exit_2(argv, tmp_path):
    with pytest.raises(SystemExit) as exc:
        main(argv + (["--out", str(tmp_path)] if argv and argv[0] != "nope" else []))
    assert exc.value.code == 2


def test_unwritable_output_exits_3(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("")
    assert main(["fig6", "--out", str(blocker / "sub")]) == 3


def test_fig4_columns(tmp_path):
    assert main(["fig4", "--M", "2..12", "--alpha2", "0.5,1,2,4", "--out", str(tmp_path)]) == 0
    meta, header, rows = read(tmp_path / "fig4_vs_M.csv")
    assert header == ["M", "alpha2", "exact", "dense_approx", "sparse_approx"]
    assert len(rows) == 11 * 4
    cfg = json.loads(meta[1].split(":", 1)[1])
    assert cfg["M"] == list(range(2, 13)) and cfg["alpha2"] == [0.5, 1.0, 2.0, 4.0]
    assert (tmp_path / "fig4_vs_alpha2.csv").exists()


def test_fig6_columns_and_values(tmp_path):
    assert main(["fig6", "--g", "3", "--N", "9", "--out", str(tmp_path)]) == 0
    _, header, rows = read(tmp_path / "fig6.csv")
    assert header == ["alpha", "F0_ext", "p0_ext", "F_restricted", "p_restricted", "pfp", "do_nothing"]
    assert len(rows) == 121
    assert float(rows[-1][0]) == pytest.approx(4.5)
    assert float(rows[0][2]) == pytest.approx(3.0**-18, rel=1e-15)
    # F_0 drops through the transition at sqrt(N)/g = 1
    by_alpha = {round(float(r[0]), 6): float(r[1]) for r in rows}
    assert by_alpha[0.6] > 0.95
    assert by_alpha[1.35] < 0.2


@pytest.mark.parametrize(
    "cmd,files,header",
    [
        (["fig5", "--N", "4", "--g", "sqrt(2)", "--alpha", "0,3,11"], ["fig5"], ["k", "alpha", "p", "F"]),
        (
            ["fig8", "--alpha", "0,4,9"],
            ["fig8"],
            ["alpha", "snr_in", "snr_target", "snr1", "snr2", "root_p_snr1", "root_p_snr2", "p"],
        ),
        (["fig9", "--alpha", "0,4,9"], ["fig9"], ["alpha", "snrN_in", "snrN_target", "snrN_out", "root_p_snrN"]),
        (["fig7", "--alphas", "0.5,1.5", "--points", "41"], ["fig7_alpha0.5", "fig7_alpha1.5", "fig7_summary"], None),
        (["usd-table", "--alphas", "1,2", "--M", "2..4"], ["usd_table"], None),
        (["bounds", "--M", "2..3", "--alphas", "0.5"], ["bounds_mu", "bounds_two_state", "bounds_usd"], None),
        (["fig3", "--eps", "0.1,0.01", "--M", "10,20"], ["fig3_curve", "fig3_table", "fig3_fit"], None),
    ],
)
def test_subcommands_write_panels(tmp_path, cmd, files, header):
    assert main(cmd + ["--out", str(tmp_path)]) == 0
    for name in files:
        meta, head, rows = read(tmp_path / f"{name}.csv")
        assert meta[0].startswith("# immaculate")
        assert rows and all(len(r) == len(head) for r in rows)
        if header:
            assert head == header


def test_fig5_rows_sorted_by_k_then_alpha(tmp_path):
    main(["fig5", "--k", "2,0,1", "--alpha", "0,1,3", "--out", str(tmp_path)])
    _, _, rows = read(tmp_path / "fig5.csv")
    keys = [(int(r[0]), float(r[1])) for r in rows]
    assert keys == sorted(keys)


def test_cutoff_override_is_used(tmp_path):
    assert main(["fig9", "--alpha", "0,1,3", "--cutoff", "400", "--out", str(tmp_path)]) == 0
    meta, _, _ = read(tmp_path / "fig9.csv")
    assert '"cutoff": 400' in meta[1]


def test_output_is_deterministic(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for d in (a, b):
        main(["fig8", "--alpha", "0,3,13", "--out", str(d)])
        main(["fig7", "--alphas", "1.5", "--points", "31", "--out", str(d)])
    for f in a.iterdir():
        assert f.read_bytes() == (b / f.name).read_bytes()


def test_json_mirrors_csv(tmp_path):
    main(["fig6", "--alpha", "0,2,5", "--out", str(tmp_path)])
    main(["fig6", "--alpha", "0,2,5", "--format", "json", "--out", str(tmp_path)])
    _, header, rows = read(tmp_path / "fig6.csv")
    doc = json.loads((tmp_path / "fig6.json").read_text())
    assert doc["columns"] == header
    assert doc["config"]["alpha"] == [0.0, 2.0, 5]
    assert [[float(x) for x in r] for r in rows] == doc["rows"]


def test_json_encodes_nonfinite_values(tmp_path):
    main(["usd-table", "--alphas", "3", "--M", "2", "--format", "json", "--out", str(tmp_path)])
    doc = json.loads((tmp_path / "usd_table.json").read_text())
    row = dict(zip(doc["columns"], doc["rows"][0]))
    assert row["chernoff_remainder"] == "nan"


def test_environment_sets_default_output(tmp_path):
    env_dir = tmp_path / "env"
    proc = subprocess.run(
        [sys.executable, "-m", "immaculate", "fig9", "--alpha", "0,1,3"],
        env={"IMMACULATE_OUT": str(env_dir), "PATH": ""},
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0, proc.stderr
    assert (env_dir / "fig9.csv").exists()


def test_verify_passing_suites(tmp_path):
    assert main(["verify", "--suite", "usd", "--suite", "kraus", "--out", str(tmp_path)]) == 0
    report = json.loads((tmp_path / "verify_report.json").read_text())
    assert report["ok"] and [s["name"] for s in report["suites"]] == ["usd", "kraus"]


def test_verify_reports_violations(tmp_path):
    rc = main(["verify", "--suite", "quasidist", "--out", str(tmp_path)])
    report = json.loads((tmp_path / "verify_report.json").read_text())
    # the small-gain resolvability cells are genuine violations
    assert rc == 1 and not report["ok"]
    bad = report["suites"][0]["violations"]
    assert bad and all(v["check"] == "resolvability" and v["g"] < 2 for v in bad)
