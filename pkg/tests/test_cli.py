import csv
import json

import pytest

from adiabatic_chain.cli import linear_fit, main


def run(tmp_path, *args, tag="run"):
    code = main([*args, "--out", str(tmp_path), "--tag", tag, "--quiet"])
    return code, tmp_path / f"{tag}.csv", tmp_path / f"{tag}.manifest.json"


def rows(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_gap_dimerized(tmp_path):
    code, path, manifest = run(tmp_path, "gap", "--mode", "dimerized", "--n", "4", "6", "8")
    assert code == 0
    table = rows(path)
    assert table[0] == ["N", "inv_N", "gap", "error"]
    assert [float(r[2]) for r in table[1:]] == pytest.approx([4.0] * 3, abs=1e-8)
    m = json.loads(manifest.read_text())
    assert m["command"] == "gap" and m["master_seed"] == 0 and m["outputs"]["csv"] == str(path)
    assert m["wall_clock_seconds"] >= 0 and m["code_version"]


def test_gap_uniform_reports_fit(tmp_path, capsys):
    code, path, manifest = run(tmp_path, "gap", "--n", "8", "10", "12")
    assert code == 0
    gaps = [float(r[2]) for r in rows(path)[1:]]
    assert gaps == sorted(gaps, reverse=True)
    fit = json.loads(manifest.read_text())["results"]["fit_gap_vs_inv_n"]
    assert fit["r2"] > 0.95 and fit["slope"] > 0
    assert "fit_gap_vs_inv_n" in capsys.readouterr().out


def test_gap_empty_list(tmp_path):
    code, path, _ = run(tmp_path, "gap", "--n")
    assert code == 0
    assert rows(path) == [["N", "inv_N", "gap", "error"]]


def test_gap_infeasible_row_recorded(tmp_path):
    code, path, _ = run(tmp_path, "gap", "--n", "4", "7", "30")
    assert code == 0
    table = rows(path)[1:]
    assert table[0][3] == "" and table[1][3] and table[2][3]
    assert float(table[0][2]) > 0


def test_csv_number_format(tmp_path):
    _, path, _ = run(tmp_path, "gap", "--mode", "dimerized", "--n", "6")
    raw = path.read_bytes()
    assert raw.startswith(b"N,inv_N,gap,error\r\n")
    inv = rows(path)[1][1]
    assert inv == f"{1 / 6:.12g}"


def test_prepare_clean(tmp_path):
    code, path, manifest = run(tmp_path, "prepare", "--n", "10", "--ramp-time", "2.9", "--observe-every", "10")
    assert code == 0
    table = rows(path)
    assert table[0] == ["Jt", "F_g"]
    assert float(table[-1][0]) == pytest.approx(2.9)
    assert float(table[-1][1]) >= 0.99
    assert json.loads(manifest.read_text())["results"]["fidelity_at_ramp_end"] >= 0.99


@pytest.mark.parametrize("t", ["0", "-1"])
def test_prepare_rejects_bad_ramp_time(tmp_path, t):
    code, path, manifest = run(tmp_path, "prepare", "--n", "10", "--ramp-time", t)
    assert code != 0
    assert not path.exists() and not manifest.exists()


def test_prepare_ensemble_grid(tmp_path):
    code, path, _ = run(tmp_path, "prepare", "--n", "6", "--ramp-time", "1.5", "--delta", "0.1",
                        "--eta", "0", "0.1", "--realizations", "3", "--workers", "1")
    assert code == 0
    table = rows(path)
    assert table[0][:5] == ["eta", "delta", "b_nuc", "mean", "std_error"]
    assert [r[0] for r in table[1:]] == ["0", "0.1"]
    assert all(0 < float(r[3]) <= 1 for r in table[1:])


def test_transfer_superposition_reports_peak(tmp_path):
    code, path, manifest = run(tmp_path, "transfer", "--n", "6", "--ramp-time", "6", "--payload", "superposition",
                               "--post-window", "2", "--observe-every", "5")
    assert code == 0
    res = json.loads(manifest.read_text())["results"]
    assert 6 < res["t_peak"] <= 8 and 0 <= res["f_peak"] <= 1 + 1e-12
    assert rows(path)[0] == ["Jt", "F_c"]


def test_transfer_needs_six_sites(tmp_path):
    code, _, _ = run(tmp_path, "transfer", "--n", "4", "--ramp-time", "3")
    assert code != 0


def test_tmin_table(tmp_path):
    code, path, manifest = run(tmp_path, "tmin", "--n", "6", "8", "--resolution", "0.1")
    assert code == 0
    table = rows(path)
    assert table[0] == ["N", "N2", "JT_min"]
    assert [r[1] for r in table[1:]] == ["36", "64"]
    assert "fit_tmin_vs_n2" in json.loads(manifest.read_text())["results"]


@pytest.mark.parametrize("jt, j_hz, ns", [(10.4, 0.5e9, 20.8), (10.4, 1e9, 10.4), (23.5, 0.5e9, 47.0)])
def test_timescale(tmp_path, jt, j_hz, ns):
    code, path, _ = run(tmp_path, "timescale", "--n", "20", "--j-hz", str(j_hz), "--jt-min", str(jt))
    assert code == 0
    assert float(rows(path)[1][4]) == pytest.approx(ns)


def test_timescale_rejects_nonpositive_frequency(tmp_path):
    code, _, _ = run(tmp_path, "timescale", "--j-hz", "0", "--jt-min", "2.9")
    assert code != 0


def test_emit_plot(tmp_path):
    _, path, manifest = run(tmp_path, "gap", "--n", "4", "6", "--emit-plot")
    plot = tmp_path / "run.gnuplot"
    text = plot.read_text()
    assert "set datafile separator ','" in text and path.name in text
    assert json.loads(manifest.read_text())["outputs"]["plot"] == str(plot)


def test_config_file_with_flag_override(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# preparation defaults\nn = 6\nramp-time = 1.0\nobserve_every = 1000\ndt = 0.02\n")
    code, _, manifest = run(tmp_path, "prepare", "--config", str(cfg), "--ramp-time", "1.5")
    assert code == 0
    params = json.loads(manifest.read_text())["parameters"]
    assert params["ramp_time"] == 1.5 and params["dt"] == 0.02 and params["n"] == [6]


def test_bad_config_file(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("n 6\n")
    code, _, _ = run(tmp_path, "gap", "--config", str(cfg))
    assert code != 0


def test_replay_is_byte_identical(tmp_path):
    _, path, manifest = run(tmp_path, "sweep", "--protocol", "transfer", "--n", "6", "--ramp-time", "4",
                            "--delta", "0.1", "--bnuc", "0.1", "--realizations", "3", "--workers", "1")
    assert main(["replay", str(manifest), "--tag", "again"]) == 0
    assert (tmp_path / "again.csv").read_bytes() == path.read_bytes()


def test_unknown_command_exit_code():
    assert main(["frobnicate"]) != 0


def test_linear_fit():
    fit = linear_fit([1, 2, 3], [3, 5, 7])
    assert fit["slope"] == pytest.approx(2) and fit["intercept"] == pytest.approx(1) and fit["r2"] == pytest.approx(1)
    assert linear_fit([1], [2]) == {}
