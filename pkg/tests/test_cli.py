import csv
import io
import json
import math
import subprocess
import sys

import pytest

from geoinf.cli import main
from geoinf.report import CSV_COLUMNS


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def results(capsys, *argv):
    code, out, err = run(capsys, *argv)
    assert code == 0, err
    return json.loads(out)


def test_influence_maj3(capsys):
    payload = results(capsys, "influence", "--cube", "maj3", "--i", "1")
    assert payload["command"] == "influence"
    assert payload["results"][0]["value"] == 0.5
    assert payload["config"]["n_samples"] == 200000 and "threads" not in payload["config"]


def test_check_dictator(capsys):
    payload = results(capsys, "check", "--theorem", "talagrand_discrete", "--cube", "dictator")
    r = payload["results"][0]
    assert (r["lhs"], r["rhs0"], r["ratio"]) == (0.25, 1.0, 0.25)


def test_eta_both_directions(capsys):
    assert results(capsys, "eta", "--rho", "0.5")["results"][0]["eta"] == pytest.approx(1 / 3, abs=1e-10)
    assert results(capsys, "eta", "--eta", "0.3333333333333333")["results"][0]["rho"] == \
        pytest.approx(0.5, abs=1e-8)


def test_geo_influence_exact_and_mc(capsys):
    payload = results(capsys, "geo-influence", "--set", "halfspace:1:4", "--i", "1", "--samples", "20000")
    exact, mc = payload["results"]
    assert exact["method"] == "exact" and mc["method"] == "mc"
    assert exact["value"] == pytest.approx(0.1209853622, abs=1e-10)
    assert abs(mc["value"] - exact["value"]) < 4 * mc["std_error"]


def test_fourier_parity(capsys):
    payload = results(capsys, "fourier", "--cube", "parity:3")
    # 0/1 indicator of an odd number of -1 entries: 1/2 - chi_123 / 2 up to the sign convention
    assert [r["subset"] for r in payload["results"]] == [[], [1, 2, 3]]
    assert [abs(r["value"]) for r in payload["results"]] == [0.5, 0.5]


def test_lift_and_reduce(capsys):
    rows = results(capsys, "lift", "--m", "64,256")["results"]
    assert rows[1]["rel_error"] < rows[0]["rel_error"]
    red = results(capsys, "reduce", "--cube", "maj3", "--alpha", "0.3", "--samples", "2000")["results"]
    assert red[0]["value"] == pytest.approx(red[1]["value"], abs=1e-12)


def test_gauss_noise_and_noise(capsys):
    g = results(capsys, "gauss-noise", "--set", "quadrant:2", "--rho", "0.5", "--samples", "20000")["results"]
    assert abs(g[1]["value"] - g[0]["value"]) < 4 * g[1]["std_error"]
    n = results(capsys, "noise", "--cube", "maj3", "--eta", "0.5")["results"]
    assert n[0]["value"] == 13 / 128


def test_csv_has_fixed_columns(capsys):
    code, out, _ = run(capsys, "sweep", "--theorem", "bks_discrete", "--count", "3", "--format", "csv")
    assert code == 0
    rows = list(csv.reader(io.StringIO(out)))
    assert tuple(rows[0]) == CSV_COLUMNS and len(rows) == 4


def test_generic_csv(capsys):
    code, out, _ = run(capsys, "influence", "--cube", "maj3", "--format", "csv")
    assert code == 0 and out.splitlines()[0].startswith("quantity")


@pytest.mark.parametrize("argv", [
    ["influence", "--cube", "tribes:5:5"],
    ["influence", "--cube", "nonsense"],
    ["noise", "--cube", "maj3", "--eta", "1.5"],
    ["check", "--theorem", "bogus", "--cube", "maj3"],
    ["check", "--theorem", "bks_gaussian", "--set", "quadrant:2"],
    ["sweep", "--theorem", "bogus"],
    ["eta"],
    ["check", "--theorem", "talagrand_discrete", "--cube", "parity:3"],
])
def test_errors_exit_two(capsys, argv):
    code, out, err = run(capsys, *argv)
    assert code == 2 and out == "" and "error" in err


def test_argparse_errors_exit_two(capsys):
    assert run(capsys, "influence", "--seed", "-1")[0] == 2
    assert run(capsys, "nonexistent")[0] == 2


def test_table_file(tmp_path, capsys):
    p = tmp_path / "f.txt"
    p.write_text("0\n0\n0\n1\n")
    payload = results(capsys, "influence", "--cube", str(p))
    assert [r["value"] for r in payload["results"]] == [0.5, 0.5]
    p.write_text("0\n1\n1\n")
    assert run(capsys, "influence", "--cube", str(p))[0] == 2


def test_out_file_and_byte_identical_reruns(tmp_path, capsys):
    argv = ["sweep", "--theorem", "talagrand_gaussian", "--count", "8", "--samples", "3000", "--seed", "9"]
    a, b, c = tmp_path / "a.json", tmp_path / "b.json", tmp_path / "c.json"
    assert main(argv + ["--out", str(a)]) == 0
    assert main(argv + ["--out", str(b)]) == 0
    assert main(argv + ["--out", str(c), "--threads", "3"]) == 0
    assert a.read_bytes() == b.read_bytes() == c.read_bytes()
    assert json.loads(a.read_text())["summary"]["failures"] == 0


def test_console_script_entry_point():
    proc = subprocess.run([sys.executable, "-m", "geoinf.cli", "eta", "--rho", "0.5"],
                          capture_output=True, text=True, check=True)
    assert math.isclose(json.loads(proc.stdout)["results"][0]["eta"], 1 / 3, abs_tol=1e-10)
