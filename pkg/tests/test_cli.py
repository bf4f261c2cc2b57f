import json
import subprocess
import sys

import pytest

from alpha_lab import cli


def run(*args, capsys=None):
    code = cli.main(list(args))
    out = capsys.readouterr() if capsys else None
    return code, out


def test_cusp_default(capsys):
    code, out = run("cusp", "--no-timestamp", capsys=capsys)
    rep = json.loads(out.out)
    assert code == 0 and rep["orders"] == [2, 3] and rep["lead2"] == "-66" and rep["lead3"] == "-440"


@pytest.mark.parametrize("n", [3, 10])
def test_cusp_truncations(capsys, n):
    code, out = run("cusp", "-N", str(n), "--no-timestamp", capsys=capsys)
    assert code == 0 and json.loads(out.out)["orders"] == [2, 3]


def test_cusp_bad_order(capsys):
    assert run("cusp", "-N", "2", capsys=capsys)[0] == 2


def test_orbit_trials_zero(capsys):
    code, out = run("orbit", "--trials", "0", "--no-timestamp", capsys=capsys)
    rep = json.loads(out.out)
    assert code == 0 and rep["invariance"]["fixed"] == 60 and rep["stabilizer_probe"]["trials"] == 0


def test_orbit_is_byte_identical(capsys):
    _, a = run("orbit", "--trials", "10", "--seed", "4", "--no-timestamp", capsys=capsys)
    _, b = run("orbit", "--trials", "10", "--seed", "4", "--no-timestamp", capsys=capsys)
    assert a.out == b.out


def test_timestamp_present_by_default(capsys):
    _, out = run("cusp", capsys=capsys)
    assert "generated_at" in json.loads(out.out)


def test_seed_from_environment(capsys, monkeypatch):
    monkeypatch.setenv(cli.SEED_ENV, "9")
    _, a = run("orbit", "--trials", "5", "--no-timestamp", capsys=capsys)
    monkeypatch.delenv(cli.SEED_ENV)
    _, b = run("orbit", "--trials", "5", "--seed", "9", "--no-timestamp", capsys=capsys)
    assert a.out == b.out
    monkeypatch.setenv(cli.SEED_ENV, "nope")
    assert run("orbit", "--trials", "0", capsys=capsys)[0] == 2


def test_lct_monomial_converges(capsys):
    code, out = run("lct", "--preset", "monomial:2,2", "--beta", "0.5", "--samples", "20000",
                    "--no-timestamp", capsys=capsys)
    rep = json.loads(out.out)
    assert code == 0 and rep["status"] == "converged"


def test_lct_divergence_exits_one_with_flag(capsys):
    code, out = run("lct", "--preset", "cusp23", "--beta", "0.9", "-R", "6", "--samples", "20000",
                    "--expect-divergent", "--no-timestamp", capsys=capsys)
    rep = json.loads(out.out)
    assert code == 1 and rep["status"] == "divergent" and rep["expected_divergent"] is True


@pytest.mark.parametrize("args", [
    ["lct", "--preset", "cusp99", "--beta", "0.5"],
    ["lct", "--weights", "4,2", "--degree", "6", "--beta", "0.5"],
    ["lct", "--weights", "3,2", "--beta", "0.5"],
    ["lct", "--preset", "cusp23"],
    ["lct", "--preset", "cusp23", "--beta", "-0.5"],
    ["reproduce", "--tol", "threshold=-1"],
    ["reproduce", "--tol", "threshold=abc"],
    ["reproduce", "--tol", "unknown=1"],
    ["toric", "--polytope", "/nonexistent.json"],
])
def test_usage_errors_exit_two(capsys, args):
    assert run(*args, capsys=capsys)[0] == 2


def test_argparse_errors_exit_two(capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main(["green", "--resolution", "abc"])
    assert exc.value.code == 2


def test_lct_csv_and_figures(tmp_path, capsys):
    csv_path = tmp_path / "a.csv"
    code, _ = run("lct", "--weights", "3,2", "--degree", "6", "--sweep", "0.2,0.4", "--samples", "5000",
                  "--csv", str(csv_path), "--figures", str(tmp_path / "figs"), "--no-timestamp", capsys=capsys)
    assert code == 0
    lines = csv_path.read_text().splitlines()
    assert lines[0] == "beta,r,mean,stderr,ratio_z" and len(lines) == 9
    assert (tmp_path / "figs" / "beta_0.2" / "lct_annuli.png").stat().st_size > 0


def test_green(capsys, tmp_path):
    code, out = run("green", "--resolution", "64", "--c", "6", "--trials", "5", "--no-timestamp",
                    "--figures", str(tmp_path), capsys=capsys)
    rep = json.loads(out.out)
    assert code == 0 and rep["held"] == 5
    assert (tmp_path / "green_kernel.png").exists()


def test_toric_hexagon_file(tmp_path, capsys):
    path = tmp_path / "hexagon.json"
    path.write_text(json.dumps({"dimension": 2, "vertices": [[1, 0], [0, 1], [-1, 1], [-1, 0], [0, -1], [1, -1]]}))
    code, out = run("toric", "--polytope", str(path), "--trials", "5", "--samples", "500", "--no-timestamp",
                    capsys=capsys)
    rep = json.loads(out.out)
    assert code == 0 and rep["symmetry"]["order"] == 12 and rep["symmetry"]["fixed_point_unique"]


def test_toric_non_unique_fixed_point(tmp_path, capsys):
    path = tmp_path / "square.json"
    path.write_text(json.dumps({"dimension": 2, "vertices": [[0, 0], [1, 0], [0, 1], [1, 1]]}))
    assert run("toric", "--polytope", str(path), "--no-timestamp", capsys=capsys)[0] == 2


def test_hyperbolic_small(capsys):
    code, out = run("hyperbolic", "--functions", "2", "--points", "50", "--no-timestamp", capsys=capsys)
    rep = json.loads(out.out)
    assert code == 0 and rep["fixed_point"]["passed"] == 2


def test_output_file(tmp_path, capsys):
    path = tmp_path / "r.json"
    code, out = run("cusp", "--output", str(path), "--no-timestamp", capsys=capsys)
    assert code == 0 and out.out == ""
    assert json.loads(path.read_text())["pass"] is True


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "alpha_lab.cli", "cusp", "--no-timestamp"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and json.loads(proc.stdout)["orders"] == [2, 3]


def test_reproduce_json_and_failure_naming(monkeypatch, capsys):
    from alpha_lab import acceptance

    def broken(seed=0, tol=None):
        return acceptance.CheckResult(99, "deliberately broken", "nowhere", False)

    monkeypatch.setattr(acceptance, "CHECKS", [acceptance.check_cusp, acceptance.check_toric])
    code, out = run("reproduce", "--json", "--no-timestamp", capsys=capsys)
    rep = json.loads(out.out)
    assert code == 0 and rep["pass"] and [c["number"] for c in rep["checks"]] == [5, 12]
    assert all("seconds" not in c for c in rep["checks"])

    monkeypatch.setattr(acceptance, "CHECKS", [acceptance.check_cusp, broken])
    code, out = run("reproduce", capsys=capsys)
    assert code == 1
    assert "[PASS]  5. cusp certificate" in out.out
    assert "deliberately broken" in out.err
