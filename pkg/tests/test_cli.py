import csv
import io
import json
import math

import pytest

from athermal.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


class TestQfiMax:
    def test_worked_qubit(self, capsys):
        code, out, _ = run(capsys, "qfi-max", "--probs", "0.5,0.5", "--energies", "0,1", "--beta", str(math.log(2)))
        assert code == 0
        table = rows(out)
        summary = table[-1]
        assert summary["record"] == "summary"
        assert float(summary["value"]) == pytest.approx(1 / 12, rel=1e-14)
        contributions = [float(r["contribution"]) for r in table[:-1]]
        assert math.fsum(contributions) == pytest.approx(1 / 12, rel=1e-12)

    def test_gibbs_input(self, capsys):
        x = math.exp(-1.0)
        code, out, _ = run(capsys, "qfi-max", "--probs", f"{1 / (1 + x)!r},{x / (1 + x)!r}", "--energies", "0,1", "--beta", "1")
        assert code == 0 and float(rows(out)[-1]["value"]) == pytest.approx(0.0, abs=1e-15)

    def test_limits_flag(self, capsys):
        code, out, _ = run(capsys, "qfi-max", "--probs", "0.75,0.25", "--energies", "0,1", "--beta", "1", "--high-low-limits")
        summary = rows(out)[-1]
        assert float(summary["low_limit"]) == 0.25 and float(summary["high_limit"]) == pytest.approx(0.25)

    def test_state_file(self, capsys, tmp_path):
        path = tmp_path / "state.txt"
        path.write_text("# energy probability\n0 0.5\n1 0.5  # excited\n")
        code, out, _ = run(capsys, "qfi-max", "--state-file", str(path), "--beta", str(math.log(2)))
        assert code == 0 and float(rows(out)[-1]["value"]) == pytest.approx(1 / 12)

    @pytest.mark.parametrize(
        "argv",
        [
            ["qfi-max", "--probs", "0.5,x", "--energies", "0,1", "--beta", "1"],
            ["qfi-max", "--probs", "0.5,0.5", "--energies", "0,1,2", "--beta", "1"],
            ["qfi-max", "--probs", "0.6,0.6", "--energies", "0,1", "--beta", "1"],
            ["qfi-max", "--probs", "0.5,0.5", "--energies", "0,1", "--beta", "-1"],
            ["qfi-max", "--probs", "0.5,0.5", "--energies", "0,1"],
            ["qfi-max", "--state-file", "/nonexistent/state.txt", "--beta", "1"],
            ["no-such-command"],
        ],
    )
    def test_usage_errors(self, capsys, argv):
        code, out, err = run(capsys, *argv)
        assert code == 2 and out == "" and err


class TestQubitSweep:
    def test_columns(self, capsys):
        code, out, _ = run(capsys, "qubit-sweep", "--temperatures", "0,0.5,1,inf", "--p1", "0:1:11")
        assert code == 0
        table = rows(out)
        assert list(table[0]) == ["p1", "T_label", "qfi_over_eps2"]
        assert {r["T_label"] for r in table} == {"0", "0.5", "1", "inf"}
        for r in table:
            if float(r["p1"]) == 1.0:
                assert float(r["qfi_over_eps2"]) == pytest.approx(1.0)
            if r["T_label"] == "inf":
                assert float(r["qfi_over_eps2"]) == pytest.approx((2 * float(r["p1"]) - 1) ** 2, abs=1e-15)

    def test_gibbs_point(self, capsys):
        x = math.exp(-2.0)
        code, out, _ = run(capsys, "qubit-sweep", "--temperatures", "0.5", "--p1", repr(x / (1 + x)))
        assert float(rows(out)[0]["qfi_over_eps2"]) == pytest.approx(0.0, abs=1e-16)


class TestCoherenceFamily:
    def test_poisson_displacement(self, capsys):
        code, out, _ = run(capsys, "coherence", "--family", "poisson", "--params", "100", "--r", "1")
        assert code == 0 and float(rows(out)[0]["C_r"]) == pytest.approx(0.5, abs=0.01)

    def test_fock_column(self, capsys):
        code, out, _ = run(capsys, "coherence", "--family", "fock", "--params", "1,2,5", "--r", "0.2,0.7")
        for r in rows(out):
            n, ratio = float(r["param"]), float(r["r"])
            assert float(r["C_r"]) == pytest.approx((1 + ratio) * n + ratio)
            assert r["witness_fired"] == "true"

    def test_tradeoff_residuals(self, capsys):
        code, out, _ = run(capsys, "tradeoff", "--family", "thermal", "--params", "0.1,0.5,0.8", "--r", "0.1,0.5,1")
        assert code == 0
        assert all(abs(float(r["residual"])) < 1e-10 for r in rows(out))

    def test_witness_columns_json(self, capsys):
        code, out, _ = run(capsys, "witness", "--family", "poisson", "--params", "2", "--r", "0.5", "--format", "json")
        data = json.loads(out)
        assert data[0]["witness_fired"] is False and data[0]["margin"] < 0
        assert set(data[0]) == {"param", "r", "C_r", "I_r", "bound_classical", "bound_all", "witness_fired", "mean_n", "margin"}

    def test_energy_scale_column(self, capsys):
        code, out, _ = run(capsys, "coherence", "--family", "fock", "--params", "1", "--r", "0.5", "--hbar-omega", "2")
        assert float(rows(out)[0]["phase_qfi"]) == pytest.approx(16.0)

    def test_uncertified_truncation_exits_3(self, capsys):
        code, out, err = run(capsys, "coherence", "--family", "custom", "--probs", "0.9", "--tail-bound", "0.1", "--r", "0.5")
        assert code == 3 and out == "" and "truncation" in err

    def test_missing_params(self, capsys):
        assert run(capsys, "coherence", "--family", "fock", "--r", "0.5")[0] == 2


class TestBathConverge:
    def test_table(self, capsys):
        code, out, _ = run(capsys, "bath-converge", "--K", "0,1,5,10,20,40", "--beta-eps", str(math.log(2)), "--p1", "0.5")
        table = rows(out)
        assert code == 0
        assert float(table[0]["finite_value"]) == 0.0
        assert float(table[1]["finite_value"]) == pytest.approx(1 / 18, rel=1e-14)
        errors = [float(r["abs_error"]) for r in table]
        assert errors == sorted(errors, reverse=True)

    def test_default_instance_converges(self, capsys):
        _, out, _ = run(capsys, "bath-converge", "--K", "40")
        assert float(rows(out)[0]["abs_error"]) < 1e-12


class TestSpectrumScan:
    def test_summary(self, capsys):
        code, out, _ = run(capsys, "spectrum-scan")
        table = rows(out)
        summary = table[-1]
        assert code == 0 and summary["record"] == "summary" and len(table) == 992
        assert float(summary["wavelength_m"]) == pytest.approx(27e-6, abs=1e-6)
        assert float(summary["coherence"]) == pytest.approx(2.72, abs=0.05)

    def test_equal_temperatures(self, capsys):
        _, out, _ = run(capsys, "spectrum-scan", "--t-background", "800", "--t-source", "800", "--points", "50")
        assert all(float(r["coherence"]) == 0.0 for r in rows(out))

    def test_byte_identical_files(self, tmp_path):
        paths = [tmp_path / "a.csv", tmp_path / "b.csv"]
        for p in paths:
            assert main(["spectrum-scan", "--seed", "4", "-o", str(p)]) == 0
        assert paths[0].read_bytes() == paths[1].read_bytes()

    def test_seventeen_digits_round_trip(self, capsys):
        _, out, _ = run(capsys, "spectrum-scan", "--points", "20")
        _, again, _ = run(capsys, "spectrum-scan", "--points", "20", "--format", "json")
        for r, j in zip(rows(out), json.loads(again)):
            assert float(r["coherence"]) == j["coherence"]

    def test_bad_temperatures(self, capsys):
        assert run(capsys, "spectrum-scan", "--t-background", "3000", "--t-source", "300")[0] == 2


def test_module_entry_point():
    import subprocess
    import sys

    done = subprocess.run(
        [sys.executable, "-m", "athermal", "bath-converge", "--K", "1", "--p1", "0.5", "--beta-eps", "0.6931471805599453"],
        capture_output=True, text=True, check=False,
    )
    assert done.returncode == 0
    assert float(rows(done.stdout)[0]["finite_value"]) == pytest.approx(1 / 18)
    bad = subprocess.run([sys.executable, "-m", "athermal", "qfi-max"], capture_output=True, text=True, check=False)
    assert bad.returncode == 2
