import csv
import io
import json
import math
import subprocess
import sys
from fractions import Fraction

import pytest

from smalldev.cli import parse_weights, run


def invoke(capsys, *argv):
    code = run(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def invoke_json(capsys, *argv):
    code, out, err = invoke(capsys, *argv)
    return code, json.loads(out)


class TestBounds:
    def test_example(self, capsys):
        code, data = invoke_json(capsys, "bounds", "--weights", "0.6,0.4", "--delta", "0.5")
        assert code == 0
        assert data["samuels"] == pytest.approx(0.44, abs=1e-12)
        assert data["argmin_index"] == 2
        assert data["feige"] == pytest.approx(math.exp(-1), abs=1e-15)
        assert data["implication_margin"] == pytest.approx(0.44 - math.exp(-1), abs=1e-12)

    def test_rational(self, capsys):
        code, data = invoke_json(capsys, "bounds", "--weights", "3/5,2/5", "--delta", "1/10", "--mode", "rational")
        assert code == 0
        assert Fraction(data["samuels"]) == Fraction(1, 7)
        assert Fraction(data["feige"]) == Fraction(1, 7)
        assert Fraction(data["implication_margin"]) == 0

    def test_normalize_and_file(self, capsys, tmp_path):
        f = tmp_path / "w.txt"
        f.write_text("3 2\n")
        code, a = invoke_json(capsys, "bounds", "--weights", f"@{f}", "--normalize", "--delta", "0.5")
        code2, b = invoke_json(capsys, "bounds", "--weights", "0.6,0.4", "--delta", "0.5")
        assert code == code2 == 0
        assert a["samuels"] == pytest.approx(b["samuels"], abs=1e-15)

    def test_csv(self, capsys):
        code, out, _ = invoke(capsys, "bounds", "--weights", "0.5,0.3,0.2", "--delta", "0.2", "--format", "csv")
        rows = list(csv.DictReader(io.StringIO(out)))
        assert code == 0
        assert [r["index"] for r in rows] == ["1", "2", "3"]

    def test_bad_weights_exit_2(self, capsys):
        code, out, err = invoke(capsys, "bounds", "--weights", "0.6,0.5", "--delta", "0.5")
        assert code == 2
        assert "weight-sum" in err
        code, _, err = invoke(capsys, "bounds", "--weights", "0.6,0.4", "--delta", "-1")
        assert code == 2 and "nonpositive-delta" in err

    def test_missing_flag_exit_2(self, capsys):
        assert invoke(capsys, "bounds", "--weights", "1")[0] == 2


class TestChain:
    def test_all_indices(self, capsys):
        code, data = invoke_json(capsys, "chain", "--weights", "0.5,0.3,0.2", "--delta", "0.2", "--all-indices")
        assert code == 0
        assert [c["index"] for c in data["chains"]] == [1, 2, 3]

    def test_single(self, capsys):
        code, data = invoke_json(capsys, "chain", "--weights", "0.6,0.4", "--delta", "0.5")
        assert code == 0
        assert [s["label"] for s in data["step_values"]] == ["sum-identity", "phi-monotone", "concavity-min", "lemma3-floor"]

    def test_negative_tolerance_forces_exit_1(self, capsys):
        # demanding every margin exceed +1 turns any ordinary run into a reported violation
        code, _, _ = invoke(capsys, "chain", "--weights", "0.6,0.4", "--delta", "0.5", "--tolerance", "-1")
        assert code == 1


class TestPhi:
    def test_points(self, capsys):
        code, data = invoke_json(capsys, "phi", "--mu", "0,0.5", "--rho", "1", "--alpha", "1", "--t", "0,0.5")
        assert code == 0
        pts = data["points"]
        assert pts[0]["phi"] == -0.5
        assert pts[1]["phi"] == pytest.approx(2 * math.log(0.75), abs=1e-15)
        assert pts[2]["h_alpha"] == -1.0
        assert pts[3]["eta"] < 0

    def test_no_points_exit_2(self, capsys):
        assert invoke(capsys, "phi")[0] == 2

    def test_domain_error_exit_2(self, capsys):
        assert invoke(capsys, "phi", "--mu", "2", "--rho", "1")[0] == 2


def test_lemmas_default_exit_0(capsys):
    code, data = invoke_json(capsys, "lemmas")
    assert code == 0
    assert data["passed"] is True
    assert all("worst" in c for c in data["checks"])


class TestExactAndMc:
    @pytest.fixture
    def inst_file(self, tmp_path):
        data = {
            "mode": "rational",
            "weights": ["1/2", "1/2"],
            "vars": [[{"value": "0/1", "prob": "1/2"}, {"value": "2/1", "prob": "1/2"}]] * 2,
            "delta": "1/2",
        }
        p = tmp_path / "inst.json"
        p.write_text(json.dumps(data))
        return p

    def test_exact(self, capsys, inst_file):
        code, data = invoke_json(capsys, "exact", str(inst_file))
        assert code == 0
        # Z takes 0, 1, 1, 2 with equal mass; below 1.5 has mass 3/4
        assert Fraction(data["prob_below"]) == Fraction(3, 4)

    def test_exact_delta_override(self, capsys, inst_file):
        code, data = invoke_json(capsys, "exact", str(inst_file), "--delta", "2")
        assert Fraction(data["prob_below"]) == 1

    def test_budget_exit_2(self, capsys, inst_file):
        code, _, err = invoke(capsys, "exact", str(inst_file), "--budget", "1")
        assert code == 2

    def test_mc_reproducible(self, capsys, inst_file, tmp_path):
        out1, out2 = tmp_path / "a.json", tmp_path / "b.json"
        assert invoke(capsys, "mc", str(inst_file), "--samples", "20000", "--seed", "4", "--out", str(out1))[0] == 0
        assert invoke(capsys, "mc", str(inst_file), "--samples", "20000", "--seed", "4", "--out", str(out2))[0] == 0
        assert out1.read_bytes() == out2.read_bytes()
        data = json.loads(out1.read_text())
        assert abs(data["estimate"] - 0.75) <= 4 * data["half_width_95"]

    @pytest.mark.parametrize("mutate, code_name", [
        (lambda d: d["vars"][0].__setitem__(0, {"value": "1/2", "prob": "1/2"}), "mean-violation"),
        (lambda d: d.__setitem__("weights", ["1/3", "2/3"]), "weight-order"),
        (lambda d: d.__setitem__("weights", ["1/2", "1/3"]), "weight-sum"),
        (lambda d: d["vars"].pop(), "length-mismatch"),
        (lambda d: d["vars"][1].__setitem__(0, {"value": "-1/1", "prob": "1/2"}), "negative-value"),
        (lambda d: d.pop("vars"), "bad-schema"),
    ])
    def test_malformed_exit_2(self, capsys, inst_file, mutate, code_name):
        data = json.loads(inst_file.read_text())
        data["vars"] = [list(v) for v in data["vars"]]
        mutate(data)
        inst_file.write_text(json.dumps(data))
        code, _, err = invoke(capsys, "exact", str(inst_file))
        assert code == 2
        assert code_name in err

    def test_not_json_exit_2(self, capsys, tmp_path):
        p = tmp_path / "x.json"
        p.write_text("{nope")
        code, _, err = invoke(capsys, "exact", str(p))
        assert code == 2 and "bad-json" in err

    def test_missing_file_exit_2(self, capsys, tmp_path):
        assert invoke(capsys, "exact", str(tmp_path / "missing.json"))[0] == 2


class TestExtremal:
    def test_iid_example(self, capsys):
        code, data = invoke_json(capsys, "extremal", "--iid", "--n", "2", "--delta", "0.1", "--verify", "--mode", "rational")
        assert code == 0
        assert data["verify"]["prob_below"] == "36/121"
        assert data["verify"]["passed"] is True

    def test_samuels_output_feeds_exact(self, capsys, tmp_path):
        out = tmp_path / "inst.json"
        code, _, _ = invoke(capsys, "extremal", "--samuels", "2", "--weights", "1/2,3/10,1/5",
                            "--delta", "1/10", "--mode", "rational", "--out", str(out))
        assert code == 0
        code, data = invoke_json(capsys, "exact", str(out))
        assert code == 0
        # sigma_2 + delta = 9/10: (1 - 5/9)(1 - 1/3)
        assert Fraction(data["prob_below"]) == Fraction(8, 27)

    def test_verify_all(self, capsys):
        code, data = invoke_json(capsys, "extremal", "--feige", "--weights", "1/2,1/4,1/4",
                                 "--delta", "1/3", "--mode", "rational", "--verify", "--verify-all")
        assert code == 0
        assert data["verify_all"]["passed"] is True
        assert len(data["verify_all"]["rows"]) == 4

    def test_bad_index_exit_2(self, capsys):
        assert invoke(capsys, "extremal", "--samuels", "5", "--weights", "0.5,0.5", "--delta", "0.1")[0] == 2

    def test_iid_needs_n(self, capsys):
        assert invoke(capsys, "extremal", "--iid", "--delta", "0.1")[0] == 2


class TestSweepCli:
    def test_json_and_reproducible(self, capsys):
        args = ("sweep", "--count", "300", "--seed", "11", "--records")
        code, a = invoke_json(capsys, *args)
        _, b = invoke_json(capsys, *args)
        assert code == 0
        assert a == b
        assert len(a["records"]) == 300
        assert a["failures"] == []

    def test_csv_one_row_per_case(self, capsys):
        code, out, _ = invoke(capsys, "sweep", "--count", "40", "--format", "csv", "--sampler", "dirichlet-uniform")
        rows = list(csv.DictReader(io.StringIO(out)))
        assert code == 0 and len(rows) == 40
        assert "margin" in rows[0]

    def test_violation_exit_1(self, capsys):
        assert invoke(capsys, "sweep", "--count", "20", "--tolerance", "-1")[0] == 1

    def test_bad_range_exit_2(self, capsys):
        assert invoke(capsys, "sweep", "--n-min", "5", "--n-max", "2")[0] == 2


class TestSearchCli:
    def test_search(self, capsys):
        code, data = invoke_json(capsys, "search", "--weights", "0.5,0.5", "--delta", "0.1",
                                 "--restarts", "4", "--max-evals", "300")
        assert code == 0
        assert data["best_prob"] >= 1 / 6 - 1e-9
        assert len(data["runs"]) == 4

    def test_rational_rejected(self, capsys):
        assert invoke(capsys, "search", "--weights", "1/2,1/2", "--delta", "1/10", "--mode", "rational")[0] == 2

    def test_bad_coefficient(self, capsys):
        assert invoke(capsys, "search", "--weights", "1", "--delta", "1", "--expansion", "0.5")[0] == 2


def test_parse_weights_json_file(tmp_path):
    p = tmp_path / "w.json"
    p.write_text('["1/2", 0.25, 0.25]')
    assert parse_weights(f"@{p}") == ["1/2", "0.25", "0.25"]


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "smalldev", "bounds", "--weights", "1", "--delta", "1"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["samuels"] == 0.5
