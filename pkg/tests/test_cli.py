import csv
import json
import re

import pytest

from pencil_lab import cli
from pencil_lab.errors import NumericError


def run(args, tmp_path, name="out.json"):
    path = tmp_path / name
    code = cli.main(list(args) + ["--json", str(path)])
    payload = json.loads(path.read_text()) if path.exists() else None
    return code, payload


def strip_timestamp(text: str) -> str:
    return re.sub(r'"generated_at": "[^"]*"', '"generated_at": "X"', text)


class TestCriteriaCommand:
    def test_monomial2_rank2_satisfied(self, tmp_path):
        code, payload = run(
            ["criteria", "--preset", "monomial:2", "--sizes", "100,200,400"],
            tmp_path,
        )
        assert code == 0
        by_kind = {c["criterion"]: c for c in payload["criteria"]}
        assert by_kind["rank2"]["verdict"] == "satisfied"
        assert by_kind["rank2"]["sign"] == "negative"

    def test_radial_rank3_satisfied(self, tmp_path):
        code, payload = run(
            ["criteria", "--preset", "radial:2:2", "--sizes", "16,20,24"],
            tmp_path,
        )
        assert code == 0
        by_kind = {c["criterion"]: c for c in payload["criteria"]}
        assert by_kind["rank3"]["verdict"] == "satisfied"
        assert by_kind["rank3"]["sign"] == "negative"

    def test_harmonic_all_inconclusive_exit_2(self, tmp_path):
        code, payload = run(
            ["criteria", "--preset", "monomial:1", "--sizes", "64,128,256"],
            tmp_path,
        )
        assert code == 2
        assert all(c["verdict"] != "satisfied" for c in payload["criteria"])

    def test_invalid_sizes_exit_3(self, tmp_path):
        code, _ = run(
            ["criteria", "--preset", "monomial:2", "--sizes", "100,50"], tmp_path
        )
        assert code == 3

    def test_unknown_preset_exit_3(self, tmp_path):
        code = cli.main(["criteria", "--preset", "bogus:9"])
        assert code == 3


class TestPencilCommand:
    def test_m2_exit_0_with_dumps(self, tmp_path):
        csv_dir = tmp_path / "dumps"
        path = tmp_path / "out.json"
        code = cli.main(
            [
                "pencil",
                "--preset",
                "monomial:2",
                "--sizes",
                "100,200",
                "--json",
                str(path),
                "--csv-dir",
                str(csv_dir),
            ]
        )
        assert code == 0
        payload = json.loads(path.read_text())
        assert payload["study"]["certified"]
        assert payload["eigenfunction"]["direct_residual"] < 1e-4
        with open(csv_dir / "eigenvalues.csv") as fh:
            rows = list(csv.DictReader(fh))
        assert any(r["certified"] == "1" for r in rows)
        with open(csv_dir / "eigenfunction.csv") as fh:
            grid_rows = list(csv.DictReader(fh))
        assert {"t", "re_f", "im_f"} == set(grid_rows[0])

    def test_m1_exit_2(self, tmp_path):
        code, payload = run(
            ["pencil", "--preset", "monomial:1", "--sizes", "100,200,400"],
            tmp_path,
        )
        assert code == 2
        assert payload["study"]["certified"] == []


class TestTracesCommand:
    def test_word_reports(self, tmp_path):
        code, payload = run(
            [
                "traces",
                "--preset",
                "monomial:1",
                "--words",
                "A,AA",
                "--sizes",
                "100,200,400",
            ],
            tmp_path,
        )
        assert code == 0
        by_word = {r["word"]: r for r in payload["reports"]}
        assert by_word["A"]["verdict"] == "no-fit"
        assert by_word["AA"]["verdict"] == "converged"
        assert by_word["AA"]["extrapolated"] == pytest.approx(
            1.2337005501361697, abs=1e-6
        )

    def test_equal_words(self, tmp_path):
        code, payload = run(
            [
                "traces",
                "--preset",
                "monomial:2",
                "--words",
                "BA,PAA",
                "--sizes",
                "60,80,100",
            ],
            tmp_path,
        )
        assert code == 0
        vals = [r["values"][-1] for r in payload["reports"]]
        assert vals[0] == pytest.approx(vals[1], rel=1e-10)

    def test_bad_word_exit_3(self, tmp_path):
        code, _ = run(
            ["traces", "--preset", "monomial:2", "--words", "QQ"], tmp_path
        )
        assert code == 3


class TestScalingCommand:
    def test_isospectral_exact(self, tmp_path):
        code, payload = run(
            [
                "scaling",
                "--preset",
                "monomial:2",
                "--gamma",
                "2.0",
                "--ell-exp",
                "2",
                "--sizes",
                "60,100",
            ],
            tmp_path,
        )
        assert code == 0
        assert payload["rel_error"] < 1e-12

    def test_gamma_one_zero(self, tmp_path):
        code, payload = run(
            [
                "scaling",
                "--preset",
                "monomial:2",
                "--gamma",
                "1.0",
                "--sizes",
                "60,100",
            ],
            tmp_path,
        )
        assert code == 0
        assert payload["rel_error"] == 0.0

    def test_fixed_basis_moderate(self, tmp_path):
        code, payload = run(
            [
                "scaling",
                "--preset",
                "monomial:2",
                "--gamma",
                "1.5",
                "--ell-exp",
                "2",
                "--mode",
                "fixed_basis",
                "--sizes",
                "200,300",
            ],
            tmp_path,
        )
        assert code == 0
        assert payload["rel_error"] < 1e-3


class TestSchattenCommand:
    def test_table_contents(self, tmp_path):
        code, payload = run(
            ["schatten", "--n", "1", "--m", "2", "--variant", "A"], tmp_path
        )
        assert code == 0
        assert payload["p_min"] == pytest.approx(0.75)
        members = {row["p"]: row["member"] for row in payload["table"]}
        assert members == {1: True, 2: True, 3: True, 4: True}

    def test_weighted_needs_ell(self, tmp_path):
        code = cli.main(["schatten", "--n", "1", "--m", "5", "--variant", "A_w"])
        assert code == 3

    def test_weighted_with_ell(self, tmp_path):
        code, payload = run(
            ["schatten", "--n", "1", "--m", "5", "--variant", "A_w", "--ell", "1"],
            tmp_path,
        )
        assert code == 0
        members = {row["p"]: row["member"] for row in payload["table"]}
        assert members[1] is True  # 2*1+1 < 5


class TestConfigAndContracts:
    def test_toml_polynomial_literal(self, tmp_path):
        cfg = tmp_path / "run.toml"
        cfg.write_text(
            """
[problem]
terms = [{exponents = [2], coeff = 1.0}]
[run]
sizes = [60, 80, 100]
"""
        )
        code, payload = run(["criteria", "--config", str(cfg)], tmp_path)
        assert code == 0
        assert payload["sizes"] == [60, 80, 100]

    def test_toml_preset_with_alpha(self, tmp_path):
        cfg = tmp_path / "run.toml"
        cfg.write_text(
            """
[problem]
preset = "monomial:2"
[run]
sizes = [60, 80, 100]
alpha = 2.5
"""
        )
        code, payload = run(
            ["traces", "--config", str(cfg), "--words", "A"], tmp_path
        )
        assert code == 0

    def test_corrupt_config_exit_3(self, tmp_path):
        cfg = tmp_path / "bad.toml"
        cfg.write_text("this is [not toml")
        assert cli.main(["criteria", "--config", str(cfg)]) == 3
        assert cli.main(["accept", "--config", str(cfg)]) == 3

    def test_missing_config_exit_3(self, tmp_path):
        assert cli.main(["criteria", "--config", str(tmp_path / "nope.toml")]) == 3

    def test_no_problem_exit_3(self):
        assert cli.main(["criteria"]) == 3

    def test_numeric_failure_exit_4(self, monkeypatch, tmp_path):
        def boom(*args, **kwargs):
            raise NumericError("synthetic failure")

        monkeypatch.setattr(cli.traces_mod, "criterion_report", boom)
        code = cli.main(
            ["criteria", "--preset", "monomial:2", "--sizes", "60,80"]
        )
        assert code == 4

    def test_json_deterministic_modulo_timestamp(self, tmp_path):
        args = ["criteria", "--preset", "monomial:2", "--sizes", "60,80,100",
                "--serial"]
        p1, p2 = tmp_path / "a.json", tmp_path / "b.json"
        assert cli.main(args + ["--json", str(p1)]) == 0
        assert cli.main(args + ["--json", str(p2)]) == 0
        assert strip_timestamp(p1.read_text()) == strip_timestamp(p2.read_text())

    def test_version_flag_exit_0(self):
        assert cli.main(["--version"]) == 0

    def test_argparse_error_mapped_to_3(self):
        assert cli.main(["criteria", "--sizes"]) == 3
        assert cli.main([]) == 3


class TestAcceptCommand:
    def test_quick_tier_exit_0(self, tmp_path):
        code, payload = run(["accept", "--quick"], tmp_path)
        assert code == 0
        assert len(payload["results"]) == 10
        assert all(r["passed"] for r in payload["results"] if r["gating"])


class TestThreadHelpers:
    def test_worker_count_env(self, monkeypatch):
        from pencil_lab._threads import worker_count

        monkeypatch.setenv("PENCIL_LAB_THREADS", "3")
        assert worker_count() == 3
        monkeypatch.setenv("PENCIL_LAB_THREADS", "0")
        assert worker_count() == 1
        monkeypatch.setenv("PENCIL_LAB_THREADS", "junk")
        assert worker_count() == 1
        assert worker_count(requested=7) == 7

    def test_map_sizes_orders_results(self, monkeypatch):
        from pencil_lab._threads import map_sizes

        monkeypatch.setenv("PENCIL_LAB_THREADS", "4")
        assert map_sizes(lambda s: s * s, [3, 1, 2]) == [9, 1, 4]
        monkeypatch.setenv("PENCIL_LAB_THREADS", "1")
        assert map_sizes(lambda s: -s, [5, 6]) == [-5, -6]
