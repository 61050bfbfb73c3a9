import json

import pytest
from click.testing import CliRunner

from dtameta.cli import main


@pytest.fixture()
def runner():
    return CliRunner()


FIT_ARGS = [
    "fit", "--builtin", "telomerase", "--model-type", "1",
    "--var-prior", "pc", "--var-par", "3,0.05",
    "--var2-prior", "pc", "--var2-par", "3,0.05",
    "--cor-prior", "normal", "--cor-par", "0,5",
    "--nsample", "1500", "--seed", "11",
]


@pytest.fixture(scope="module")
def fit_file(tmp_path_factory):
    path = tmp_path_factory.mktemp("cli") / "fit.json"
    result = CliRunner().invoke(main, FIT_ARGS + ["--out", str(path)])
    assert result.exit_code == 0, result.output
    return path


class TestFit:
    def test_summary_block(self, fit_file):
        result = CliRunner().invoke(main, FIT_ARGS + ["--out", str(fit_file)])
        assert result.exit_code == 0
        assert "Fixed effects:" in result.output
        assert "Model hyperpar:" in result.output
        assert "mean(Se)" in result.output
        assert "Marginal log-likelihood:" in result.output
        assert "Variable names for marginal plotting:" in result.output
        mu_line = next(l for l in result.output.splitlines() if l.startswith("mu "))
        assert abs(float(mu_line.split()[1]) - 1.179) < 0.05

    def test_json_contents(self, fit_file):
        doc = json.loads(fit_file.read_text())
        assert doc["model"]["model_type"] == 1
        assert doc["timings"] is None
        assert abs(doc["mlik"] + 65.05) < 1.0
        assert doc["fixed"][0]["name"] == "mu"
        assert "0.025" in doc["fixed"][0]["quantiles"]

    def test_seed_reproducibility(self, runner, tmp_path):
        out1, out2 = tmp_path / "a.json", tmp_path / "b.json"
        args = FIT_ARGS[:]
        args[args.index("--nsample") + 1] = "400"
        r1 = runner.invoke(main, args + ["--out", str(out1)])
        r2 = runner.invoke(main, args + ["--out", str(out2)])
        assert r1.exit_code == r2.exit_code == 0
        assert out1.read_bytes() == out2.read_bytes()

    def test_validation_error_exit_2(self, runner, tmp_path):
        bad = tmp_path / "bad.csv"
        bad.write_text("TP,FP,TN,FN\n-1,2,3,4\n")
        result = runner.invoke(main, ["fit", "--data", str(bad)])
        assert result.exit_code == 2

    def test_modality_absent_exit_2(self, runner):
        result = runner.invoke(
            main, ["fit", "--builtin", "telomerase", "--modality", "type"]
        )
        assert result.exit_code == 2

    def test_infeasible_prior_exit_2(self, runner):
        result = runner.invoke(
            main,
            ["fit", "--builtin", "telomerase", "--cor-prior", "pc",
             "--cor-par", "1,-0.2,0.4,-0.8,0.6,_,_", "--nsample", "100"],
        )
        assert result.exit_code == 2
        assert "infeasible" in result.output

    def test_requires_one_data_source(self, runner):
        assert runner.invoke(main, ["fit"]).exit_code == 2

    def test_invwishart_flag(self, runner, tmp_path):
        out = tmp_path / "w.json"
        result = runner.invoke(
            main,
            ["fit", "--builtin", "telomerase", "--cor-prior", "invwishart",
             "--wishart-par", "4,1,1,0", "--nsample", "300", "--out", str(out)],
        )
        assert result.exit_code == 0, result.output
        doc = json.loads(out.read_text())
        assert doc["priors"] == {"wishart.par": [4.0, 1.0, 1.0, 0.0]}


class TestSavedFitCommands:
    def test_summary(self, runner, fit_file):
        result = runner.invoke(main, ["summary", "--fit", str(fit_file)])
        assert result.exit_code == 0
        assert "Model hyperpar:" in result.output
        assert "var_phi" in result.output

    def test_fitted_table(self, runner, fit_file):
        result = runner.invoke(main, ["fitted", "--fit", str(fit_file), "--accuracy-type", "TPR"])
        assert result.exit_code == 0
        lines = result.output.splitlines()
        assert lines[0].startswith("Diagnostic accuracies true positive rate")
        assert lines[2].split()[0] == "Ito_1998"

    def test_fitted_csv(self, runner, fit_file, tmp_path):
        out = tmp_path / "tpr.csv"
        result = runner.invoke(
            main,
            ["fitted", "--fit", str(fit_file), "--accuracy-type", "TPR", "--out", str(out)],
        )
        assert result.exit_code == 0
        lines = out.read_text().splitlines()
        assert lines[0].startswith("studyname,mean,sd")
        assert lines[1].split(",")[0] == "Ito_1998"

    def test_sroc_svg(self, runner, fit_file, tmp_path):
        out = tmp_path / "sroc.svg"
        result = runner.invoke(main, ["sroc", "--fit", str(fit_file), "--out", str(out)])
        assert result.exit_code == 0
        payload = out.read_text()
        assert payload.startswith("<?xml") and "Sensitivity" in payload

    def test_forest_svg(self, runner, fit_file, tmp_path):
        out = tmp_path / "forest.svg"
        result = runner.invoke(
            main,
            ["forest", "--fit", str(fit_file), "--accuracy-type", "sens",
             "--cut", "0.4,1", "--out", str(out)],
        )
        assert result.exit_code == 0
        assert "Ito_1998" in out.read_text()

    def test_crosshair_svg(self, runner, fit_file, tmp_path):
        out = tmp_path / "cross.svg"
        result = runner.invoke(main, ["crosshair", "--fit", str(fit_file), "--out", str(out)])
        assert result.exit_code == 0
        assert out.exists()

    def test_modality_covariate_round_trip(self, runner, tmp_path):
        csv = tmp_path / "cath.csv"
        rows = ["studynames,type,prevalence,TP,FP,TN,FN"]
        for i, level in enumerate(["Semi-quantitative"] * 4 + ["Quantitative"] * 4):
            rows.append(f"s{i},{level},{3.0 + i},{10 + i},{2 + i},{20 + i},{3 + i}")
        csv.write_text("\n".join(rows) + "\n")
        fit_path = tmp_path / "cath.json"
        result = runner.invoke(
            main,
            ["fit", "--data", str(csv), "--model-type", "2", "--modality", "type",
             "--covariates", "prevalence", "--quantiles", "0.125,0.875",
             "--nsample", "400", "--seed", "7", "--out", str(fit_path)],
        )
        assert result.exit_code == 0, result.output
        assert "alpha.prevalence" in result.output
        out = tmp_path / "ldor.svg"
        result = runner.invoke(
            main,
            ["forest", "--fit", str(fit_path), "--accuracy-type", "LDOR",
             "--est-type", "median", "--intervals", "0.125,0.875", "--out", str(out)],
        )
        assert result.exit_code == 0, result.output
        assert out.exists()
        sroc_out = tmp_path / "walter.svg"
        result = runner.invoke(
            main, ["sroc", "--fit", str(fit_path), "--out", str(sroc_out)]
        )
        assert result.exit_code == 0, result.output

    def test_svg_determinism(self, runner, fit_file, tmp_path):
        a, b = tmp_path / "a.svg", tmp_path / "b.svg"
        for out in (a, b):
            assert runner.invoke(
                main, ["sroc", "--fit", str(fit_file), "--out", str(out)]
            ).exit_code == 0
        assert a.read_bytes() == b.read_bytes()


class TestPriorPreview:
    def test_variance_table(self, runner):
        result = runner.invoke(
            main, ["prior-preview", "--var-prior", "pc", "--var-par", "1,0.05"]
        )
        assert result.exit_code == 0
        doc = json.loads(result.output)
        assert len(doc["x"]) == 401
        dens = doc["density"]
        assert all(b < a for a, b in zip(dens, dens[1:]))  # decreasing

    def test_correlation_interior_mode(self, runner):
        result = runner.invoke(
            main,
            ["prior-preview", "--cor-prior", "pc", "--cor-par", "3,-0.2,_,-0.8,0.1,0.8,0.1"],
        )
        assert result.exit_code == 0
        doc = json.loads(result.output)
        xs, dens = doc["x"], doc["density"]
        interior = [(x, d) for x, d in zip(xs, dens) if abs(x) <= 0.9]
        mode_x = max(interior, key=lambda t: t[1])[0]
        assert abs(mode_x - (-0.2)) < 0.01

    def test_csv_output(self, runner, tmp_path):
        out = tmp_path / "prior.csv"
        result = runner.invoke(
            main,
            ["prior-preview", "--var-prior", "unif", "--var-par", "0,2", "--out", str(out)],
        )
        assert result.exit_code == 0
        assert out.read_text().splitlines()[0] == "x,density"

    def test_infeasible_exit_2(self, runner):
        result = runner.invoke(
            main, ["prior-preview", "--cor-prior", "pc", "--cor-par", "1,-0.2,0.4,-0.8,0.6,_,_"]
        )
        assert result.exit_code == 2


class TestMisc:
    def test_help_lists_subcommands(self, runner):
        result = runner.invoke(main, ["--help"])
        assert result.exit_code == 0
        for sub in ("fit", "summary", "fitted", "forest", "sroc", "crosshair",
                    "prior-preview", "datasets", "serve"):
            assert sub in result.output

    def test_fit_help_lists_flags(self, runner):
        result = runner.invoke(main, ["fit", "--help"])
        assert result.exit_code == 0
        for flag in ("--model-type", "--link", "--var-prior", "--var-par", "--cor-prior",
                     "--cor-par", "--nsample", "--seed", "--quantiles", "--modality",
                     "--covariates", "--wishart-par", "--threads", "--out"):
            assert flag in result.output

    def test_unknown_flag_exit_2(self, runner):
        assert runner.invoke(main, ["fit", "--frobnicate"]).exit_code == 2

    def test_datasets_listing(self, runner):
        result = runner.invoke(main, ["datasets"])
        assert result.exit_code == 0
        assert "telomerase: 10 studies" in result.output

    def test_datasets_dump(self, runner):
        result = runner.invoke(main, ["datasets", "--dump", "telomerase"])
        assert result.exit_code == 0
        assert result.output.startswith("studynames,TP,FP,TN,FN")
