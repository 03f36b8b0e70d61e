"""
Pruebas de configuración de escenarios, reportes y CLI
"""
import json

import pandas as pd
import pytest

from decaylab.cli_report import (
    config_hash,
    config_to_text,
    flow_oracle_suite,
    list_catalog,
    load_config,
    parse_config_text,
    run_batch,
    run_acceptance,
    run_matrix_suite,
    run_scenario,
)
from decaylab.errors import ErrorCode, LabError
from decaylab.main import main
from decaylab.schemas import CheckName, CheckStatus, ScenarioConfig

EXPONENTIAL_CONFIG = """\
model.id=laplacian
model.n=3
state.id=exponential
grid.start=-1
grid.stop=3
grid.points=64
run.checks=simulate
run.name=exponencial
"""


def write_config(tmp_path, text, name="escenario.env"):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return path


# ========== CONFIGURACIÓN ==========
def test_parse_config():
    config = parse_config_text(EXPONENTIAL_CONFIG)
    assert config.model == "laplacian"
    assert config.model_params == {"n": 3}
    assert config.t_points == 64
    assert config.checks == [CheckName.SIMULATE]
    assert config.t_grid[0] == pytest.approx(0.1)


def test_hash_ignores_line_order():
    shuffled = "\n".join(reversed(EXPONENTIAL_CONFIG.strip().splitlines())) + "\n"
    first, second = parse_config_text(EXPONENTIAL_CONFIG), parse_config_text(shuffled)
    assert first.config_text == second.config_text
    assert config_hash(config_to_text(first)) == config_hash(config_to_text(second))


def test_config_built_in_code_has_canonical_text():
    config = ScenarioConfig(name="codigo", model="laplacian", model_params={"n": 3}, checks=[CheckName.FIT])
    parsed = parse_config_text(config_to_text(config))
    assert parsed.model_dump(exclude={"config_text"}) == config.model_dump(exclude={"config_text"})


@pytest.mark.parametrize("text", [
    "model.id=laplacian\nweather.today=sunny\n",
    "model.id=laplacian\ngrid.resolution=5\n",
    "state.id=exponential\n",
    "model.id=laplacian\ngrid.points=8\n",
    "model.id=laplacian\nrun.tol=0.5\n",
    "model.id=laplacian\nrun.checks=simulate,plot\n",
])
def test_invalid_configs(text):
    with pytest.raises(LabError) as err:
        parse_config_text(text)
    assert err.value.code == ErrorCode.CONFIG_INVALID
    assert err.value.exit_code == 2


def test_missing_config_file(tmp_path):
    with pytest.raises(LabError) as err:
        load_config(tmp_path / "no_existe.env")
    assert err.value.code == ErrorCode.IO_ERROR
    assert err.value.exit_code == 3


# ========== ESCENARIOS ==========
def test_simulate_writes_reports(tmp_path):
    report = run_scenario(parse_config_text(EXPONENTIAL_CONFIG), tmp_path)
    assert report.exit_code == 0
    assert report.checks["simulate"] == CheckStatus.PASS
    assert report.payloads["simulate"]["oracle_error"] <= 1e-8

    target = tmp_path / "exponencial"
    frame = pd.read_csv(target / "amplitudes.csv")
    assert list(frame.columns) == ["t", "re", "im", "abs", "err_est", "flag"]
    assert len(frame) == 64
    saved = json.loads((target / "report.json").read_text(encoding="utf-8"))
    assert saved["provenance"]["config_hash"] == config_hash(report_config_text())
    assert (target / "timing.json").exists()
    assert not (target / "fit.json").exists()


def report_config_text():
    return parse_config_text(EXPONENTIAL_CONFIG).config_text


def test_runs_are_byte_identical(tmp_path):
    config = parse_config_text(EXPONENTIAL_CONFIG)
    run_scenario(config, tmp_path / "a")
    run_scenario(config, tmp_path / "b")
    for name in ("amplitudes.csv", "checks.json", "report.json"):
        assert (tmp_path / "a" / "exponencial" / name).read_bytes() == (tmp_path / "b" / "exponencial" / name).read_bytes()


def test_scenario_without_checks(tmp_path):
    config = ScenarioConfig(name="vacio", model="laplacian")
    report = run_scenario(config, tmp_path)
    assert report.exit_code == 0
    assert report.checks == {}
    assert not (tmp_path / "vacio" / "amplitudes.csv").exists()


def test_counterexample_rate_is_fitted(tmp_path):
    config = ScenarioConfig(name="contraejemplo", model="homogeneous", model_params={"theta": 1.0},
                            state="power_counterexample", state_params={"theta": 0.25}, checks=[CheckName.FIT])
    report = run_scenario(config, tmp_path)
    assert report.checks["fit"] == CheckStatus.PASS
    fit = json.loads((tmp_path / "contraejemplo" / "fit.json").read_text(encoding="utf-8"))
    assert fit["exponent"] == pytest.approx(0.5, abs=0.05)
    assert fit["expected_exponent"] == pytest.approx(0.5)


def test_bounds_use_theorem_exponent(tmp_path):
    config = ScenarioConfig(name="cota", model="laplacian", model_params={"n": 3}, state="gaussian_laplacian",
                            state_params={"n": 3}, checks=[CheckName.BOUNDS])
    report = run_scenario(config, tmp_path)
    assert report.checks["bounds"] == CheckStatus.PASS
    assert report.payloads["bounds"]["theorem_tag"] == "P4.3"


def test_batch_rejects_duplicate_names(tmp_path):
    config = ScenarioConfig(name="repetido", model="laplacian")
    with pytest.raises(LabError) as err:
        run_batch([config, config], tmp_path)
    assert err.value.code == ErrorCode.CONFIG_INVALID


# ========== SUITES ==========
def test_matrix_suite_passes():
    reports = run_matrix_suite(seed=0)
    assert all(r["status"] == CheckStatus.PASS.value for r in reports.values())
    assert "commutator_obstruction" in reports


def test_flow_oracle():
    oracle = flow_oracle_suite()["flow_oracle"]
    assert oracle["status"] == CheckStatus.PASS.value
    assert oracle["relative_error"] <= 1e-10


def test_catalog_is_deterministic():
    catalog = list_catalog()
    assert catalog == list_catalog()
    assert catalog.startswith("# MODELOS\n")
    assert "P4.1 | guaranteed t^{−1}" in catalog
    assert "# COMPROBACIONES" in catalog


# ========== CLI ==========
def test_cli_catalog(capsys):
    assert main(["catalog"]) == 0
    assert "# ESTADOS" in capsys.readouterr().out


def test_cli_simulate(tmp_path, capsys):
    path = write_config(tmp_path, EXPONENTIAL_CONFIG)
    assert main(["simulate", "--config", str(path), "--out", str(tmp_path / "out")]) == 0
    assert "exponencial" in capsys.readouterr().out
    assert (tmp_path / "out" / "exponencial" / "report.json").exists()


def test_cli_tolerance_override_changes_hash(tmp_path, capsys):
    path = write_config(tmp_path, EXPONENTIAL_CONFIG)
    assert main(["simulate", "--config", str(path), "--out", str(tmp_path / "a"), "--json"]) == 0
    plain = json.loads(capsys.readouterr().out)
    assert main(["simulate", "--config", str(path), "--out", str(tmp_path / "b"), "--tol", "1e-9", "--json"]) == 0
    tighter = json.loads(capsys.readouterr().out)
    assert plain["provenance"]["config_hash"] != tighter["provenance"]["config_hash"]


def test_cli_missing_config(tmp_path, capsys):
    assert main(["check", "--config", str(tmp_path / "no_existe.env"), "--out", str(tmp_path)]) == 3
    assert "IO_ERROR" in capsys.readouterr().err


def test_cli_invalid_config(tmp_path, capsys):
    path = write_config(tmp_path, "model.id=laplacian\ngrid.points=8\n")
    assert main(["simulate", "--config", str(path), "--out", str(tmp_path)]) == 2
    assert "CONFIG_INVALID" in capsys.readouterr().err


def test_cli_matrix(tmp_path, capsys):
    assert main(["matrix", "--out", str(tmp_path)]) == 0
    saved = json.loads((tmp_path / "matrix.json").read_text(encoding="utf-8"))
    assert saved["commutator_obstruction"]["status"] == CheckStatus.PASS.value


def test_output_dir_from_environment(out_dir):
    report = run_scenario(ScenarioConfig(name="entorno", model="laplacian"))
    assert report.exit_code == 0
    assert (out_dir / "entorno" / "report.json").exists()


# ========== ACEPTACIÓN ==========
def report_tree(root):
    return {
        path.relative_to(root): path.read_bytes()
        for path in sorted(root.rglob("*"))
        if path.is_file() and path.name != "timing.json"
    }


def test_acceptance_runs_are_byte_identical(tmp_path):
    first = run_acceptance(tmp_path / "a")
    second = run_acceptance(tmp_path / "b")
    assert first["11"]["status"] == CheckStatus.PASS.value
    assert first["11"]["mismatched"] == []
    assert first["1"]["within_time"]
    assert first == second
    tree_a, tree_b = report_tree(tmp_path / "a"), report_tree(tmp_path / "b")
    assert tree_a.keys() == tree_b.keys()
    assert any(path.parts[0] == "repeticion" for path in tree_a)
    assert all(tree_a[path] == tree_b[path] for path in tree_a)
