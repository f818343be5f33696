import numpy as np
import orjson
import pandas as pd
import pytest

from src.adapters.model_store import model_to_document, save_document, save_fitted, save_model
from src.domain.schemas import AffineMap
from src.infra.settings import get_settings
from src.main import main
from src.services.forecaster import FittedForecaster
from src.services.hypernet import init_conditioning_net
from tests.factories import random_model, small_arch, uniform_model


def _write_uniform_csv(path, n: int, seed: int = 0, header=("y1", "y2")) -> None:
    values = np.random.default_rng(seed).uniform(size=(n, len(header)))
    pd.DataFrame(values, columns=list(header)).to_csv(path, index=False)


def _train_config(tmp_path, data: str = "data.csv") -> str:
    config = {
        "data": {"path": data, "target_columns": ["y1", "y2"],
                 "bounds": [{"lower": 0.0, "upper": 1.0}, {"lower": 0.0, "upper": 1.0}]},
        "architecture": {"marginals": [{"hidden": [4]}]},
        "training": {"learning_rate": 0.01, "batch_size": 32, "max_epochs": 2, "seed": 0},
        "output": {"model": "out/model.json", "report": "out/report.csv", "checkpoint": "out/ckpt.json"},
    }
    path = tmp_path / "config.json"
    path.write_bytes(orjson.dumps(config))
    return str(path)


def test_train_writes_model_report_and_checkpoint(tmp_path, capsys):
    _write_uniform_csv(tmp_path / "data.csv", 200)
    assert main(["train", "--config", _train_config(tmp_path), "--quiet"]) == 0
    assert (tmp_path / "out" / "model.json").exists()
    assert (tmp_path / "out" / "ckpt.json").exists()
    report = pd.read_csv(tmp_path / "out" / "report.csv")
    assert list(report.columns) == ["epoch", "train_nll", "val_nll"]
    assert len(report) == 2
    assert "best_validation_nll=" in capsys.readouterr().out


def test_train_report_is_reproducible(tmp_path):
    _write_uniform_csv(tmp_path / "data.csv", 200)
    config = _train_config(tmp_path)
    assert main(["train", "--config", config, "--quiet"]) == 0
    first = (tmp_path / "out" / "report.csv").read_text()
    assert main(["train", "--config", config, "--quiet"]) == 0
    assert (tmp_path / "out" / "report.csv").read_text() == first


def test_train_then_evaluate_and_verify(tmp_path):
    _write_uniform_csv(tmp_path / "data.csv", 200)
    _write_uniform_csv(tmp_path / "test.csv", 40, seed=1)
    model = str(tmp_path / "trained.json")
    assert main(["train", "--config", _train_config(tmp_path), "--out", model, "--quiet"]) == 0
    assert main(["evaluate", "--model", model, "--data", str(tmp_path / "test.csv"),
                 "--out", str(tmp_path / "metrics.json"), "--m-samples", "20", "--quiet"]) == 0
    metrics = orjson.loads((tmp_path / "metrics.json").read_bytes())
    assert metrics["n_evaluated"] == 40
    assert main(["verify", "--model", model, "--quiet"]) == 0


def test_missing_data_file_is_a_usage_error(tmp_path):
    assert main(["train", "--config", _train_config(tmp_path, data="nope.csv"), "--quiet"]) == 2
    assert main(["train", "--config", str(tmp_path / "missing.json"), "--quiet"]) == 2


def test_evaluate_static_model_with_pit(tmp_path):
    model = tmp_path / "uniform.json"
    save_model(str(model), uniform_model(2, [0.3]))
    _write_uniform_csv(tmp_path / "test.csv", 30)
    assert main(["evaluate", "--model", str(model), "--data", str(tmp_path / "test.csv"),
                 "--out", str(tmp_path / "metrics.json"), "--pit-out", str(tmp_path / "pit.csv"),
                 "--m-samples", "20", "--quiet"]) == 0
    pit = pd.read_csv(tmp_path / "pit.csv")
    assert list(pit.columns) == ["pit_y1", "pit_y2"]
    np.testing.assert_allclose(pit["pit_y1"], pd.read_csv(tmp_path / "test.csv")["y1"], atol=1e-12)


def test_empty_test_set_is_a_usage_error(tmp_path):
    model = tmp_path / "uniform.json"
    save_model(str(model), uniform_model(2))
    (tmp_path / "empty.csv").write_text("y1,y2\n")
    assert main(["evaluate", "--model", str(model), "--data", str(tmp_path / "empty.csv"),
                 "--out", str(tmp_path / "metrics.json"), "--quiet"]) == 2


def test_density_of_uniform_model_is_one(tmp_path):
    model = tmp_path / "uniform.json"
    save_model(str(model), uniform_model(2))
    out = tmp_path / "grid.csv"
    assert main(["density", "--model", str(model), "--grid", "11", "--out", str(out), "--quiet"]) == 0
    grid = pd.read_csv(out)
    assert len(grid) == 121
    np.testing.assert_allclose(grid["pdf"], 1.0, atol=1e-12)


def test_density_grid_integrates_to_one(tmp_path):
    model_obj = random_model(2, np.random.default_rng(6), raw_scale=0.5)
    model = tmp_path / "model.json"
    save_model(str(model), model_obj)
    out = tmp_path / "grid.csv"
    assert main(["density", "--model", str(model), "--grid", "64", "--out", str(out), "--quiet"]) == 0
    cell = np.prod((model_obj.upper - model_obj.lower) / 64)
    assert pd.read_csv(out)["pdf"].sum() * cell == pytest.approx(1.0, abs=0.02)


def test_density_with_fixed_dimension(tmp_path):
    model = tmp_path / "uniform.json"
    save_model(str(model), uniform_model(3))
    out = tmp_path / "grid.csv"
    assert main(["density", "--model", str(model), "--grid", "5", "--fix", "3=0.5", "--out", str(out), "--quiet"]) == 0
    grid = pd.read_csv(out)
    assert len(grid) == 25
    assert (grid["y3"] == 0.5).all()
    assert main(["density", "--model", str(model), "--grid", "5", "--fix", "4=0.5", "--out", str(out), "--quiet"]) == 2


def test_sampling_is_reproducible(tmp_path):
    model = tmp_path / "model.json"
    save_model(str(model), random_model(2, np.random.default_rng(0)))
    first, second = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["sample", "--model", str(model), "--n", "50", "--seed", "4", "--out", str(first), "--quiet"]) == 0
    assert main(["sample", "--model", str(model), "--n", "50", "--seed", "4", "--out", str(second), "--quiet"]) == 0
    assert first.read_text() == second.read_text()
    assert len(pd.read_csv(first)) == 50


def test_diagnose_miso(tmp_path, capsys):
    out = tmp_path / "witness.json"
    assert main(["diagnose-miso", "--activation", "sigmoid", "--seed", "0", "--out", str(out), "--quiet"]) == 0
    assert orjson.loads(out.read_bytes())["witness"] is not None
    assert capsys.readouterr().out.startswith("negative mixed partial")
    assert main(["diagnose-miso", "--activation", "linear", "--trials", "300", "--out", str(out), "--quiet"]) == 0
    assert "no witness in 300 trials" in capsys.readouterr().out


def test_verify_static_model(tmp_path):
    model = tmp_path / "model.json"
    save_model(str(model), random_model(3, np.random.default_rng(2), raw_scale=0.5))
    out = tmp_path / "verify.json"
    assert main(["verify", "--model", str(model), "--out", str(out), "--quiet"]) == 0
    assert orjson.loads(out.read_bytes())["passed"] is True


def test_unsupported_model_version(tmp_path):
    doc = model_to_document(uniform_model(2))
    doc["version"] = "jdan-v9"
    model = tmp_path / "model.json"
    save_document(str(model), doc)
    assert main(["sample", "--model", str(model), "--n", "5", "--out", str(tmp_path / "s.csv"), "--quiet"]) == 2


def test_sampling_with_too_many_features_is_a_usage_error(tmp_path):
    arch = small_arch(2, feature_dim=2)
    model = tmp_path / "conditional.json"
    save_fitted(str(model), FittedForecaster(init_conditioning_net(arch, seed=0), arch, [AffineMap(), AffineMap()]))
    out = str(tmp_path / "s.csv")
    assert main(["sample", "--model", str(model), "--x", "0.1,0.2", "--n", "5", "--out", out, "--quiet"]) == 0
    assert main(["sample", "--model", str(model), "--x", "0.1,0.2,99", "--n", "5", "--out", out, "--quiet"]) == 2


@pytest.mark.parametrize("variable, value", [("JDAN_THREADS", "many"), ("JDAN_THREADS", "0"),
                                             ("JDAN_LOG_LEVEL", "chatty")])
def test_invalid_environment_is_a_usage_error(tmp_path, monkeypatch, variable, value):
    model = tmp_path / "uniform.json"
    save_model(str(model), uniform_model(2))
    monkeypatch.setenv(variable, value)
    get_settings.cache_clear()
    try:
        assert main(["sample", "--model", str(model), "--n", "5", "--out", str(tmp_path / "s.csv")]) == 2
    finally:
        monkeypatch.delenv(variable)
        get_settings.cache_clear()
