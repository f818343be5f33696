import numpy as np
import orjson
import pytest

from src.adapters.model_store import (
    MODEL_VERSION, checkpoint_document, fitted_to_document, load_document, load_forecaster, model_to_document,
    save_document, save_fitted, save_model,
)
from src.domain.errors import ContractError, ModelVersionError
from src.domain.schemas import AffineMap, ColumnSpec
from src.services.copula import joint_pdf
from src.services.forecaster import FittedForecaster, StaticForecaster
from src.services.hypernet import init_conditioning_net
from src.services.optimizer import Adam
from tests.factories import random_model, small_arch


def test_static_model_round_trip(tmp_path):
    model = random_model(3, np.random.default_rng(0))
    path = str(tmp_path / "model.json")
    save_model(path, model)
    stored = load_forecaster(path)
    assert isinstance(stored.forecaster, StaticForecaster)
    assert stored.columns is None
    y = np.random.default_rng(1).uniform(model.lower, model.upper, size=(20, 3))
    np.testing.assert_array_equal(joint_pdf(stored.forecaster.model, y), joint_pdf(model, y))


def test_conditional_model_round_trip(tmp_path):
    arch = small_arch(2, feature_dim=2, heads="per_dimension")
    forecaster = FittedForecaster(init_conditioning_net(arch, seed=5), arch, [AffineMap(shift=1.0, scale=2.0), AffineMap()])
    columns = ColumnSpec(feature_columns=["x"], target_columns=["a", "b"], lag_windows=[1])
    path = str(tmp_path / "sub" / "model.json")
    save_fitted(path, forecaster, columns)
    stored = load_forecaster(path)
    assert isinstance(stored.forecaster, FittedForecaster)
    assert stored.columns == columns
    assert stored.forecaster.arch == arch
    x = np.array([0.3, -1.2])
    y = np.array([0.4, 0.6])
    assert joint_pdf(stored.forecaster.model_for(x), y) == joint_pdf(forecaster.model_for(x), y)


def test_document_carries_version_and_kind():
    doc = model_to_document(random_model(2, np.random.default_rng(0)))
    assert doc["version"] == MODEL_VERSION
    assert doc["kind"] == "static"
    arch = small_arch(2)
    fitted = fitted_to_document(FittedForecaster(init_conditioning_net(arch, 0), arch, []))
    assert fitted["kind"] == "conditional"
    assert "columns" not in fitted


def test_other_versions_are_rejected(tmp_path):
    path = tmp_path / "old.json"
    doc = model_to_document(random_model(2, np.random.default_rng(0)))
    doc["version"] = "jdan-v0"
    path.write_bytes(orjson.dumps(doc, option=orjson.OPT_SERIALIZE_NUMPY))
    with pytest.raises(ModelVersionError):
        load_document(str(path))


def test_broken_documents(tmp_path):
    bad_json = tmp_path / "bad.json"
    bad_json.write_text("{not json")
    with pytest.raises(ContractError):
        load_document(str(bad_json))
    with pytest.raises(FileNotFoundError):
        load_document(str(tmp_path / "missing.json"))
    incomplete = tmp_path / "incomplete.json"
    save_document(str(incomplete), {"version": MODEL_VERSION, "kind": "static", "dim": 2})
    with pytest.raises(ContractError):
        load_forecaster(str(incomplete))
    unknown = tmp_path / "unknown.json"
    save_document(str(unknown), {"version": MODEL_VERSION, "kind": "mixture"})
    with pytest.raises(ContractError):
        load_forecaster(str(unknown))


def test_checkpoint_keeps_optimizer_state(tmp_path):
    arch = small_arch(2)
    net = init_conditioning_net(arch, seed=0)
    optimizer = Adam(net.parameters(), learning_rate=0.02)
    optimizer.step(net.parameters(), [np.ones_like(p) for p in net.parameters()])
    model_doc = fitted_to_document(FittedForecaster(net, arch, []))
    path = str(tmp_path / "ckpt.json")
    save_document(path, checkpoint_document(model_doc, optimizer.state_dict(), epoch=7))
    doc = load_document(path)
    assert doc["epoch"] == 7
    assert doc["optimizer"]["t"] == 1
    restored = Adam(net.parameters())
    restored.load_state_dict(doc["optimizer"])
    np.testing.assert_array_equal(restored.m[1], optimizer.m[1])
    assert checkpoint_document(model_doc, {}, 3)["kind"] == "conditional"
    assert isinstance(load_forecaster(path).forecaster, FittedForecaster)
