import json

import jsonschema
import pytest
import torch

from config import ContrastConfig, ExperimentConfig
from data_manager import RESULTS_SCHEMA_VERSION, DataManager
from errors import ArgumentError
from model import EMTCModel
from optimizer import AdamState


def test_defaults():
    config = ExperimentConfig()
    assert (config.n_views, config.embed_dim, config.key_dim) == (3, 64, 32)
    assert (config.keep_ratio, config.temperature, config.alpha, config.beta) == (0.75, 0.5, 1.0, 0.5)
    assert (config.learning_rate, config.lr_schedule) == (1e-3, "cosine")
    assert config.seeds == [0, 1, 2]


def test_disabling_mev_forces_one_view():
    assert ExperimentConfig(use_mev=False).n_views == 1
    assert ExperimentConfig().with_overrides(use_mev=False).n_views == 1


@pytest.mark.parametrize("changes", [
    {"keep_ratio": 0.0},
    {"keep_ratio": 1.5},
    {"temperature": 0.0},
    {"alpha": -1.0},
    {"epochs": -1},
    {"n_views": 0},
    {"seeds": []},
    {"mask_policy": "spectral"},
    {"kernel_widths": [4]},
    {"lr_schedule": "step"},
])
def test_invalid_values_are_rejected(changes):
    with pytest.raises(ArgumentError):
        ExperimentConfig(**changes)


def test_seeds_accept_a_comma_list():
    assert ExperimentConfig.validate_seeds("3, 1,2") == [3, 1, 2]


def test_lr_schedule_is_normalized():
    assert ExperimentConfig(lr_schedule=" Constant ").lr_schedule == "constant"


def test_with_overrides_ignores_none():
    config = ExperimentConfig(epochs=5).with_overrides(epochs=None, keep_ratio=0.5)
    assert (config.epochs, config.keep_ratio) == (5, 0.5)


def test_kernel_widths_cycle_over_views():
    config = ExperimentConfig(n_views=5, kernel_widths=[3, 7])
    assert [config.kernel_width(v) for v in range(5)] == [3, 7, 3, 7, 3]


def test_contrast_settings():
    assert ExperimentConfig(temperature=0.2).contrast(9) == ContrastConfig(0.2, 9)
    with pytest.raises(ArgumentError):
        ContrastConfig(temperature=-1.0)


def test_json_round_trip(tmp_path):
    config = ExperimentConfig(epochs=7, seeds=[4, 5], use_ivm=False, mask_policy="variance")
    path = tmp_path / "config.json"
    path.write_text(json.dumps({**config.to_dict(), "synthetic": {"g": 2}}), encoding="utf-8")
    assert ExperimentConfig.from_json(str(path)) == config


def test_unknown_keys_are_rejected():
    with pytest.raises(ArgumentError, match="learning_rat"):
        ExperimentConfig.from_dict({"learning_rat": 0.1})


def results_document():
    metrics = {"acc": 1.0, "f1": 1.0, "nmi": 1.0, "ari": 1.0}
    return {
        "schema_version": RESULTS_SCHEMA_VERSION,
        "kind": "single",
        "dataset": {"name": "x"},
        "config": ExperimentConfig().to_dict(),
        "runs": [{"seed": 0, "metrics": metrics, "epochs_run": 3}],
        "mean": metrics,
        "std": {"acc": 0.0, "f1": 0.0, "nmi": 0.0, "ari": 0.0},
        "summary": {"acc": "1.0000 ± 0.0000"},
    }


def test_results_schema_accepts_a_valid_document(tmp_path):
    path = tmp_path / "results.json"
    DataManager.save_results(str(path), results_document())
    assert DataManager.load_json(str(path))["summary"]["acc"] == "1.0000 ± 0.0000"


@pytest.mark.parametrize("key", ["runs", "mean", "schema_version"])
def test_results_schema_rejects_missing_fields(key):
    document = results_document()
    del document[key]
    with pytest.raises(jsonschema.ValidationError):
        DataManager.validate_results(document)


def test_results_schema_rejects_missing_metric():
    document = results_document()
    del document["mean"]["ari"]
    with pytest.raises(jsonschema.ValidationError):
        DataManager.validate_results(document)


def test_checkpoint_round_trip(tmp_path):
    config = ExperimentConfig(n_views=2, embed_dim=4, key_dim=2, kernel_widths=[3, 5])
    model = EMTCModel(3, config)
    path = tmp_path / "model.pt"
    adam = AdamState.for_params(list(model.parameters()))
    adam.step = 4
    DataManager.save_checkpoint(str(path), model, config, epoch=4, input_dim=3, optimizer=adam)

    state = DataManager.load_checkpoint(str(path))
    assert state["epoch"] == 4
    restored_adam = AdamState.from_state_dict(state["optimizer"])
    assert restored_adam.step == 4
    assert len(restored_adam.exp_avg) == len(list(model.parameters()))
    restored = EMTCModel(state["input_dim"], ExperimentConfig.from_dict(state["config"]))
    restored.load_state_dict(state["state_dict"])
    for (name, a), (_, b) in zip(model.state_dict().items(), restored.state_dict().items()):
        assert torch.equal(a, b), name


def test_model_state_keys_are_indexed_by_view():
    keys = EMTCModel(2, ExperimentConfig(n_views=2, embed_dim=4, key_dim=2)).state_dict().keys()
    assert "encoders.views.1.conv.weight" in keys
    assert "transforms.pairs.1_to_0.weight" in keys
    assert all(p.dtype == torch.float64 for p in EMTCModel(2, ExperimentConfig(embed_dim=4)).parameters())


def test_results_schema_accepts_null_metrics_but_not_strings():
    document = results_document()
    unscored = {"acc": None, "f1": None, "nmi": None, "ari": None}
    document.update(runs=[{"seed": 0, "metrics": unscored, "epochs_run": 3}], mean=unscored, std=unscored,
                    summary=unscored)
    DataManager.validate_results(document)
    document["mean"] = {"acc": "high", "f1": None, "nmi": None, "ari": None}
    with pytest.raises(jsonschema.ValidationError):
        DataManager.validate_results(document)
