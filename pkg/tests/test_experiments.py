import json

import numpy as np
import pandas as pd
import pytest
from click.testing import CliRunner
from scipy.spatial.distance import pdist

from config import ExperimentConfig
from data_manager import DataManager
from emtc_main import cli
from errors import ArgumentError
from experiments.ablation import flag
from experiments.embedding_export import project
from experiments.manifest import ExperimentKind, RunManifest, aggregate, format_mean_std, run_seeds
from metrics import evaluate
from synthetic import SyntheticSpec
from time_series import TimeSeriesDataset
from ts_format import write_ts_file

QUICK = {
    "n_views": 2, "embed_dim": 8, "key_dim": 4, "kernel_widths": [3, 5], "epochs": 2, "seeds": [0, 1],
    "kmeans_restarts": 2, "kmeans_max_iter": 50,
    "synthetic": {"n_per_cluster": 4, "g": 2, "T": 16, "D": 2},
}


@pytest.fixture
def quick_json(tmp_path):
    path = tmp_path / "quick.json"
    path.write_text(json.dumps(QUICK), encoding="utf-8")
    return str(path)


@pytest.fixture
def invoke(tmp_path):
    runner = CliRunner()

    def run(*args):
        return runner.invoke(cli, ["--log-file", str(tmp_path / "log.jsonl"), *args], catch_exceptions=False)
    return run


def test_format_mean_std():
    assert format_mean_std(0.90833, 0.06556) == "0.9083 ± 0.0656"


def test_aggregate_over_seeds():
    reports = [evaluate([0, 0, 1, 1], [0, 0, 1, 1]), evaluate([0, 0, 1, 1], [0, 1, 0, 1])]
    mean, std, summary = aggregate(reports)
    assert mean["acc"] == 0.75
    assert std["acc"] == 0.25
    assert summary["acc"] == "0.7500 ± 0.2500"


def test_manifest_needs_a_dataset(tmp_path):
    with pytest.raises(ArgumentError):
        RunManifest(ExperimentKind.SINGLE, ExperimentConfig(), str(tmp_path))


def test_manifest_dataset_names(tmp_path):
    manifest = RunManifest("ablation", ExperimentConfig(), str(tmp_path), dataset="A, B")
    assert manifest.kind is ExperimentKind.ABLATION
    assert manifest.dataset_names() == ["A", "B"]
    assert RunManifest("single", ExperimentConfig(), str(tmp_path),
                       synthetic=SyntheticSpec()).dataset_names() == ["synthetic"]


def test_run_writes_results_and_trace(invoke, quick_json, tmp_path):
    out = tmp_path / "run"
    result = invoke("run", "--dataset", "synthetic", "--config", quick_json, "--out", str(out),
                    "--export-masks", "--save-checkpoint")
    assert result.exit_code == 0, result.output
    assert "ACC:" in result.output

    results = DataManager.load_json(str(out / "results.json"))
    DataManager.validate_results(results)
    assert [run["seed"] for run in results["runs"]] == [0, 1]
    assert set(results["mean"]) == {"acc", "f1", "nmi", "ari"}
    assert results["dataset"]["synthetic"]["T"] == 16
    assert " ± " in results["summary"]["acc"]

    trace = pd.read_csv(out / "trace.csv")
    assert trace["seed"].tolist() == [0, 0, 1, 1]
    assignments = pd.read_csv(out / "assignments.csv")
    assert assignments.columns.tolist() == ["seed", "sample", "cluster"]
    assert len(assignments) == 2 * 8
    assert set(assignments["cluster"]) <= {0, 1}
    masks = pd.read_csv(out / "masks.csv", dtype={"mask": str})
    assert len(masks) == 2 * 2 * 2 * 8
    assert (out / "checkpoint_seed0.pt").exists() and (out / "checkpoint_seed1.pt").exists()

    lines = (tmp_path / "log.jsonl").read_text(encoding="utf-8").splitlines()
    assert any(json.loads(line)["message"] == "run finished" for line in lines)


def test_run_is_reproducible(invoke, quick_json, tmp_path):
    documents = []
    for name in ("a", "b"):
        assert invoke("run", "--dataset", "synthetic", "--config", quick_json, "--out", str(tmp_path / name)).exit_code == 0
        document = DataManager.load_json(str(tmp_path / name / "results.json"))
        documents.append([(run["seed"], run["metrics"], run["epochs_run"]) for run in document["runs"]])
    assert documents[0] == documents[1]


def test_flags_override_the_config_file(invoke, quick_json, tmp_path):
    out = tmp_path / "flags"
    result = invoke("run", "--dataset", "synthetic", "--config", quick_json, "--out", str(out),
                    "--epochs", "1", "--seeds", "5", "--keep-ratio", "0.5", "--no-ivm", "--mask-policy", "uniform")
    assert result.exit_code == 0, result.output
    config = DataManager.load_json(str(out / "results.json"))["config"]
    assert (config["epochs"], config["seeds"], config["keep_ratio"]) == (1, [5], 0.5)
    assert (config["use_ivm"], config["mask_policy"], config["embed_dim"]) == (False, "uniform", 8)


def test_compare_masks_has_one_row_per_policy(invoke, quick_json, tmp_path):
    out = tmp_path / "masks"
    result = invoke("compare-masks", "--dataset", "synthetic", "--config", quick_json, "--out", str(out),
                    "--epochs", "1", "--seeds", "0")
    assert result.exit_code == 0, result.output
    table = pd.read_csv(out / "mask_comparison.csv")
    assert table["policy"].tolist() == ["evolving", "random", "uniform", "variance", "frequency"]
    assert {"acc", "f1", "nmi", "ari"} <= set(table.columns)
    assert table["keep_ratio"].nunique() == 1


def test_ablation_writes_the_grid(invoke, quick_json, tmp_path):
    out = tmp_path / "ablation"
    result = invoke("ablation", "--dataset", "synthetic", "--config", quick_json, "--out", str(out),
                    "--epochs", "1", "--seeds", "0")
    assert result.exit_code == 0, result.output
    table = pd.read_csv(out / "ablation.csv")
    assert table["variant"].tolist() == ["EMTC", "w/o IVM", "w/o MEV", "w/o IVM & MEV"]
    assert table.loc[0, "ivm"] == "✓" and table.loc[3, "mev"] == "✗"
    assert (out / "ablation.json").exists()


def test_ablation_flags_render_as_marks():
    assert (flag(True), flag(False)) == ("✓", "✗")


def test_scaling_single_point(invoke, quick_json, tmp_path):
    out = tmp_path / "scaling"
    result = invoke("scaling", "--config", quick_json, "--out", str(out), "--grid-T", "16", "--epochs", "1")
    assert result.exit_code == 0, result.output
    table = pd.read_csv(out / "timing.csv")
    assert len(table) == 1
    assert table.loc[0, "axis"] == "T" and table.loc[0, "T"] == 16
    assert table.loc[0, "seconds_per_epoch"] > 0


def test_export_embedding(invoke, quick_json, tmp_path):
    out = tmp_path / "embedding"
    result = invoke("export-embedding", "--dataset", "synthetic", "--config", quick_json, "--out", str(out))
    assert result.exit_code == 0, result.output
    table = pd.read_csv(out / "embedding.csv")
    assert table.columns.tolist() == ["x", "y", "cluster", "label"]
    assert len(table) == 8


def test_export_embedding_from_checkpoint(invoke, quick_json, tmp_path):
    out = tmp_path / "ckpt"
    assert invoke("run", "--dataset", "synthetic", "--config", quick_json, "--out", str(out),
                  "--save-checkpoint").exit_code == 0
    result = invoke("export-embedding", "--dataset", "synthetic", "--config", quick_json, "--out", str(out),
                    "--checkpoint", str(out / "checkpoint_seed0.pt"), "--projection", "tsne")
    assert result.exit_code == 0, result.output
    assert len(pd.read_csv(out / "embedding.csv")) == 8


def test_plot_renders_figures(invoke, quick_json, tmp_path):
    out = tmp_path / "plots"
    invoke("run", "--dataset", "synthetic", "--config", quick_json, "--out", str(out))
    invoke("export-embedding", "--dataset", "synthetic", "--config", quick_json, "--out", str(out))
    result = invoke("plot", "--trace", str(out / "trace.csv"), "--embedding", str(out / "embedding.csv"),
                    "--out", str(out))
    assert result.exit_code == 0, result.output
    assert (out / "convergence.png").stat().st_size > 0
    assert (out / "embedding.png").stat().st_size > 0


def test_datasets_lists_the_registry(invoke, tmp_path):
    result = invoke("datasets", "--data-dir", str(tmp_path))
    assert result.exit_code == 0
    assert "StandWalkJump" in result.output and "2500" in result.output


@pytest.fixture
def unlabeled_ts(tmp_path):
    path = tmp_path / "Unlabeled.ts"
    samples = np.random.default_rng(3).standard_normal((8, 16, 2))
    write_ts_file(TimeSeriesDataset("Unlabeled", samples), path)
    return str(path)


def test_unlabeled_run_writes_null_metrics(invoke, quick_json, unlabeled_ts, tmp_path):
    out = tmp_path / "unlabeled"
    result = invoke("run", "--dataset-path", unlabeled_ts, "--n-clusters", "2", "--config", quick_json,
                    "--out", str(out))
    assert result.exit_code == 0, result.output
    assert "ACC: n/a" in result.output

    results = DataManager.load_json(str(out / "results.json"))
    DataManager.validate_results(results)
    assert results["mean"] == {"acc": None, "f1": None, "nmi": None, "ari": None}
    assert all(value is None for run in results["runs"] for value in run["metrics"].values())
    assignments = pd.read_csv(out / "assignments.csv")
    assert len(assignments) == 2 * 8
    assert set(assignments["cluster"]) == {0, 1}


def test_compare_masks_needs_labels(invoke, quick_json, unlabeled_ts, tmp_path):
    result = invoke("compare-masks", "--dataset-path", unlabeled_ts, "--n-clusters", "2", "--config", quick_json,
                    "--out", str(tmp_path / "masks"))
    assert result.exit_code == 1
    assert "no labels" in result.output


def test_missing_dataset_is_reported(invoke, tmp_path):
    result = invoke("run", "--dataset", "BasicMotions", "--data-dir", str(tmp_path / "nowhere"),
                    "--out", str(tmp_path / "out"))
    assert result.exit_code == 1
    assert "BasicMotions_TEST.ts" in result.output


def test_bad_flag_values_are_usage_errors(invoke, tmp_path):
    result = invoke("run", "--dataset", "synthetic", "--keep-ratio", "1.5", "--out", str(tmp_path))
    assert result.exit_code == 2
    assert "keep_ratio" in result.output


def test_pca_of_planar_points_preserves_distances():
    points = np.random.default_rng(0).normal(size=(10, 2))
    np.testing.assert_allclose(pdist(project(points, "pca")), pdist(points), atol=1e-6)


def test_unknown_projection():
    with pytest.raises(ArgumentError):
        project(np.zeros((3, 2)), "umap")


@pytest.mark.slow
def test_exported_clusters_are_separated(invoke, tmp_path):
    out = tmp_path / "separated"
    config = tmp_path / "separated.json"
    config.write_text(json.dumps({"epochs": 100, "seeds": [0]}), encoding="utf-8")
    assert invoke("export-embedding", "--dataset", "synthetic", "--config", str(config),
                  "--out", str(out)).exit_code == 0
    table = pd.read_csv(out / "embedding.csv")
    centroids = table.groupby("cluster")[["x", "y"]].mean()
    spread = np.mean([np.linalg.norm(rows[["x", "y"]].to_numpy() - centroids.loc[c].to_numpy(), axis=1).mean()
                      for c, rows in table.groupby("cluster")])
    assert pdist(centroids.to_numpy()).mean() > spread


@pytest.mark.slow
def test_doubling_length_scales_near_linearly(invoke, tmp_path):
    out = tmp_path / "timing"
    config = tmp_path / "timing.json"
    config.write_text(json.dumps({"epochs": 5, "seeds": [0]}), encoding="utf-8")
    assert invoke("scaling", "--config", str(config), "--out", str(out), "--grid-T", "128,256",
                  "--grid-D", "4,8").exit_code == 0
    table = pd.read_csv(out / "timing.csv")
    assert (table["ratio"].dropna() < 2.5).all()


@pytest.mark.slow
def test_evolving_mask_beats_random_mask(synthetic_benchmark):
    config = ExperimentConfig(epochs=100, seeds=[0, 1, 2, 3, 4])
    accuracy = {}
    for policy in ("evolving", "random"):
        outcomes = run_seeds(synthetic_benchmark, config.with_overrides(mask_policy=policy))
        accuracy[policy] = np.mean([o["report"].acc for o in outcomes])
    assert accuracy["evolving"] >= accuracy["random"]
