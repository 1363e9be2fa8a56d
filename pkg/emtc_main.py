"""
This module serves as the command-line entry point for EMTC experiments.

Every command builds a RunManifest from the shared options, runs one
experiment kind and writes its artifacts to ``--out``. A ``--config`` JSON
document supplies the base configuration; flags given on the command line
override it.
"""
import logging
import os
from contextlib import contextmanager

import click
import pandas as pd

from config import MASK_POLICIES, SYNTHETIC_KEY, ExperimentConfig
from data_manager import DataManager
from experiments.ablation import cmd_ablation
from experiments.embedding_export import PROJECTIONS, cmd_export_embedding
from experiments.manifest import ExperimentKind, RunManifest
from experiments.mask_comparison import cmd_compare_masks
from experiments.plots import plot_embedding, plot_trace
from experiments.scaling import cmd_scaling
from experiments.single_run import cmd_run
from log_config import setup_logging
from synthetic import SyntheticSpec
from ts_format import PUBLISHED_SPLIT, SPLITS, UEA_DATASETS, candidate_paths
from validators import validate_epochs, validate_int_list, validate_keep_ratio, validate_positive, validate_seeds

logger = logging.getLogger(__name__)


@contextmanager
def library_errors():
    """
    Reports library failures as click errors with exit code 1.
    """
    try:
        yield
    except (ValueError, FileNotFoundError, ArithmeticError, PermissionError) as e:
        raise click.ClickException(str(e))


def dataset_options(f):
    """Options that select the data."""
    f = click.option("--split", type=click.Choice(SPLITS), default="published", show_default=True,
                     help="Which UEA split to load; 'published' matches the benchmark sizes.")(f)
    f = click.option("--data-dir", default=lambda: os.environ.get("EMTC_DATA_DIR", "data"),
                     show_default="EMTC_DATA_DIR or data", help="Local UEA archive directory.")(f)
    f = click.option("--dataset-path", type=click.Path(dir_okay=False), default=None,
                     help="Explicit .ts file; takes precedence over --data-dir.")(f)
    f = click.option("--dataset", default=None,
                     help="UEA dataset name(s), comma-separated, or 'synthetic'.")(f)
    return f


def config_options(f):
    """Options that override the configuration document."""
    f = click.option("--n-clusters", type=int, default=None, callback=validate_positive,
                     help="Number of clusters; defaults to the label count.")(f)
    f = click.option("--n-jobs", type=int, default=None, help="Parallel seed processes (joblib).")(f)
    f = click.option("--epochs", type=int, default=None, callback=validate_epochs)(f)
    f = click.option("--keep-ratio", type=float, default=None, callback=validate_keep_ratio)(f)
    for term in ("contra", "inter", "intra", "mev", "ivm"):
        f = click.option(f"--no-{term}", f"no_{term}", is_flag=True, default=False,
                         help=f"Disable {term.upper() if len(term) == 3 else 'L_' + term}.")(f)
    f = click.option("--mask-policy", type=click.Choice(MASK_POLICIES), default=None)(f)
    f = click.option("--seeds", default=None, callback=validate_seeds, help="Comma-separated seeds, e.g. 0,1,2.")(f)
    f = click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False), default=None,
                     help="JSON configuration document.")(f)
    f = click.option("--out", "output_dir", default="results", show_default=True, help="Output directory.")(f)
    return f


def build_config(config_path, seeds, mask_policy, no_ivm, no_mev, no_intra, no_inter, no_contra,
                 keep_ratio, epochs, n_jobs, n_clusters):
    """
    Merges the configuration document with the command-line overrides.

    :return: The configuration and the synthetic spec from the document, if any.
    :rtype: tuple[ExperimentConfig, SyntheticSpec or None]
    """
    config = ExperimentConfig.from_json(config_path) if config_path else ExperimentConfig()
    synthetic = None
    if config_path:
        block = DataManager.load_json(config_path).get(SYNTHETIC_KEY)
        synthetic = SyntheticSpec.from_dict(block) if block is not None else None
    switches = {"use_ivm": no_ivm, "use_mev": no_mev, "use_intra": no_intra, "use_inter": no_inter,
                "use_contra": no_contra}
    overrides = {name: False for name, disabled in switches.items() if disabled}
    config = config.with_overrides(seeds=seeds, mask_policy=mask_policy, keep_ratio=keep_ratio, epochs=epochs,
                                   n_jobs=n_jobs, n_clusters=n_clusters, **overrides)
    return config, synthetic


def build_manifest(kind, options, **extra):
    """
    Builds the manifest of one command from its parsed options.

    :rtype: RunManifest
    """
    config, synthetic = build_config(
        options["config_path"], options["seeds"], options["mask_policy"], options["no_ivm"], options["no_mev"],
        options["no_intra"], options["no_inter"], options["no_contra"], options["keep_ratio"],
        options["epochs"], options["n_jobs"], options["n_clusters"])
    dataset = options.get("dataset")
    if dataset == SYNTHETIC_KEY and synthetic is None:
        synthetic = SyntheticSpec()
    manifest = RunManifest(kind=kind, config=config, output_dir=options["output_dir"], dataset=dataset,
                           dataset_path=options.get("dataset_path"), data_dir=options.get("data_dir", "data"),
                           split=options.get("split", "published"), synthetic=synthetic, **extra)
    DataManager.ensure_dir(manifest.output_dir)
    logger.info("manifest", extra={"kind": manifest.kind.value, "dataset": dataset,
                                   "config": config.to_dict(), "output_dir": manifest.output_dir})
    return manifest


@click.group()
@click.option("--log-level", type=click.Choice(["DEBUG", "INFO", "WARNING", "ERROR"], case_sensitive=False),
              default="INFO", show_default=True)
@click.option("--log-file", type=click.Path(dir_okay=False), default=None, help="Write logs here instead of stderr.")
def cli(log_level, log_file):
    """Evolving-masked multivariate time-series clustering experiments."""
    setup_logging(log_level, log_file=log_file)


@cli.command()
@dataset_options
@config_options
@click.option("--export-masks", is_flag=True, help="Write every epoch's masks to masks.csv.")
@click.option("--save-checkpoint", is_flag=True, help="Write checkpoint_seed{s}.pt per seed.")
def run(export_masks, save_checkpoint, **options):
    """Train and evaluate on one dataset; writes results.json, trace.csv and assignments.csv."""
    with library_errors():
        manifest = build_manifest(ExperimentKind.SINGLE, options, export_masks=export_masks,
                                  save_checkpoint=save_checkpoint)
        results = cmd_run(manifest)
    for name, value in results["summary"].items():
        click.echo(f"{name.upper():>4}: {value if value is not None else 'n/a (no labels)'}")


@cli.command("compare-masks")
@dataset_options
@config_options
def compare_masks(**options):
    """Compare the evolving mask with the static masking policies."""
    with library_errors():
        table = cmd_compare_masks(build_manifest(ExperimentKind.COMPARE_MASKS, options))
    click.echo(table[["dataset", "policy", "acc", "f1", "nmi", "ari"]].to_string(index=False))


@cli.command()
@dataset_options
@config_options
@click.option("--loss-terms", is_flag=True, help="Add the rows that drop one loss term each.")
def ablation(loss_terms, **options):
    """Run the IVM/MEV ablation grid."""
    with library_errors():
        table = cmd_ablation(build_manifest(ExperimentKind.ABLATION, options), include_loss_terms=loss_terms)
    click.echo(table[["dataset", "variant", "ivm", "mev", "acc", "f1", "nmi", "ari"]].to_string(index=False))


@cli.command()
@config_options
@click.option("--grid-N", "grid_n", default=None, callback=validate_int_list, help="e.g. 30,60,120")
@click.option("--grid-T", "grid_t", default=None, callback=validate_int_list, help="e.g. 64,128,256")
@click.option("--grid-D", "grid_d", default=None, callback=validate_int_list, help="e.g. 3,6,12")
def scaling(grid_n, grid_t, grid_d, **options):
    """Time training on synthetic data, varying one of D, T or N at a time."""
    if not (grid_n or grid_t or grid_d):
        grid_t = [64, 128, 256]
    with library_errors():
        manifest = build_manifest(ExperimentKind.SCALING, {**options, "dataset": SYNTHETIC_KEY})
        table = cmd_scaling(manifest, grid_N=grid_n, grid_T=grid_t, grid_D=grid_d)
    click.echo(table.to_string(index=False))


@cli.command("export-embedding")
@dataset_options
@config_options
@click.option("--projection", type=click.Choice(PROJECTIONS), default="pca", show_default=True)
@click.option("--checkpoint", type=click.Path(exists=True, dir_okay=False), default=None,
              help="Reuse a model saved by run --save-checkpoint.")
def export_embedding(projection, checkpoint, **options):
    """Write the fused embedding projected to 2-D as embedding.csv."""
    with library_errors():
        table = cmd_export_embedding(build_manifest(ExperimentKind.EXPORT_EMBEDDING, options), projection, checkpoint)
    click.echo(f"{len(table)} rows written to {os.path.join(options['output_dir'], 'embedding.csv')}")


@cli.command()
@click.option("--trace", "trace_csv", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--embedding", "embedding_csv", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--out", "output_dir", default="results", show_default=True)
def plot(trace_csv, embedding_csv, output_dir):
    """Render trace.csv and embedding.csv as PNG figures."""
    if trace_csv is None and embedding_csv is None:
        raise click.UsageError("give --trace, --embedding or both")
    with library_errors():
        DataManager.ensure_dir(output_dir)
        if trace_csv:
            plot_trace(trace_csv, os.path.join(output_dir, "convergence.png"))
        if embedding_csv:
            plot_embedding(embedding_csv, os.path.join(output_dir, "embedding.png"))


@cli.command()
@click.option("--data-dir", default=lambda: os.environ.get("EMTC_DATA_DIR", "data"),
              show_default="EMTC_DATA_DIR or data")
def datasets(data_dir):
    """List the registered UEA datasets and whether they are available locally."""
    rows = []
    for name, (n, T, D, g) in UEA_DATASETS.items():
        split = PUBLISHED_SPLIT[name]
        available = any(os.path.isfile(p) for p in candidate_paths(name, data_dir, split))
        rows.append({"dataset": name, "N": n, "T": T, "D": D, "g": g, "split": split,
                     "local": "yes" if available else "no"})
    click.echo(pd.DataFrame(rows).to_string(index=False))


def main():
    """
    Runs the EMTC command-line interface.
    """
    cli()


if __name__ == "__main__":
    main()
