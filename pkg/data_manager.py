"""
This module provides a DataManager class for reading and writing experiment
artifacts: JSON documents, CSV tables and model checkpoints.
"""
import json
import os

import jsonschema
import pandas as pd
import torch

RESULTS_SCHEMA_VERSION = 2

METRIC_BLOCK = {
    "type": "object",
    "properties": {name: {"type": ["number", "null"]} for name in ("acc", "f1", "nmi", "ari")},
    "required": ["acc", "f1", "nmi", "ari"],
}

RESULTS_SCHEMA = {
    "type": "object",
    "properties": {
        "schema_version": {"const": RESULTS_SCHEMA_VERSION},
        "kind": {"type": "string"},
        "dataset": {"type": "object"},
        "config": {"type": "object"},
        "runs": {
            "type": "array",
            "items": {
                "type": "object",
                "properties": {
                    "seed": {"type": "integer"},
                    "metrics": METRIC_BLOCK,
                    "epochs_run": {"type": "integer"},
                    "seconds": {"type": "number"},
                },
                "required": ["seed", "metrics", "epochs_run"],
            },
            "minItems": 1,
        },
        "mean": METRIC_BLOCK,
        "std": METRIC_BLOCK,
        "summary": {"type": "object", "additionalProperties": {"type": ["string", "null"]}},
        "created_at": {"type": "string"},
    },
    "required": ["schema_version", "dataset", "config", "runs", "mean", "std", "summary"],
}


class DataManager:
    """
    A manager for saving and loading experiment artifacts.
    """

    @staticmethod
    def ensure_dir(path):
        """
        Creates a directory when needed and checks that it is writable.

        :param path: The directory path.
        :type path: str
        :raises PermissionError: If the directory cannot be written.
        :return: The path.
        :rtype: str
        """
        os.makedirs(path, exist_ok=True)
        if not os.access(path, os.W_OK):
            raise PermissionError(f"output directory is not writable: {path}")
        return path

    @staticmethod
    def save_json(filename, data):
        """
        Writes a JSON document with stable key order.

        :param filename: The path to the JSON file.
        :type filename: str
        :param data: The data to write.
        :type data: any
        """
        with open(filename, "w", encoding="utf-8") as f:
            json.dump(data, f, indent=4, ensure_ascii=False)
            f.write("\n")

    @staticmethod
    def load_json(filename):
        """
        Loads data from a JSON file.

        :param filename: The path to the JSON file.
        :type filename: str
        :return: The data loaded from the file.
        :rtype: any
        """
        with open(filename, "r", encoding="utf-8") as f:
            return json.load(f)

    @staticmethod
    def validate_results(results):
        """
        Checks a results document against the versioned schema.

        :param results: The results document.
        :type results: dict
        :raises jsonschema.ValidationError: If the document does not match.
        """
        jsonschema.validate(results, RESULTS_SCHEMA)

    @staticmethod
    def save_results(filename, results):
        """
        Validates and writes a results document.

        :param filename: The path to ``results.json``.
        :type filename: str
        :param results: The results document.
        :type results: dict
        """
        DataManager.validate_results(results)
        DataManager.save_json(filename, results)

    @staticmethod
    def save_frame(filename, frame):
        """
        Writes a table as CSV without the index.

        :param filename: The path to the CSV file.
        :type filename: str
        :param frame: The table.
        :type frame: pandas.DataFrame
        """
        frame.to_csv(filename, index=False)

    @staticmethod
    def load_frame(filename):
        """
        Loads a CSV table.

        :rtype: pandas.DataFrame
        """
        return pd.read_csv(filename)

    @staticmethod
    def save_checkpoint(filename, model, config, epoch, input_dim, optimizer=None):
        """
        Writes the model parameters with the configuration that built them.

        :param filename: The checkpoint path.
        :type filename: str
        :param model: The trained model.
        :type model: EMTCModel
        :param config: The experiment configuration.
        :type config: ExperimentConfig
        :param epoch: Number of completed epochs.
        :type epoch: int
        :param input_dim: Number of variates D.
        :type input_dim: int
        :param optimizer: The Adam state to store with the parameters, defaults to None.
        :type optimizer: AdamState, optional
        """
        checkpoint = {"config": config.to_dict(), "epoch": epoch, "input_dim": input_dim,
                      "state_dict": model.state_dict()}
        if optimizer is not None:
            checkpoint["optimizer"] = optimizer.state_dict()
        torch.save(checkpoint, filename)

    @staticmethod
    def load_checkpoint(filename):
        """
        Reads a checkpoint written by ``save_checkpoint``.

        :return: The checkpoint dictionary (config, epoch, input_dim, state_dict and optionally optimizer).
        :rtype: dict
        """
        return torch.load(filename, map_location="cpu", weights_only=True)
