"""
This module reads and writes the UEA ``.ts`` text format and resolves UEA
archive datasets on disk.

It is the only module that touches external data formats.
"""
import logging
import os

import numpy as np

from errors import DatasetNotFoundError, EmptyDatasetError, TsFormatError
from time_series import TimeSeriesDataset, concatenate, fit_length, sort_class_tokens

logger = logging.getLogger(__name__)

BOOLEAN_TAGS = ("@timestamps", "@univariate", "@equallength", "@missing")
INTEGER_TAGS = ("@dimensions", "@serieslength")
SPLITS = ("train", "test", "both", "published")

# Published benchmark statistics: N, T, D, g. N is the size of the TEST split for all
# entries except DuckDuckGeese and HandMovementDirection, which match no split.
UEA_DATASETS = {
    "BasicMotions": (40, 100, 6, 4),
    "Cricket": (72, 1197, 6, 12),
    "DuckDuckGeese": (40, 270, 1345, 5),
    "EigenWorms": (131, 17984, 6, 5),
    "Epilepsy": (138, 206, 3, 4),
    "FingerMovements": (100, 50, 28, 2),
    "HandMovementDirection": (147, 400, 10, 4),
    "Heartbeat": (205, 405, 61, 2),
    "MotorImagery": (100, 3000, 64, 2),
    "NATOPS": (180, 51, 24, 6),
    "PEMS-SF": (173, 144, 963, 7),
    "RacketSports": (152, 30, 6, 4),
    "SelfRegulationSCP1": (293, 896, 6, 2),
    "SelfRegulationSCP2": (180, 1152, 7, 2),
    "StandWalkJump": (15, 2500, 4, 3),
}
PUBLISHED_SPLIT = {name: "test" for name in UEA_DATASETS}


def parse_ts_file(path) -> TimeSeriesDataset:
    """
    Parses a UEA ``.ts`` file.

    Class tokens are remapped to 0..g-1, numerically ordered when every token
    is a number. Samples of unequal length are zero-padded to the longest one.

    :param path: The path to the ``.ts`` file.
    :type path: str or os.PathLike
    :raises TsFormatError: If a header or data line is malformed.
    :raises EmptyDatasetError: If the data section holds no samples.
    :return: The parsed dataset.
    :rtype: TimeSeriesDataset
    """
    header = {"@problemname": os.path.splitext(os.path.basename(str(path)))[0], "@classlabel": False}
    series, tokens = [], []
    n_dims = None
    data_started = False

    with open(path, "r", encoding="utf-8") as f:
        for line_number, raw in enumerate(f, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if not data_started:
                if not line.startswith("@"):
                    raise TsFormatError("data found before the @data tag", line_number, line)
                data_started = parse_header_line(line, line_number, header)
                continue
            if line.startswith("@"):
                raise TsFormatError("header tag found inside the data section", line_number, line)

            sample, token = parse_data_line(line, line_number, header["@classlabel"])
            if n_dims is None:
                n_dims = sample.shape[1]
                declared = header.get("@dimensions")
                if declared is not None and declared != n_dims:
                    raise TsFormatError(f"@dimensions is {declared} but the sample has {n_dims}", line_number, line)
            elif sample.shape[1] != n_dims:
                raise TsFormatError(f"expected {n_dims} dimensions, found {sample.shape[1]}", line_number, line)
            series.append(sample)
            tokens.append(token)

    if not series:
        raise EmptyDatasetError(f"{path}: the data section is empty")

    lengths = {s.shape[0] for s in series}
    target_T = max(lengths)
    if len(lengths) > 1:
        logger.info("padding unequal-length series", extra={"path": str(path), "max_length": target_T,
                                                            "min_length": min(lengths)})
    samples = np.stack([fit_length(s[None, :, :], target_T)[0] for s in series])

    labels = class_names = None
    if header["@classlabel"]:
        class_names = sort_class_tokens(set(tokens))
        index = {name: i for i, name in enumerate(class_names)}
        labels = np.array([index[t] for t in tokens], dtype=np.int64)
    return TimeSeriesDataset(header["@problemname"], samples, labels, class_names)


def parse_header_line(line, line_number, header):
    """
    Parses one ``@`` header line into ``header``.

    :return: True when the line is the ``@data`` tag.
    :rtype: bool
    :raises TsFormatError: If the tag is unknown or its value is invalid.
    """
    parts = line.split()
    tag = parts[0].lower()
    values = parts[1:]
    if tag == "@data":
        if values:
            raise TsFormatError("@data takes no value", line_number, line)
        return True
    if tag == "@problemname":
        if not values:
            raise TsFormatError("@problemName requires a value", line_number, line)
        header[tag] = " ".join(values)
    elif tag in BOOLEAN_TAGS:
        header[tag] = parse_boolean(values, line_number, line)
        if tag == "@timestamps" and header[tag]:
            raise TsFormatError("timestamped series are not supported", line_number, line)
    elif tag in INTEGER_TAGS:
        if len(values) != 1 or not values[0].isdigit() or int(values[0]) < 1:
            raise TsFormatError(f"{parts[0]} requires a positive integer", line_number, line)
        header[tag] = int(values[0])
    elif tag == "@classlabel":
        header[tag] = parse_boolean(values[:1], line_number, line)
        if header[tag] and len(values) < 2:
            raise TsFormatError("@classLabel true requires the list of class values", line_number, line)
    else:
        raise TsFormatError(f"unknown header tag {parts[0]}", line_number, line)
    return False


def parse_boolean(values, line_number, line):
    """
    Parses the single true/false value of a boolean tag.

    :rtype: bool
    """
    if len(values) != 1 or values[0].lower() not in ("true", "false"):
        raise TsFormatError("expected a single true/false value", line_number, line)
    return values[0].lower() == "true"


def parse_data_line(line, line_number, has_label):
    """
    Parses one data line into a (T, D) array and its class token.

    :rtype: tuple[numpy.ndarray, str or None]
    :raises TsFormatError: If values are missing, non-numeric, non-finite or ragged.
    """
    parts = line.split(":")
    token = None
    if has_label:
        if len(parts) < 2:
            raise TsFormatError("missing class label", line_number, line)
        token = parts[-1].strip()
        parts = parts[:-1]
        if not token:
            raise TsFormatError("empty class label", line_number, line)

    dims = []
    for part in parts:
        cells = [cell.strip() for cell in part.split(",")]
        if "?" in cells:
            raise TsFormatError("missing values are not supported", line_number, line)
        try:
            dims.append([float(cell) for cell in cells])
        except ValueError:
            raise TsFormatError("non-numeric value", line_number, line)
    if len({len(d) for d in dims}) != 1:
        raise TsFormatError("dimensions of one sample have different lengths", line_number, line)
    values = np.array(dims, dtype=np.float64)
    if not np.isfinite(values).all():
        raise TsFormatError("non-finite value", line_number, line)
    return values.T, token


def write_ts_file(dataset: TimeSeriesDataset, path):
    """
    Writes a dataset in the ``.ts`` format.

    Values are written with ``repr`` so that parsing returns them exactly.

    :param dataset: The dataset to write.
    :type dataset: TimeSeriesDataset
    :param path: The destination file.
    :type path: str or os.PathLike
    """
    has_labels = dataset.labels is not None
    lines = [
        f"@problemName {dataset.name}",
        "@timeStamps false",
        "@missing false",
        f"@univariate {'true' if dataset.n_dims == 1 else 'false'}",
        f"@dimensions {dataset.n_dims}",
        "@equalLength true",
        f"@seriesLength {dataset.length}",
    ]
    if has_labels:
        lines.append("@classLabel true " + " ".join(dataset.class_names))
    else:
        lines.append("@classLabel false")
    lines.append("@data")
    for i, sample in enumerate(dataset.samples):
        body = ":".join(",".join(repr(float(v)) for v in sample[:, d]) for d in range(dataset.n_dims))
        if has_labels:
            body += ":" + dataset.class_names[dataset.labels[i]]
        lines.append(body)
    with open(path, "w", encoding="utf-8") as f:
        f.write("\n".join(lines) + "\n")


def candidate_paths(name, data_dir, split):
    """
    Lists the file paths tried for one split of a named dataset.

    :rtype: list[str]
    """
    suffix = split.upper()
    return [
        os.path.join(data_dir, name, f"{name}_{suffix}.ts"),
        os.path.join(data_dir, f"{name}_{suffix}.ts"),
    ]


def load_uea_dataset(name, data_dir="data", split="published", path=None) -> TimeSeriesDataset:
    """
    Resolves and loads a UEA dataset.

    Resolution order: the explicit ``path``, then ``data_dir``, then an error
    listing every location tried.

    :param name: The dataset name, e.g. "BasicMotions".
    :type name: str
    :param data_dir: The local archive directory, defaults to "data".
    :type data_dir: str, optional
    :param split: One of train, test, both or published, defaults to "published".
    :type split: str, optional
    :param path: An explicit ``.ts`` file, defaults to None.
    :type path: str, optional
    :raises DatasetNotFoundError: If no file is found.
    :rtype: TimeSeriesDataset
    """
    if split not in SPLITS:
        raise ValueError(f"split must be one of {', '.join(SPLITS)}, got {split!r}")
    searched = []
    if path is not None:
        if os.path.isfile(path):
            return parse_ts_file(path)
        searched.append(str(path))

    if split == "both":
        wanted = ["train", "test"]
    elif split == "published":
        wanted = [PUBLISHED_SPLIT.get(name, "train")]
    else:
        wanted = [split]
    parts = []
    for part in wanted:
        candidates = candidate_paths(name, data_dir, part)
        found = next((c for c in candidates if os.path.isfile(c)), None)
        if found is None:
            raise DatasetNotFoundError(name, searched + candidates)
        parts.append(parse_ts_file(found))

    dataset = concatenate(parts, name=name)
    check_against_registry(dataset, split)
    return dataset


def check_against_registry(dataset, split):
    """
    Logs a warning when a loaded dataset does not match its registered statistics.

    :return: True when the statistics match or the dataset is not registered.
    :rtype: bool
    """
    expected = UEA_DATASETS.get(dataset.name)
    if expected is None:
        return True
    found = (dataset.n_samples, dataset.length, dataset.n_dims, dataset.g_hint)
    if found != expected:
        logger.warning("dataset statistics differ from the registry",
                       extra={"dataset": dataset.name, "split": split, "expected": list(expected),
                              "found": list(found)})
        return False
    return True
