"""
This module defines the experiment configuration.

Defaults are not published values; they are conservative choices that keep
CPU training tractable. Every field can be set from a JSON document or a
command-line flag.
"""
import json
import math
from dataclasses import asdict, dataclass, field, fields, replace

from errors import ArgumentError

MASK_POLICIES = ("evolving", "random", "uniform", "variance", "frequency")
LR_SCHEDULES = ("cosine", "constant")
SYNTHETIC_KEY = "synthetic"


@dataclass
class ContrastConfig:
    """
    Settings of the clustering-guided contrastive loss.

    :param temperature: The softmax temperature, must be positive.
    :type temperature: float
    :param positive_sampling_seed: Seed of the positive-partner draw.
    :type positive_sampling_seed: int
    """
    temperature: float = 0.5
    positive_sampling_seed: int = 0

    def __post_init__(self):
        self.temperature = ExperimentConfig.validate_positive_real(self.temperature, "temperature")


@dataclass
class ExperimentConfig:
    """
    Every hyperparameter of a training run.

    With ``use_mev`` off the model runs a single view, so ``n_views`` is
    forced to 1.
    """
    n_views: int = 3
    embed_dim: int = 64
    key_dim: int = 32
    keep_ratio: float = 0.75
    temperature: float = 0.5
    alpha: float = 1.0
    beta: float = 0.5
    learning_rate: float = 1e-3
    lr_schedule: str = "cosine"
    epochs: int = 200
    seeds: list = field(default_factory=lambda: [0, 1, 2])
    n_clusters: int = None
    use_ivm: bool = True
    use_mev: bool = True
    use_intra: bool = True
    use_inter: bool = True
    use_contra: bool = True
    mask_policy: str = "evolving"
    sharpness: float = 10.0
    kernel_widths: list = field(default_factory=lambda: [3, 5, 9, 15])
    convergence_tol: float = 1e-6
    patience: int = 10
    kmeans_restarts: int = 10
    kmeans_max_iter: int = 300
    attention_chunk: int = 512
    n_jobs: int = 1

    def __post_init__(self):
        self.n_views = self.validate_positive_int(self.n_views, "n_views")
        self.embed_dim = self.validate_positive_int(self.embed_dim, "embed_dim")
        self.key_dim = self.validate_positive_int(self.key_dim, "key_dim")
        self.keep_ratio = self.validate_keep_ratio(self.keep_ratio)
        self.temperature = self.validate_positive_real(self.temperature, "temperature")
        self.alpha = self.validate_weight(self.alpha, "alpha")
        self.beta = self.validate_weight(self.beta, "beta")
        self.learning_rate = self.validate_positive_real(self.learning_rate, "learning_rate")
        self.lr_schedule = self.validate_lr_schedule(self.lr_schedule)
        self.epochs = self.validate_epochs(self.epochs)
        self.seeds = self.validate_seeds(self.seeds)
        if self.n_clusters is not None:
            self.n_clusters = self.validate_positive_int(self.n_clusters, "n_clusters")
        self.mask_policy = self.validate_mask_policy(self.mask_policy)
        self.sharpness = self.validate_positive_real(self.sharpness, "sharpness")
        self.kernel_widths = [self.validate_kernel_width(k) for k in self.kernel_widths]
        if not self.kernel_widths:
            raise ArgumentError("kernel_widths cannot be empty")
        self.convergence_tol = self.validate_weight(self.convergence_tol, "convergence_tol")
        self.patience = self.validate_positive_int(self.patience, "patience")
        self.kmeans_restarts = self.validate_positive_int(self.kmeans_restarts, "kmeans_restarts")
        self.kmeans_max_iter = self.validate_positive_int(self.kmeans_max_iter, "kmeans_max_iter")
        self.attention_chunk = self.validate_positive_int(self.attention_chunk, "attention_chunk")
        self.n_jobs = int(self.n_jobs)
        if not self.use_mev:
            self.n_views = 1

    @staticmethod
    def validate_positive_int(value, name):
        """
        Validates that a value is an integer of at least 1.

        :param value: The value to validate.
        :type value: int
        :param name: The field name used in the error message.
        :type name: str
        :raises ArgumentError: If the value is not a positive integer.
        :return: The validated integer.
        :rtype: int
        """
        try:
            as_int = int(value)
        except (TypeError, ValueError):
            raise ArgumentError(f"{name} must be an integer, got {value!r}")
        if as_int != value and not isinstance(value, str):
            raise ArgumentError(f"{name} must be an integer, got {value!r}")
        if as_int < 1:
            raise ArgumentError(f"{name} must be at least 1, got {as_int}")
        return as_int

    @staticmethod
    def validate_positive_real(value, name):
        """
        Validates that a value is a finite real strictly above zero.

        :raises ArgumentError: If the value is not a positive real.
        :rtype: float
        """
        try:
            as_float = float(value)
        except (TypeError, ValueError):
            raise ArgumentError(f"{name} must be a number, got {value!r}")
        if not math.isfinite(as_float) or as_float <= 0:
            raise ArgumentError(f"{name} must be positive, got {as_float}")
        return as_float

    @staticmethod
    def validate_weight(value, name):
        """
        Validates a nonnegative loss weight or tolerance.

        :raises ArgumentError: If the value is negative or not finite.
        :rtype: float
        """
        try:
            as_float = float(value)
        except (TypeError, ValueError):
            raise ArgumentError(f"{name} must be a number, got {value!r}")
        if not math.isfinite(as_float) or as_float < 0:
            raise ArgumentError(f"{name} must be nonnegative, got {as_float}")
        return as_float

    @staticmethod
    def validate_keep_ratio(value):
        """
        Validates that the keep ratio lies in (0, 1].

        :param value: The fraction of timestamps a mask keeps.
        :type value: float
        :raises ArgumentError: If the ratio is outside (0, 1].
        :return: The validated ratio.
        :rtype: float
        """
        try:
            ratio = float(value)
        except (TypeError, ValueError):
            raise ArgumentError(f"keep_ratio must be a number, got {value!r}")
        if not (0.0 < ratio <= 1.0):
            raise ArgumentError(f"keep_ratio must be in (0, 1], got {ratio}")
        return ratio

    @staticmethod
    def validate_epochs(value):
        """
        Validates the epoch budget; zero epochs is allowed.

        :raises ArgumentError: If the value is negative or not an integer.
        :rtype: int
        """
        try:
            epochs = int(value)
        except (TypeError, ValueError):
            raise ArgumentError(f"epochs must be an integer, got {value!r}")
        if epochs < 0:
            raise ArgumentError(f"epochs must be nonnegative, got {epochs}")
        return epochs

    @staticmethod
    def validate_seeds(value):
        """
        Validates the seed list.

        Accepts a list of integers or a comma-separated string.

        :raises ArgumentError: If the list is empty or holds non-integers.
        :rtype: list[int]
        """
        if isinstance(value, str):
            value = [token for token in value.split(",") if token.strip()]
        try:
            seeds = [int(seed) for seed in value]
        except (TypeError, ValueError):
            raise ArgumentError(f"seeds must be integers, got {value!r}")
        if not seeds:
            raise ArgumentError("seeds cannot be empty")
        return seeds

    @staticmethod
    def validate_mask_policy(value):
        """
        Validates the masking policy name.

        :raises ArgumentError: If the name is not a known policy.
        :rtype: str
        """
        policy = str(value).strip().lower()
        if policy not in MASK_POLICIES:
            raise ArgumentError(f"mask_policy must be one of {', '.join(MASK_POLICIES)}, got {value!r}")
        return policy

    @staticmethod
    def validate_lr_schedule(value):
        """
        Validates the learning-rate schedule name.

        :raises ArgumentError: If the name is not a known schedule.
        :rtype: str
        """
        schedule = str(value).strip().lower()
        if schedule not in LR_SCHEDULES:
            raise ArgumentError(f"lr_schedule must be one of {', '.join(LR_SCHEDULES)}, got {value!r}")
        return schedule

    @staticmethod
    def validate_kernel_width(value):
        """
        Validates a convolution kernel width; widths must be odd for same padding.

        :raises ArgumentError: If the width is not a positive odd integer.
        :rtype: int
        """
        width = ExperimentConfig.validate_positive_int(value, "kernel width")
        if width % 2 == 0:
            raise ArgumentError(f"kernel widths must be odd, got {width}")
        return width

    def kernel_width(self, view):
        """
        Returns the kernel width of a view, cycling through ``kernel_widths``.

        :param view: The view index.
        :type view: int
        :rtype: int
        """
        return self.kernel_widths[view % len(self.kernel_widths)]

    def contrast(self, seed):
        """
        Builds the contrastive settings for one epoch.

        :param seed: The positive-sampling seed.
        :type seed: int
        :rtype: ContrastConfig
        """
        return ContrastConfig(temperature=self.temperature, positive_sampling_seed=seed)

    def with_overrides(self, **overrides):
        """
        Returns a copy with the given non-None fields replaced.

        :return: A new validated configuration.
        :rtype: ExperimentConfig
        """
        changes = {key: value for key, value in overrides.items() if value is not None}
        return replace(self, **changes)

    def to_dict(self):
        """
        Converts the configuration to a dictionary for serialization.

        :rtype: dict
        """
        return asdict(self)

    @classmethod
    def from_dict(cls, data):
        """
        Creates a configuration from a dictionary.

        :param data: Field values; missing fields take their defaults.
        :type data: dict
        :raises ArgumentError: If the dictionary holds unknown keys.
        :rtype: ExperimentConfig
        """
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ArgumentError(f"Unknown configuration keys: {', '.join(unknown)}")
        return cls(**data)

    @classmethod
    def from_json(cls, path):
        """
        Reads a configuration document. A nested ``"synthetic"`` object is
        ignored here; it describes the dataset, not the run.

        :param path: The path to the JSON document.
        :type path: str
        :rtype: ExperimentConfig
        """
        with open(path, "r", encoding="utf-8") as f:
            data = json.load(f)
        if not isinstance(data, dict):
            raise ArgumentError(f"{path}: the configuration must be a JSON object")
        data.pop(SYNTHETIC_KEY, None)
        return cls.from_dict(data)
