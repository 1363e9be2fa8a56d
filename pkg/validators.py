"""
This module provides click callbacks that validate command-line options.

Each callback wraps the matching ExperimentConfig validator and reports
failures as ``click.BadParameter``.
"""
import click

from config import ExperimentConfig


def report(validator, *args):
    """
    Runs a validator and converts its ValueError into a usage error.

    :raises click.BadParameter: If the validator rejects the value.
    """
    try:
        return validator(*args)
    except ValueError as e:
        raise click.BadParameter(str(e))


def validate_keep_ratio(ctx, param, value):
    """
    Validates ``--keep-ratio``.

    :return: The ratio, or None when the option is absent.
    :rtype: float or None
    """
    if value is None:
        return None
    return report(ExperimentConfig.validate_keep_ratio, value)


def validate_epochs(ctx, param, value):
    """
    Validates ``--epochs``.

    :rtype: int or None
    """
    if value is None:
        return None
    return report(ExperimentConfig.validate_epochs, value)


def validate_seeds(ctx, param, value):
    """
    Validates ``--seeds`` given as a comma-separated list.

    :rtype: list[int] or None
    """
    if value is None:
        return None
    return report(ExperimentConfig.validate_seeds, value)


def validate_positive(ctx, param, value):
    """
    Validates an optional positive integer option.

    :rtype: int or None
    """
    if value is None:
        return None
    return report(ExperimentConfig.validate_positive_int, value, param.name)


def validate_int_list(ctx, param, value):
    """
    Validates a comma-separated list of positive integers, e.g. ``--grid-T 64,128``.

    :rtype: list[int] or None
    """
    if value is None:
        return None
    tokens = [token for token in value.split(",") if token.strip()]
    if not tokens:
        raise click.BadParameter("the list cannot be empty")
    return [report(ExperimentConfig.validate_positive_int, token.strip(), param.name) for token in tokens]
