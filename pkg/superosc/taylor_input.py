"""
Reads a function of the growth space from a YAML/JSON file. Accepted shapes:

    wave: 2                      # e^(2 i xi)
    waves: [[1, 1/2], [-3, 2]]   # sum of c e^(i lambda xi)
    taylor: [1, 0, -1/2, ...]    # Taylor coefficients a_0 .. a_J, J >= 8
"""

import logging

import yaml

from constants import DEFAULT_B_MIN
from models import ExponentialWave, GrowthFunction, WaveCombination
from superosc.errors import ConfigError, ProblemFileError
from superosc.growth_space import certificate_fit
from superosc.numbers import parse_number

logger = logging.getLogger(__name__)


def growth_function_from_data(data, b_min=DEFAULT_B_MIN):
    if not isinstance(data, dict) or len(data) != 1:
        raise ConfigError("a function file needs exactly one of 'wave', 'waves' or 'taylor'")
    (kind, value), = data.items()
    if kind == "wave":
        return ExponentialWave(parse_number(value), b_min=b_min)
    if kind == "waves":
        try:
            terms = [(parse_number(c), parse_number(lam)) for c, lam in value]
        except (TypeError, ValueError) as e:
            raise ConfigError(f"'waves' must be a list of [c, lambda] pairs: {e}") from e
        if not terms:
            raise ConfigError("'waves' must not be empty")
        return WaveCombination(terms, b_min=b_min)
    if kind == "taylor":
        try:
            values = [parse_number(v) for v in value]
        except (TypeError, ValueError) as e:
            raise ConfigError(f"'taylor' must be a list of numbers: {e}") from e
        horizon = len(values) - 1
        certificate = certificate_fit(lambda j: values[j], horizon=horizon, b_min=b_min)
        logger.debug(f"Fitted certificate for {len(values)} Taylor coefficients")
        return GrowthFunction(
            lambda j: values[j], certificate, label=f"taylor[{len(values)}]", horizon=horizon
        )
    raise ConfigError(f"Unknown function kind {kind!r}; use 'wave', 'waves' or 'taylor'")


def load_growth_function(path, b_min=DEFAULT_B_MIN):
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = yaml.safe_load(f)
    except OSError as e:
        raise ProblemFileError(f"Could not read {path}: {e}") from e
    return growth_function_from_data(data, b_min)
