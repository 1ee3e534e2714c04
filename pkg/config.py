import hashlib
import os
from fractions import Fraction
from typing import Literal

import yaml
from dotenv import load_dotenv
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

from constants import (
    ALL_SCHEMES,
    BUILTIN_SERIES,
    DEFAULT_AGREEMENT_TOL,
    DEFAULT_B_MIN,
    DEFAULT_ESCALATION_FACTOR,
    DEFAULT_INFINITY_THRESHOLD,
    DEFAULT_MAX_BITS,
    DEFAULT_NORM_MARGIN,
    DEFAULT_N_LIST,
    DEFAULT_POINTS_PER_AXIS,
    DEFAULT_SERIES_N_MAX,
    DEFAULT_SYMBOL_N_MAX,
    DEFAULT_TAIL_TOL,
    MIN_BITS,
    MODE_SUPEROSCILLATION,
    SCHEME_CUSTOM,
)

basedir = os.path.abspath(os.path.dirname(__file__))
load_dotenv(os.path.join(basedir, ".env"))


def canonical_number(value, allow_inf=False, allow_complex=False):
    """
    Normalizes a user supplied number to its canonical string form.
    Accepts ints, floats, Fractions, decimal strings and exact rationals "p/q".
    """
    if isinstance(value, bool):
        raise ValueError(f"Expected a number, got boolean {value!r}")
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        if value != value:
            raise ValueError("NaN is not a valid number")
        if value in (float("inf"), float("-inf")):
            if allow_inf and value > 0:
                return "inf"
            raise ValueError("Infinite values are not allowed here")
        return repr(value)
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, complex):
        if not allow_complex:
            raise ValueError(f"Complex value {value!r} is not allowed here")
        return repr(value).strip("()")
    if isinstance(value, str):
        text = value.strip().replace(" ", "")
        if allow_inf and text.lower() in ("inf", "infinity", "+inf"):
            return "inf"
        try:
            Fraction(text)
            return text
        except (ValueError, ZeroDivisionError):
            pass
        if allow_complex:
            try:
                complex(text)
                return text
            except ValueError:
                pass
        raise ValueError(f"Could not parse number {value!r}")
    raise ValueError(f"Unsupported number type {type(value).__name__}")


class Config(BaseSettings):
    """Process-wide settings; every key can be overridden with SUPEROSC_<KEY>."""

    model_config = SettingsConfigDict(env_prefix="SUPEROSC_", extra="ignore")

    bits: int | None = None
    escalation_factor: int = DEFAULT_ESCALATION_FACTOR
    agreement_tol: str = DEFAULT_AGREEMENT_TOL
    max_bits: int = DEFAULT_MAX_BITS
    tail_tol: str = DEFAULT_TAIL_TOL
    series_n_max: int = DEFAULT_SERIES_N_MAX
    symbol_n_max: int = DEFAULT_SYMBOL_N_MAX
    b_min: str = DEFAULT_B_MIN
    norm_margin: str = DEFAULT_NORM_MARGIN
    infinity_threshold: str = DEFAULT_INFINITY_THRESHOLD
    log_level: str = "WARNING"

    @field_validator("bits")
    @classmethod
    def _check_bits(cls, value):
        if value is not None and value < MIN_BITS:
            raise ValueError(f"bits must be at least {MIN_BITS}")
        return value


# --- Problem files ---


class NodesSection(BaseModel):
    model_config = ConfigDict(extra="forbid")

    scheme: Literal["equispaced", "chebyshev", "custom"] = "equispaced"
    n: int = Field(default=8, ge=1)
    custom_points: list[str] | None = None

    @field_validator("custom_points", mode="before")
    @classmethod
    def _canonical_points(cls, value):
        if value is None:
            return value
        return [canonical_number(v) for v in value]

    @model_validator(mode="after")
    def _custom_needs_points(self):
        if self.scheme not in ALL_SCHEMES:
            raise ValueError(f"Unknown node scheme {self.scheme}")
        if self.scheme == SCHEME_CUSTOM:
            if not self.custom_points or len(self.custom_points) < 2:
                raise ValueError("custom scheme needs at least two custom_points")
            self.n = len(self.custom_points) - 1
        return self


class SeriesSpec(BaseModel):
    """Either a builtin series with parameters or an explicit coefficient list."""

    model_config = ConfigDict(extra="forbid")

    builtin: str | None = None
    params: dict[str, str] = Field(default_factory=dict)
    coeffs: list[str] | None = None
    radius: str | None = None

    @field_validator("params", mode="before")
    @classmethod
    def _canonical_params(cls, value):
        if value is None:
            return {}
        return {str(k): canonical_number(v) for k, v in value.items()}

    @field_validator("coeffs", mode="before")
    @classmethod
    def _canonical_coeffs(cls, value):
        if value is None:
            return value
        return [canonical_number(v, allow_complex=True) for v in value]

    @field_validator("radius", mode="before")
    @classmethod
    def _canonical_radius(cls, value):
        if value is None:
            return value
        return canonical_number(value, allow_inf=True)

    @model_validator(mode="after")
    def _exactly_one_source(self):
        if (self.builtin is None) == (self.coeffs is None):
            raise ValueError("a series needs exactly one of 'builtin' or 'coeffs'")
        if self.builtin is not None:
            if self.builtin not in BUILTIN_SERIES:
                raise ValueError(
                    f"Unknown builtin series {self.builtin!r}; "
                    f"choose from {sorted(BUILTIN_SERIES)}"
                )
            expected = set(BUILTIN_SERIES[self.builtin])
            if set(self.params) != expected:
                raise ValueError(
                    f"builtin {self.builtin!r} takes parameters {sorted(expected)}, "
                    f"got {sorted(self.params)}"
                )
            if self.radius is not None:
                raise ValueError("builtin series have a known radius; drop 'radius'")
        else:
            if not self.coeffs:
                raise ValueError("'coeffs' must not be empty")
            if self.radius is None:
                raise ValueError("explicit coefficient lists need a 'radius'")
            if self.params:
                raise ValueError("'params' only applies to builtin series")
        return self


class GridSection(BaseModel):
    model_config = ConfigDict(extra="forbid")

    box: list[list[str]] | None = None
    points_per_axis: int = Field(default=DEFAULT_POINTS_PER_AXIS, ge=2)

    @field_validator("box", mode="before")
    @classmethod
    def _canonical_box(cls, value):
        if value is None:
            return value
        box = []
        for interval in value:
            if len(interval) != 2:
                raise ValueError("each box entry must be a [low, high] pair")
            low, high = (canonical_number(v) for v in interval)
            if Fraction(low) > Fraction(high):
                raise ValueError(f"empty interval [{low}, {high}]")
            box.append([low, high])
        return box


class PrecisionSection(BaseModel):
    model_config = ConfigDict(extra="forbid")

    bits: int | None = Field(default=None, ge=MIN_BITS)
    escalation_factor: int = Field(default=DEFAULT_ESCALATION_FACTOR, ge=2)
    agreement_tol: str = DEFAULT_AGREEMENT_TOL
    max_bits: int = Field(default=DEFAULT_MAX_BITS, ge=MIN_BITS)

    @field_validator("agreement_tol", mode="before")
    @classmethod
    def _canonical_tol(cls, value):
        value = canonical_number(value)
        if not 0 < Fraction(value) < 1:
            raise ValueError("agreement_tol must lie strictly between 0 and 1")
        return value


class TruncationSection(BaseModel):
    model_config = ConfigDict(extra="forbid")

    tail_tol: str = DEFAULT_TAIL_TOL
    series_n_max: int = Field(default=DEFAULT_SERIES_N_MAX, ge=1)
    symbol_n_max: int = Field(default=DEFAULT_SYMBOL_N_MAX, ge=1)

    @field_validator("tail_tol", mode="before")
    @classmethod
    def _canonical_tol(cls, value):
        value = canonical_number(value)
        if Fraction(value) <= 0:
            raise ValueError("tail_tol must be positive")
        return value


class ProblemConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    nodes: NodesSection = Field(default_factory=NodesSection)
    a: str
    G: list[SeriesSpec] = Field(min_length=1)
    mode: Literal["superoscillation", "supershift"] = MODE_SUPEROSCILLATION
    B: str | None = None
    grid: GridSection = Field(default_factory=GridSection)
    precision: PrecisionSection = Field(default_factory=PrecisionSection)
    truncation: TruncationSection = Field(default_factory=TruncationSection)
    n_list: list[int] = Field(default_factory=lambda: list(DEFAULT_N_LIST))

    @field_validator("a", mode="before")
    @classmethod
    def _canonical_a(cls, value):
        return canonical_number(value)

    @field_validator("B", mode="before")
    @classmethod
    def _canonical_b(cls, value):
        if value is None:
            return value
        value = canonical_number(value)
        if Fraction(value) <= 0:
            raise ValueError("B must be positive")
        return value

    @field_validator("n_list")
    @classmethod
    def _strictly_increasing(cls, value):
        if any(n < 1 for n in value):
            raise ValueError("n_list entries must be positive")
        if any(b <= a for a, b in zip(value, value[1:])):
            raise ValueError("n_list must be strictly increasing")
        return value

    @model_validator(mode="after")
    def _grid_matches_dimension(self):
        if self.grid.box is not None and len(self.grid.box) != len(self.G):
            raise ValueError(
                f"grid box has {len(self.grid.box)} axes but {len(self.G)} series were given"
            )
        return self

    @property
    def dimension(self):
        return len(self.G)


def parse_problem_config(text):
    """Parses a YAML (or JSON) problem document into a validated ProblemConfig."""
    data = yaml.safe_load(text)
    if not isinstance(data, dict):
        raise ValueError("A problem file must contain a mapping at the top level")
    return ProblemConfig.model_validate(data)


def load_problem_config(path):
    with open(path, "r", encoding="utf-8") as f:
        return parse_problem_config(f.read())


def dump_problem_config(problem_config):
    """Serializes a ProblemConfig to its canonical YAML form."""
    return yaml.safe_dump(
        problem_config.model_dump(mode="json"), sort_keys=False, default_flow_style=None
    )


def config_hash(problem_config):
    return hashlib.sha256(dump_problem_config(problem_config).encode()).hexdigest()
