from fractions import Fraction

import pytest
from pydantic import ValidationError

from config import (
    Config,
    canonical_number,
    config_hash,
    dump_problem_config,
    parse_problem_config,
)

MINIMAL = """
a: "3/2"
G:
  - builtin: identity
"""


# --- Tests for canonical_number ---


def test_canonical_number_forms():
    assert canonical_number(2) == "2"
    assert canonical_number(0.5) == "0.5"
    assert canonical_number(Fraction(1, 3)) == "1/3"
    assert canonical_number(" 3 / 2 ") == "3/2"
    assert canonical_number("inf", allow_inf=True) == "inf"
    assert canonical_number(1 + 2j, allow_complex=True) == "1+2j"


def test_canonical_number_rejections():
    with pytest.raises(ValueError):
        canonical_number(True)
    with pytest.raises(ValueError):
        canonical_number("inf")
    with pytest.raises(ValueError):
        canonical_number(float("nan"))
    with pytest.raises(ValueError):
        canonical_number("1+2j")
    with pytest.raises(ValueError):
        canonical_number("three")


# --- Tests for problem files ---


def test_minimal_problem_gets_defaults():
    cfg = parse_problem_config(MINIMAL)
    assert cfg.nodes.scheme == "equispaced"
    assert cfg.nodes.n == 8
    assert cfg.mode == "superoscillation"
    assert cfg.B is None
    assert cfg.n_list == [4, 8, 12, 16, 20, 24]
    assert cfg.dimension == 1


def test_canonical_dump_round_trips(problem_config):
    """
    GIVEN a shipped problem file
    WHEN it is dumped to canonical YAML and parsed back
    THEN the same configuration and the same hash result.
    """
    cfg = problem_config("square_sin_2d")
    again = parse_problem_config(dump_problem_config(cfg))
    assert again == cfg
    assert config_hash(again) == config_hash(cfg)
    assert cfg.grid.box == [["-1", "1"], ["-1", "1"]]


def test_hash_changes_with_content():
    first = parse_problem_config(MINIMAL)
    second = parse_problem_config(MINIMAL.replace("3/2", "2"))
    assert config_hash(first) != config_hash(second)


def test_custom_nodes_set_n():
    cfg = parse_problem_config(
        MINIMAL + "nodes:\n  scheme: custom\n  n: 40\n  custom_points: [1, 0.5, -1]\n"
    )
    assert cfg.nodes.n == 2
    assert cfg.nodes.custom_points == ["1", "0.5", "-1"]


@pytest.mark.parametrize(
    "document",
    [
        "G:\n  - builtin: identity\n",
        "a: abc\nG:\n  - builtin: identity\n",
        "a: 1\nG: []\n",
        "a: 1\nG:\n  - builtin: tan\n",
        "a: 1\nG:\n  - builtin: monomial\n",
        "a: 1\nG:\n  - builtin: identity\n    radius: 2\n",
        "a: 1\nG:\n  - coeffs: [1, 2]\n",
        "a: 1\nG:\n  - builtin: identity\n    coeffs: [1]\n    radius: inf\n",
        "a: 1\nB: 0\nG:\n  - builtin: identity\n",
        "a: 1\nmode: sideways\nG:\n  - builtin: identity\n",
        "a: 1\nn_list: [8, 4]\nG:\n  - builtin: identity\n",
        "a: 1\ngrid:\n  box: [[0, 1], [0, 1]]\nG:\n  - builtin: identity\n",
        "a: 1\ngrid:\n  box: [[1, 0]]\nG:\n  - builtin: identity\n",
        "a: 1\nprecision:\n  agreement_tol: 1\nG:\n  - builtin: identity\n",
        "a: 1\nprecision:\n  bits: 32\nG:\n  - builtin: identity\n",
        "a: 1\nnodes:\n  scheme: custom\n  custom_points: [0]\nG:\n  - builtin: identity\n",
        "a: 1\ncolour: red\nG:\n  - builtin: identity\n",
    ],
)
def test_invalid_problems_are_rejected(document):
    with pytest.raises(ValidationError):
        parse_problem_config(document)


def test_problem_must_be_a_mapping():
    with pytest.raises(ValueError):
        parse_problem_config("- 1\n- 2\n")


# --- Tests for process settings ---


def test_settings_read_environment(monkeypatch, settings):
    """
    GIVEN SUPEROSC_BITS and SUPEROSC_TAIL_TOL in the environment
    WHEN settings are loaded
    THEN they are applied and marked as explicitly set.
    """
    assert settings.bits is None
    monkeypatch.setenv("SUPEROSC_BITS", "256")
    monkeypatch.setenv("SUPEROSC_TAIL_TOL", "1e-30")
    loaded = Config()
    assert loaded.bits == 256
    assert loaded.tail_tol == "1e-30"
    assert {"bits", "tail_tol"} <= loaded.model_fields_set


def test_settings_reject_low_bits(monkeypatch, settings):
    monkeypatch.setenv("SUPEROSC_BITS", "32")
    with pytest.raises(ValidationError):
        Config()
