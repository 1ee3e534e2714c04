import os
import sys

import mpmath
import pytest

# Add project root to path to allow importing 'superosc', 'config' and 'models'
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), "..")))

from click.testing import CliRunner

from config import Config, load_problem_config
from models import PrecisionPolicy

PROBLEMS_DIR = os.path.abspath(
    os.path.join(os.path.dirname(__file__), "..", "static", "problems")
)


@pytest.fixture(autouse=True)
def default_precision():
    """Every test starts from mpmath's default working precision."""
    with mpmath.workprec(128):
        yield


@pytest.fixture
def policy():
    """A 128-bit policy with the default escalation settings."""
    return PrecisionPolicy(bits=128)


@pytest.fixture
def settings(monkeypatch):
    """Settings without any SUPEROSC_* environment overrides."""
    for key in list(os.environ):
        if key.startswith("SUPEROSC_"):
            monkeypatch.delenv(key)
    return Config()


@pytest.fixture
def problem_path():
    """Path of a shipped example problem, by file stem."""

    def path(name):
        return os.path.join(PROBLEMS_DIR, f"{name}.yaml")

    return path


@pytest.fixture
def problem_config(problem_path):
    """Loaded ProblemConfig of a shipped example problem, by file stem."""

    def load(name):
        return load_problem_config(problem_path(name))

    return load


@pytest.fixture
def runner():
    """A CLI runner with stdout and stderr kept apart."""
    return CliRunner(mix_stderr=False)


@pytest.fixture
def cli(settings):
    """The click command group, built from clean settings."""
    from superosc import create_cli

    return create_cli(settings)
