"""
Turns a validated ProblemConfig into library objects: series, nodes, coefficients,
the MultivarProblem for a given n, the precision policy and the sweep grid.
"""

import logging
from fractions import Fraction

import mpmath

from config import Config
from constants import DEFAULT_B_ENTIRE, MODE_SUPEROSCILLATION, SCHEME_CUSTOM
from models import GridSpec, MultivarProblem, PrecisionPolicy
from superosc.coefficients import solve_coefficients
from superosc.convergence import default_grid
from superosc.errors import ConfigError
from superosc.nodes import generate_nodes
from superosc.numbers import is_inf, lt, magnitude, parse_number, smallest, to_mp
from superosc.sequences import validate_problem
from superosc.series import builtin_series, custom_series

logger = logging.getLogger(__name__)


def build_series(spec, settings=None):
    settings = settings or Config()
    if spec.builtin is not None:
        return builtin_series(spec.builtin, **spec.params)
    return custom_series(spec.coeffs, spec.radius, settings.infinity_threshold)


def build_nodes(cfg, n=None, policy=None):
    section = cfg.nodes
    if section.scheme == SCHEME_CUSTOM:
        return generate_nodes(SCHEME_CUSTOM, custom_points=section.custom_points, policy=policy)
    return generate_nodes(section.scheme, n or section.n, policy=policy)


def default_B(G):
    """R/(8e) for finite R = min_l R_l, 1 when every series is entire."""
    R = smallest(g.radius for g in G)
    if is_inf(R):
        return Fraction(DEFAULT_B_ENTIRE)
    return to_mp(R) / (8 * mpmath.e)


def policy_for(cfg, n, settings=None, bits=None):
    """
    Precision for order n, layered as defaults < problem file < environment < CLI.
    Environment values only win when they were actually set.
    """
    settings = settings or Config()
    overridden = settings.model_fields_set
    section = cfg.precision
    chosen_bits = bits or (settings.bits if "bits" in overridden else None) or section.bits

    def pick(key):
        return getattr(settings, key) if key in overridden else getattr(section, key)

    return PrecisionPolicy.for_order(
        n,
        bits=chosen_bits,
        max_bits=pick("max_bits"),
        escalation_factor=pick("escalation_factor"),
        agreement_tol=Fraction(pick("agreement_tol")),
    )


def _truncation(cfg, settings):
    overridden = settings.model_fields_set

    def pick(key):
        return getattr(settings, key) if key in overridden else getattr(cfg.truncation, key)

    return parse_number(pick("tail_tol")), pick("series_n_max"), pick("symbol_n_max")


def build_problem(cfg, n=None, settings=None, policy=None):
    """
    The MultivarProblem of order n. Must run under the precision it will be
    evaluated at, since irrational nodes and coefficients are rounded here.
    """
    settings = settings or Config()
    G = tuple(build_series(spec, settings) for spec in cfg.G)
    R = smallest(g.radius for g in G)
    a = parse_number(cfg.a)
    if cfg.mode == MODE_SUPEROSCILLATION and not lt(magnitude(a), R):
        raise ConfigError(
            f"|a| = {magnitude(a)} must be below R = {R}: the multivariate sequence only "
            f"converges for targets inside the common disc of convergence of every G_l"
        )
    nodes = build_nodes(cfg, n, policy)
    coeffs = solve_coefficients(nodes, a)
    B = parse_number(cfg.B) if cfg.B is not None else default_B(G)
    tail_tol, series_n_max, symbol_n_max = _truncation(cfg, settings)
    problem = MultivarProblem(
        coeffs,
        G,
        mode=cfg.mode,
        B=B,
        tail_tol=tail_tol,
        series_n_max=series_n_max,
        symbol_n_max=symbol_n_max,
        b_min=parse_number(settings.b_min),
    )
    return validate_problem(problem)


def problem_factory(cfg, settings=None):
    """n -> MultivarProblem, for the convergence sweep."""
    settings = settings or Config()

    def factory(n):
        return build_problem(cfg, n, settings)

    return factory


def grid_for(cfg, problem, points_per_axis=None):
    """The configured grid box, or the mode's default box."""
    points = points_per_axis or cfg.grid.points_per_axis
    if cfg.grid.box is None:
        return default_grid(problem, points)
    box = tuple((Fraction(low), Fraction(high)) for low, high in cfg.grid.box)
    return GridSpec(box, points)


def parse_n_list(text):
    """"4:4:24" (start:step:stop), "4,8,12" or a single order."""
    text = text.strip()
    try:
        if ":" in text:
            start, step, stop = (int(v) for v in text.split(":"))
            if step < 1:
                raise ConfigError(f"n step must be positive, got {step}")
            return list(range(start, stop + 1, step))
        return [int(v) for v in text.split(",") if v]
    except ValueError as e:
        raise ConfigError(f"Could not parse n list {text!r}: {e}") from e


def parse_point(text):
    """"0.3,0.7" into a tuple of exact numbers."""
    try:
        return tuple(parse_number(v) for v in text.split(","))
    except ValueError as e:
        raise ConfigError(f"Could not parse point {text!r}: {e}") from e
