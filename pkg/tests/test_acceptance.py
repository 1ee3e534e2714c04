"""
End-to-end checks on the shipped problems: dual routes, convergence sweeps,
continuity probes and precision robustness. Slow; run with `pytest -m integration`.
"""

from fractions import Fraction

import mpmath
import pytest

from models import GridSpec, NormGrid, PrecisionPolicy
from superosc.convergence import (
    decreases_by_factor,
    decreasing_share,
    dual_route_check,
    sweep,
)
from superosc.numbers import to_mp
from superosc.operator_engine import continuity_probe
from superosc.problems import build_problem, grid_for, problem_factory
from superosc.sequences import evaluate_sequence

pytestmark = pytest.mark.integration

ENTIRE = ["identity_1d", "square_sin_2d", "exp_3d", "supershift_polynomial"]
WITH_POLE = ["geometric_pole2", "supershift_pole2"]


@pytest.mark.parametrize("n", [4, 8, 12])
@pytest.mark.parametrize("name", ENTIRE + WITH_POLE)
def test_dual_routes_agree_on_shipped_problems(name, n, problem_config, settings):
    """
    GIVEN a shipped problem at n <= 12 and 256 bits
    WHEN the direct sums and the operator route are compared on a 3-point-per-axis grid
    THEN the gap stays within the combined tail bounds, and below 1e-20 for entire G.
    """
    cfg = problem_config(name)
    policy = PrecisionPolicy(bits=256)
    with mpmath.workprec(policy.bits):
        problem = build_problem(cfg, n, settings)
        grid = grid_for(cfg, problem, 3)
        result = dual_route_check(problem, grid, policy)
    assert result.within_bounds
    if name in ENTIRE:
        assert result.discrepancy <= mpmath.mpf("1e-20")


def test_two_variable_superoscillation_converges(problem_config, settings):
    """
    GIVEN G_1 = lambda^2, G_2 = sin, a = 3/2 on [-1, 1]^2 with 81 points
    WHEN swept over n = 4, 8, ..., 24
    THEN the sup error drops tenfold and decreases on most steps.
    """
    cfg = problem_config("square_sin_2d")
    factory = problem_factory(cfg, settings)
    grid = grid_for(cfg, factory(4))
    assert len(grid.points()) == 81
    report = sweep(factory, cfg.n_list, grid)
    assert not report.failures
    assert decreases_by_factor(report)
    assert decreasing_share(report) >= Fraction(4, 5)


def test_supershift_converges_inside_admissible_box(problem_config, settings):
    """
    GIVEN G = 1/(1 - lambda/2), a = 3/2 and B = R/(8e)
    WHEN swept over n = 4, ..., 24 on the default box inside R' = 4/3
    THEN the sup error at n = 24 is at most a tenth of that at n = 4.
    """
    cfg = problem_config("supershift_pole2")
    factory = problem_factory(cfg, settings)
    grid = grid_for(cfg, factory(4))
    assert grid.box[0][1] < Fraction(4, 3)
    report = sweep(factory, cfg.n_list, grid)
    assert not report.failures
    assert decreases_by_factor(report)


def test_supershift_polynomial_is_exact(problem_config, settings):
    cfg = problem_config("supershift_polynomial")
    factory = problem_factory(cfg, settings)
    report = sweep(factory, [6, 7, 8, 10, 12], grid_for(cfg, factory(6)))
    assert report.is_exact()
    assert all(error == 0 for error in report.sup_errors)


@pytest.mark.parametrize(
    "name, x",
    [
        ("identity_1d", ("0",)),
        ("identity_1d", ("1/2",)),
        ("square_sin_2d", ("1/2", "-1/2")),
        ("supershift_pole2", ("1/2",)),
    ],
)
def test_continuity_probe_is_finite_and_stable(name, x, problem_config, settings):
    """
    GIVEN the default probe family for a shipped problem
    WHEN the ratios ||op f||_{8eB} / ||f||_B are sampled on the default and a refined grid
    THEN they are finite, at most 1 at x = 0, and agree within 20%.
    """
    problem = build_problem(problem_config(name), 8, settings)
    kind = "V" if problem.mode == "supershift" else "U"
    coarse = continuity_probe(kind, x, problem.G, problem.B)
    fine = continuity_probe(kind, x, problem.G, problem.B, grid=NormGrid().refined())
    for label, ratio in coarse.ratios.items():
        assert mpmath.isfinite(ratio)
        assert abs(fine.ratios[label] - ratio) <= mpmath.mpf("0.2") * ratio
    if all(v == "0" for v in x):
        assert coarse.max_ratio <= 1 + mpmath.mpf("1e-20")


def test_sweep_is_robust_to_doubling_precision(problem_config, settings):
    """
    GIVEN the two variable sweep at 256 and at 512 bits
    WHEN the sup errors are compared
    THEN they agree to 1e-10 relative.
    """
    cfg = problem_config("square_sin_2d")
    factory = problem_factory(cfg, settings)
    grid = grid_for(cfg, factory(4), 5)
    n_list = [4, 12, 24]
    low = sweep(factory, n_list, grid, policy=lambda n: PrecisionPolicy.for_order(n, bits=256))
    high = sweep(factory, n_list, grid, policy=lambda n: PrecisionPolicy.for_order(n, bits=512))
    for a, b in zip(low.sup_errors, high.sup_errors):
        assert abs(a - b) <= mpmath.mpf("1e-10") * abs(b)


@pytest.mark.parametrize("name", ENTIRE + WITH_POLE)
def test_direct_values_are_robust_to_doubling_precision(name, problem_config, settings):
    cfg = problem_config(name)
    values = []
    for bits in (256, 512):
        with mpmath.workprec(bits):
            problem = build_problem(cfg, 8, settings)
            point = GridSpec.cube("1/2", problem.dimension, 2).points()[-1]
            values.append(evaluate_sequence(problem, point).value)
    with mpmath.workprec(512):
        low, high = (to_mp(v) for v in values)
        assert abs(low - high) <= mpmath.mpf("1e-10") * abs(high)
