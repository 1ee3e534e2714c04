from fractions import Fraction

import mpmath
import pytest

from models import ExponentialWave
from superosc.errors import OutOfRange, OutsideRadius, TailNotBounded
from superosc.growth_space import linear_combination
from superosc.operator_engine import (
    apply_operator,
    build_U,
    build_V,
    build_y_series,
    check_v_admissible,
    codomain_parameter,
    continuity_majorant,
    continuity_probe,
    default_probe_family,
    limit_route_target,
    operator_route_Fn,
)
from superosc.problems import build_problem
from superosc.sequences import eval_multivar, eval_supershift
from superosc.series import builtin_series, series_exp_by_powers

TOL = mpmath.mpf("1e-25")


def test_y_series_includes_constant_term():
    y = build_y_series(("2",), [builtin_series("cos")])
    assert y.coeff(0) == 2j
    assert y.coeff(1) == 0
    assert y.coeff(2) == -1j


def test_U_at_origin_is_the_identity_symbol():
    op = build_U(("0",), [builtin_series("identity")], 16)
    assert op.sigma.degree == 0
    assert op.sigma.coeff(0) == 1
    assert op.sigma.coeff(5) == 0


def test_U_symbol_matches_sum_of_powers():
    """
    GIVEN y built from the sine series at x = 1
    WHEN the U symbol is compared with the nested sum of powers of y
    THEN the coefficients agree.
    """
    G = [builtin_series("sin")]
    op = build_U(("1",), G, 12)
    by_powers = series_exp_by_powers(build_y_series(("1",), G), 12, 12)
    for k in range(13):
        assert abs(op.sigma.coeff(k) - by_powers.coeff(k)) < mpmath.mpf("1e-30")


def test_V_with_identity_multiplies_the_frequency():
    """
    GIVEN V for G(lambda) = lambda at x = 1/2
    WHEN applied to a wave of frequency 3
    THEN the value at the origin is a x = 3/2.
    """
    op = build_V(("1/2",), [builtin_series("identity")], 16)
    image = apply_operator(op, ExponentialWave(3))
    assert abs(image.taylor(0) - mpmath.mpf(3) / 2) < TOL
    assert image.meta["symbol_tail"] == 0


def test_U_with_identity_shifts_the_wave():
    op = build_U(("1/2",), [builtin_series("identity")], 16)
    image = apply_operator(op, ExponentialWave(Fraction(3, 2)))
    assert abs(image.taylor(0) - mpmath.expj(mpmath.mpf(3) / 4)) < TOL
    assert image.coefficient_error < mpmath.mpf("1e-30")
    assert image.meta["N"] >= 32


def test_operator_is_linear():
    """
    GIVEN a fixed symbol order N = 64
    WHEN U is applied to f, g and f + 2g
    THEN the images combine the same way.
    """
    op = build_U(("1/2",), [builtin_series("sin")], 64)
    f, g = ExponentialWave(1), ExponentialWave(-2)
    combined = linear_combination([(1, f), (2, g)])
    left = apply_operator(op, combined, N=64).taylor(0)
    right = apply_operator(op, f, N=64).taylor(0) + 2 * apply_operator(op, g, N=64).taylor(0)
    assert abs(left - right) < TOL


def test_operator_route_matches_direct_sum(problem_config, settings):
    problem = build_problem(problem_config("identity_1d"), 8, settings)
    x = ("1/2",)
    routed = operator_route_Fn(problem, x)
    direct = eval_multivar(problem, x)
    assert abs(routed.value - direct.value) < TOL


def test_supershift_route_matches_direct_sum(problem_config, settings):
    problem = build_problem(problem_config("supershift_pole2"), 8, settings)
    x = ("1/2",)
    routed = operator_route_Fn(problem, x)
    direct = eval_supershift(problem, x)
    assert abs(routed.value - direct.value) < TOL
    limit = limit_route_target(problem, x)
    assert abs(limit.value - 1 / (1 - mpmath.mpf(3) / 8)) < TOL


def test_symbol_tail_cap_is_enforced():
    """
    GIVEN exp(i G) with a pole at 2, whose symbol decays like 2^-k
    WHEN the order is capped at 64
    THEN the tail cannot reach the tolerance and TailNotBounded is raised.
    """
    op = build_U(("1",), [builtin_series("geometric", alpha=2)], 16)
    with pytest.raises(TailNotBounded):
        apply_operator(op, ExponentialWave(1), n_max=64)


def test_V_admissibility():
    G = [builtin_series("geometric", alpha=2)]
    B = mpmath.mpf(2) / (8 * mpmath.e)
    check_v_admissible(("1",), G, B)
    with pytest.raises(OutsideRadius):
        check_v_admissible(("3",), G, B)
    check_v_admissible(("3",), G, None)


def test_probe_at_origin_never_grows_the_norm():
    """
    GIVEN the identity operator (U at x = 0)
    WHEN probed over the default family
    THEN every ratio ||f||_{8eB} / ||f||_B is at most 1.
    """
    probe = continuity_probe("U", ("0",), [builtin_series("identity")], 1)
    assert len(probe.ratios) == 3
    assert probe.max_ratio <= 1 + mpmath.mpf("1e-20")


def test_probe_ratio_is_scale_invariant():
    G = [builtin_series("identity")]
    wave = ExponentialWave(Fraction(1, 4))
    scaled = linear_combination([(3, wave)])
    plain = continuity_probe("U", ("1/2",), G, 1, family=[wave], N=64)
    tripled = continuity_probe("U", ("1/2",), G, 1, family=[scaled], N=64)
    assert abs(plain.max_ratio - tripled.max_ratio) < mpmath.mpf("1e-20")


def test_probe_rejects_incompatible_B():
    with pytest.raises(OutOfRange):
        continuity_probe("U", ("1",), [builtin_series("geometric", alpha=2)], 1)


def test_default_probe_family_follows_B():
    assert [w.frequency for w in default_probe_family(4)] == [Fraction(1, 4), Fraction(1, 2), 1]
    assert [w.frequency for w in default_probe_family(1)] == [
        Fraction(1, 8),
        Fraction(1, 4),
        Fraction(1, 2),
    ]


def test_majorant_at_origin():
    G = [builtin_series("identity")]
    assert continuity_majorant("U", ("0",), G, 1) == 1
    # V at the origin is G(0) times the identity, and G(0) = 0 here
    assert continuity_majorant("V", ("0",), G, 1) == 0
    assert mpmath.isinf(
        continuity_majorant("V", ("1",), [builtin_series("geometric", alpha=2)], 1)
    )


def test_codomain_parameter():
    assert abs(codomain_parameter(1) - 8 * mpmath.e) < TOL
    assert codomain_parameter(None) is None


def test_operator_route_uses_configured_symbol_cap(settings, mocker):
    """
    GIVEN a problem file with truncation.symbol_n_max = 64
    WHEN F_n is evaluated through the operator route
    THEN the symbol order is capped at 64 instead of the default.
    """
    from config import parse_problem_config
    from superosc import operator_engine

    cfg = parse_problem_config(
        'a: "3/2"\nG:\n  - builtin: identity\ntruncation:\n  symbol_n_max: 64\n'
    )
    problem = build_problem(cfg, 8, settings)
    assert problem.symbol_n_max == 64
    spy = mocker.patch(
        "superosc.operator_engine.apply_operator", wraps=operator_engine.apply_operator
    )
    operator_route_Fn(problem, ("1/2",))
    assert spy.call_args.kwargs["n_max"] == 64


def test_U_with_identity_translates_polynomials():
    """
    GIVEN p(xi) = 1 + 2 xi - 3 xi^2 + xi^3 / 2 and U for G(lambda) = lambda at x = 1/2
    WHEN U is applied to p
    THEN the output coefficients are those of p(xi + 1/2).
    """
    from math import comb

    from models import GrowthFunction

    a = [Fraction(1), Fraction(2), Fraction(-3), Fraction(1, 2)]

    def taylor(j):
        return a[j] if j < len(a) else Fraction(0)

    p = GrowthFunction(taylor, (6, 1), label="p")
    x = Fraction(1, 2)
    op = build_U((x,), [builtin_series("identity")], 16)
    image = apply_operator(op, p, M=3)
    for j in range(4):
        shifted = sum(a[j + k] * comb(j + k, j) * x**k for k in range(len(a) - j))
        assert abs(image.taylor(j) - mpmath.mpf(shifted.numerator) / shifted.denominator) < TOL


def test_two_variable_routes_match_hand_expansion(settings):
    """
    GIVEN nodes 1, 0, -1, a = 2, G_1 = lambda^2 and G_2 = lambda
    WHEN F_n(0.3, 0.7) is computed directly and through U
    THEN both equal 3 e^(i) - 3 + e^(-0.4 i).
    """
    from config import parse_problem_config

    cfg = parse_problem_config(
        "nodes:\n  scheme: custom\n  custom_points: [1, 0, -1]\na: 2\n"
        "G:\n  - builtin: monomial\n    params: {p: 2}\n  - builtin: identity\n"
    )
    problem = build_problem(cfg, None, settings)
    assert list(problem.coeffs.values) == [3, -3, 1]
    x = ("0.3", "0.7")
    expected = 3 * mpmath.expj(1) - 3 + mpmath.expj(mpmath.mpf("-0.4"))
    direct = eval_multivar(problem, x)
    routed = operator_route_Fn(problem, x)
    assert abs(direct.value - expected) < TOL
    assert abs(routed.value - expected) < TOL
