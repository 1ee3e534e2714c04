"""
Direct evaluators for the one-variable sequence f_n, the multivariate
superoscillating sequence and the supershift sequence, with their limits.
"""

from fractions import Fraction
from math import factorial

import mpmath

from constants import MODE_SUPEROSCILLATION, MODE_SUPERSHIFT
from models import Evaluation
from superosc.coefficients import moments
from superosc.errors import ConfigError, OutOfRange, OutsideRadius
from superosc.numbers import (
    INF,
    is_exact,
    is_inf,
    lt,
    magnitude,
    parse_number,
    smallest,
    to_mp,
)
from superosc.series import truncated_eval


# Rounding allowance per unit of sum |Z_j| |term_j|, in units of the working epsilon
ROUNDING_ULPS = 16


def _rounding(scale):
    return ROUNDING_ULPS * mpmath.eps * scale


def _point(x, dimension):
    x = tuple(parse_number(v) for v in x)
    if len(x) != dimension:
        raise ConfigError(f"expected a point with {dimension} coordinates, got {len(x)}")
    for v in x:
        if isinstance(v, mpmath.mpc) or is_inf(v):
            raise OutOfRange(f"coordinates must be finite reals, got {v}")
    return x


def _eval_series(problem, s, lam):
    return truncated_eval(s, lam, tail_tol=problem.tail_tol, n_max=problem.series_n_max)


def eval_f1d(coeffs, xi):
    """f_n(xi) = sum_j Z_j e^(i h_j xi) at the working precision."""
    xi = to_mp(parse_number(xi))
    terms = [
        to_mp(z) * mpmath.expj(h * xi)
        for z, h in zip(coeffs.values, coeffs.nodes.values())
        if z != 0
    ]
    return mpmath.fsum(terms) if terms else mpmath.mpc(0)


# --- Superoscillation mode ---


def node_images(problem):
    """G_l(h_j) for every node and series, as Evaluations; computed once per problem."""
    return [
        [_eval_series(problem, g, h) for g in problem.G]
        for h in problem.coeffs.nodes.exact_or_mp()
    ]


def _superoscillation_sum(problem, images, x):
    coeffs = problem.coeffs
    terms = []
    scale = mpmath.mpf(0)
    drift = mpmath.mpf(0)
    for z, row in zip(coeffs.values, images):
        if z == 0:
            continue
        phase = mpmath.mpf(0)
        spread = mpmath.mpf(0)
        for x_l, image in zip(x, row):
            phase = phase + to_mp(x_l) * to_mp(image.value)
            spread += abs(to_mp(x_l)) * to_mp(image.tail_bound)
        term = to_mp(z) * mpmath.expj(phase)
        terms.append(term)
        size = abs(term)
        scale += size
        if spread:
            drift += size * mpmath.expm1(spread)
    value = mpmath.fsum(terms) if terms else mpmath.mpc(0)
    return Evaluation(value, drift + _rounding(scale))


def eval_multivar(problem, x, images=None):
    """F_n(x) = sum_j Z_j prod_l e^(i x_l G_l(h_j))."""
    x = _point(x, problem.dimension)
    if images is None:
        images = node_images(problem)
    return _superoscillation_sum(problem, images, x)


def eval_multivar_many(problem, points):
    images = node_images(problem)
    return [eval_multivar(problem, x, images) for x in points]


def target_multivar(problem, x):
    """e^(i sum_l x_l G_l(a)), the limit of F_n."""
    x = _point(x, problem.dimension)
    a = problem.a
    if not lt(magnitude(a), problem.radius):
        raise OutsideRadius(f"|a| = {magnitude(a)} is not below R = {problem.radius}")
    phase = mpmath.mpf(0)
    spread = mpmath.mpf(0)
    for x_l, g in zip(x, problem.G):
        image = _eval_series(problem, g, a)
        phase = phase + to_mp(x_l) * to_mp(image.value)
        spread += abs(to_mp(x_l)) * to_mp(image.tail_bound)
    value = mpmath.expj(phase)
    drift = abs(value) * mpmath.expm1(spread) if spread else mpmath.mpf(0)
    return Evaluation(value, drift + _rounding(abs(value)))


# --- Supershift mode ---


def _product(factors):
    """Product of Evaluations with the propagated bound prod(|v| + d) - prod(|v|)."""
    exact = all(is_exact(f.value) for f in factors)
    value = Fraction(1) if exact else mpmath.mpf(1)
    size = mpmath.mpf(1)
    widened = mpmath.mpf(1)
    for f in factors:
        value = value * (f.value if exact else to_mp(f.value))
        size *= abs(to_mp(f.value))
        widened *= abs(to_mp(f.value)) + to_mp(f.tail_bound)
    return value, size, widened - size


def _check_supershift_point(problem, x):
    for x_l, g in zip(x, problem.G):
        if not lt(magnitude(x_l), g.radius):
            raise OutsideRadius(f"|x| = {magnitude(x_l)} is not inside the radius {g.radius} of {g.tag}")


def _supershift_sum(problem, x, points, coefficient_values):
    terms = []
    scale = mpmath.mpf(0)
    drift = mpmath.mpf(0)
    for z, h in zip(coefficient_values, points):
        if z == 0:
            continue
        factors = [
            _eval_series(problem, g, _scaled(x_l, h)) for x_l, g in zip(x, problem.G)
        ]
        value, size, spread = _product(factors)
        if is_exact(z) and is_exact(value):
            terms.append(z * value)
        else:
            terms.append(to_mp(z) * to_mp(value))
        scale += abs(to_mp(z)) * size
        drift += abs(to_mp(z)) * spread
    if terms and all(is_exact(t) for t in terms):
        return Evaluation(sum(terms, Fraction(0)), Fraction(0))
    value = mpmath.fsum(to_mp(t) for t in terms) if terms else mpmath.mpf(0)
    return Evaluation(value, drift + _rounding(scale))


def _scaled(x_l, h):
    if is_exact(x_l) and is_exact(h):
        return x_l * h
    return to_mp(x_l) * to_mp(h)


def eval_supershift(problem, x):
    """F_n(x) = sum_j Z_j G_1(x_1 h_j) ... G_d(x_d h_j); exact for rational polynomial data."""
    x = _point(x, problem.dimension)
    _check_supershift_point(problem, x)
    coeffs = problem.coeffs
    if coeffs.exactness_flag:
        return _supershift_sum(problem, x, coeffs.nodes.exact_or_mp(), coeffs.values)
    return _supershift_sum(problem, x, coeffs.nodes.values(), coeffs.mp_values())


def eval_supershift_many(problem, points):
    coeffs = problem.coeffs
    if coeffs.exactness_flag:
        nodes, values = coeffs.nodes.exact_or_mp(), coeffs.values
    else:
        nodes, values = coeffs.nodes.values(), coeffs.mp_values()
    results = []
    for x in points:
        x = _point(x, problem.dimension)
        _check_supershift_point(problem, x)
        results.append(_supershift_sum(problem, x, nodes, values))
    return results


def target_supershift(problem, x):
    """G_1(a x_1) ... G_d(a x_d), the limit of the supershift sequence."""
    x = _point(x, problem.dimension)
    factors = [
        _eval_series(problem, g, _scaled(problem.a, x_l)) for x_l, g in zip(x, problem.G)
    ]
    value, size, spread = _product(factors)
    if is_exact(value):
        return Evaluation(value, Fraction(0))
    return Evaluation(value, spread + _rounding(size))


# --- Dispatch by mode ---


def evaluate_sequence(problem, x):
    if problem.mode == MODE_SUPERSHIFT:
        return eval_supershift(problem, x)
    return eval_multivar(problem, x)


def evaluate_sequence_many(problem, points):
    if problem.mode == MODE_SUPERSHIFT:
        return eval_supershift_many(problem, points)
    return eval_multivar_many(problem, points)


def evaluate_target(problem, x):
    if problem.mode == MODE_SUPERSHIFT:
        return target_supershift(problem, x)
    return target_multivar(problem, x)


# --- Domains and preconditions ---


def admissible_halfwidth(a, B, radii):
    """
    R' = min(R/|a|, R/(4eB), R) with R = min_l R_l. Keeps the exact type of the
    winning term, so rational data with a rational winner gives an exact Fraction.
    """
    a, B = parse_number(a), parse_number(B)
    radii = [parse_number(r) for r in radii]
    if not radii:
        raise ConfigError("admissible_halfwidth needs at least one radius")
    if not lt(1, magnitude(a)):
        raise OutOfRange(f"the supershift domain needs |a| > 1, got {a}")
    if not lt(0, B):
        raise OutOfRange(f"B must be positive, got {B}")
    if any(not lt(0, r) for r in radii):
        raise OutOfRange("every radius must be positive")
    R = smallest(radii)
    if is_inf(R):
        return INF
    if is_exact(R) and is_exact(a):
        by_target = R / magnitude(a)
    else:
        by_target = to_mp(R) / to_mp(magnitude(a))
    by_growth = to_mp(R) / (4 * mpmath.e * to_mp(B))
    return smallest([by_target, by_growth, R])


def superoscillation_frequencies(problem):
    """
    The limit frequencies G_l(a) and whether any exceeds 1 in modulus, i.e.
    whether the sequence oscillates faster than its band limit.
    """
    values = [_eval_series(problem, g, problem.a).value for g in problem.G]
    return {
        "values": values,
        "superoscillates": any(lt(1, magnitude(v)) for v in values),
    }


def verify_supershift_conditions(coeffs, G, p_max=None):
    """
    Residuals of f^(p)(0) = a^p G^(p)(0) for f(x) = sum_j Z_j G(x h_j), i.e.
    p! g_p (sum_j Z_j h_j^p - a^p) for p = 0..p_max.
    """
    p_max = coeffs.n if p_max is None else p_max
    sums = moments(coeffs, p_max)
    residuals = []
    for p, m in enumerate(sums):
        g = G.coeff(p)
        if is_exact(m) and is_exact(g) and is_exact(coeffs.a):
            target = Fraction(coeffs.a) ** p
            residuals.append(Fraction(g) * (m - target) * factorial(p))
        else:
            target = to_mp(coeffs.a) ** p
            residuals.append(to_mp(g) * (to_mp(m) - target) * factorial(p))
    return residuals


def validate_problem(problem):
    """Checks the hypotheses of the selected mode before any evaluation."""
    if problem.mode not in (MODE_SUPEROSCILLATION, MODE_SUPERSHIFT):
        raise ConfigError(f"Unknown mode {problem.mode!r}")
    a = problem.a
    R = problem.radius
    if problem.mode == MODE_SUPEROSCILLATION:
        for g in problem.G:
            if lt(g.radius, 1):
                raise ConfigError(
                    f"superoscillation needs every radius R_l >= 1; {g.tag} has {g.radius}"
                )
        if not lt(magnitude(a), R):
            raise ConfigError(
                f"superoscillation needs |a| < R = min_l R_l; got |a| = {magnitude(a)}, R = {R}"
            )
        if problem.B is not None and not is_inf(R):
            if not lt(to_mp(problem.B), to_mp(R) / (4 * mpmath.e)):
                raise ConfigError(
                    f"superoscillation needs B < R/(4e) = "
                    f"{mpmath.nstr(to_mp(R) / (4 * mpmath.e), 8)}; got B = {problem.B}"
                )
    return problem
