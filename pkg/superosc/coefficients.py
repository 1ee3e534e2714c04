import logging
from fractions import Fraction

import mpmath

from models import CoefficientSet
from superosc.errors import ConfigError, OutOfRange
from superosc.numbers import is_exact, largest, magnitude, parse_number, to_mp, total

logger = logging.getLogger(__name__)


def _real_target(a):
    a = parse_number(a)
    if isinstance(a, mpmath.mpc):
        if a.imag != 0:
            raise OutOfRange(f"The target a must be real, got {a}")
        a = a.real
    if not is_exact(a) and not mpmath.isfinite(a):
        raise OutOfRange(f"The target a must be finite, got {a}")
    return a


def _indicator(nodes, k):
    return tuple(Fraction(int(j == k)) for j in range(nodes.n + 1))


def _product_formula(points, a, one):
    """
    Z_j = prod_{k != j} (h_k - a) / (h_k - h_j), numerator and denominator
    accumulated separately with a single division per j.
    """
    values = []
    for j, h_j in enumerate(points):
        numerator = one
        denominator = one
        for k, h_k in enumerate(points):
            if k == j:
                continue
            numerator *= h_k - a
            denominator *= h_k - h_j
        values.append(numerator / denominator)
    return tuple(values)


def solve_coefficients(nodes, a, exact=None):
    """
    Solves for the coefficients Z_j(n, a) of the sequence on the given nodes.
    Exact Fractions when the nodes and a are rational (unless exact=False), else
    mpmath values at the working precision. When a coincides with a node the
    exact indicator of that node is returned.
    """
    a = _real_target(a)
    use_exact = nodes.is_exact and is_exact(a) and exact is not False
    if exact and not use_exact:
        raise ConfigError("Exact coefficients need rational nodes and a rational target")

    if use_exact:
        points = nodes.points
        for k, h_k in enumerate(points):
            if h_k == a:
                logger.debug(f"a={a} equals node h_{k}, returning the indicator")
                return CoefficientSet(nodes, a, _indicator(nodes, k), True)
        values = _product_formula(points, Fraction(a), Fraction(1))
        return CoefficientSet(nodes, a, values, True)

    points = nodes.values()
    target = to_mp(a)
    for k, h_k in enumerate(points):
        if h_k == target:
            return CoefficientSet(nodes, a, _indicator(nodes, k), True)
    values = _product_formula(points, target, mpmath.mpf(1))
    return CoefficientSet(nodes, a, values, False)


def _exact_pair(coeffs):
    return coeffs.exactness_flag and coeffs.nodes.is_exact and is_exact(coeffs.a)


def moments(coeffs, p_max):
    """m_p = sum_j Z_j h_j^p for p = 0..p_max; equals a^p for p <= n."""
    if p_max < 0:
        raise ConfigError("p_max must be nonnegative")
    if _exact_pair(coeffs):
        points = coeffs.nodes.points
        values = coeffs.values
    else:
        points = coeffs.nodes.values()
        values = coeffs.mp_values()
    powers = list(values)
    result = []
    for _ in range(p_max + 1):
        result.append(total(powers))
        powers = [z * h for z, h in zip(powers, points)]
    return result


def verify_interpolation(coeffs, p_max=None):
    """Residuals r_p = sum_j Z_j h_j^p - a^p for p = 0..p_max (p_max <= n)."""
    p_max = coeffs.n if p_max is None else p_max
    if p_max > coeffs.n:
        raise ConfigError(
            f"Interpolation conditions only hold up to p = n = {coeffs.n}, got p_max={p_max}"
        )
    if _exact_pair(coeffs):
        a = Fraction(coeffs.a)
    else:
        a = to_mp(coeffs.a)
    return [m - a**p for p, m in enumerate(moments(coeffs, p_max))]


def coefficient_magnitude(coeffs):
    """(max_j |Z_j|, sum_j |Z_j|), the conditioning figures of a coefficient set."""
    magnitudes = [magnitude(v) for v in coeffs.values]
    return largest(magnitudes), total(magnitudes)
