import logging
from fractions import Fraction

import mpmath

from constants import SCHEME_CHEBYSHEV, SCHEME_CUSTOM, SCHEME_EQUISPACED
from models import NodeSet, PrecisionPolicy
from superosc.errors import ConfigError, DegenerateNodes, OutOfRange
from superosc.numbers import lt, parse_number, to_mp

logger = logging.getLogger(__name__)

# cos(q pi) for the rational multiples q of pi where the cosine is rational
_RATIONAL_COSINES = {
    Fraction(0): Fraction(1),
    Fraction(1, 3): Fraction(1, 2),
    Fraction(1, 2): Fraction(0),
    Fraction(2, 3): Fraction(-1, 2),
    Fraction(1): Fraction(-1),
}


def equispaced_points(n):
    return tuple(1 - Fraction(2 * j, n) for j in range(n + 1))


def chebyshev_points(n):
    """cos(j pi / n), exact where the cosine is rational and None elsewhere."""
    return tuple(_RATIONAL_COSINES.get(Fraction(j, n)) for j in range(n + 1))


def _exact_point(value):
    value = parse_number(value)
    if isinstance(value, Fraction):
        return value
    if isinstance(value, mpmath.mpf) and mpmath.isfinite(value):
        man, exp = value.man_exp
        return Fraction(man) * Fraction(2) ** exp
    raise OutOfRange(f"Node {value!r} is not a finite real number")


def _min_gap(node_set):
    if node_set.n == 0:
        return None
    if node_set.is_exact:
        ordered = sorted(node_set.points)
    else:
        ordered = sorted(node_set.values())
    return min(high - low for low, high in zip(ordered, ordered[1:]))


def generate_nodes(scheme_tag, n=None, custom_points=None, policy=None):
    """
    Builds the node set h_0..h_n for the given scheme and validates it:
    every |h_j| <= 1, pairwise distinct, minimum gap above 2^(-bits/4).
    """
    if scheme_tag == SCHEME_EQUISPACED or scheme_tag == SCHEME_CHEBYSHEV:
        if n is None or n < 1:
            raise ConfigError(f"{scheme_tag} nodes need n >= 1, got {n}")
        if scheme_tag == SCHEME_EQUISPACED:
            points = equispaced_points(n)
        else:
            points = chebyshev_points(n)
    elif scheme_tag == SCHEME_CUSTOM:
        if not custom_points or len(custom_points) < 2:
            raise ConfigError("custom nodes need at least two points")
        points = tuple(_exact_point(p) for p in custom_points)
        if n is not None and n != len(points) - 1:
            raise ConfigError(
                f"n={n} does not match the {len(points)} custom points supplied"
            )
        n = len(points) - 1
    else:
        raise ConfigError(f"Unknown node scheme {scheme_tag!r}")

    for j, point in enumerate(points):
        if point is not None and abs(point) > 1:
            raise OutOfRange(f"Node h_{j} = {point} lies outside [-1, 1]")
    if len(set(p for p in points if p is not None)) != sum(p is not None for p in points):
        raise DegenerateNodes(f"{scheme_tag} nodes for n={n} contain duplicates")

    policy = policy or PrecisionPolicy.for_order(n)
    with mpmath.workprec(policy.bits):
        node_set = NodeSet(n=n, scheme_tag=scheme_tag, points=points)
        gap = _min_gap(node_set)
        threshold = mpmath.mpf(2) ** (-mpmath.mpf(policy.bits) / 4)
        if gap == 0 or lt(gap, threshold):
            raise DegenerateNodes(
                f"Minimum node gap {mpmath.nstr(to_mp(gap), 5)} is below the "
                f"degeneracy threshold 2^(-{policy.bits}/4) at {policy.bits} bits"
            )
    logger.debug(f"Generated {scheme_tag} nodes, n={n}, min gap {gap}")
    return NodeSet(n=n, scheme_tag=scheme_tag, points=points, min_gap=gap)
