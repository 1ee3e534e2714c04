"""
Formal power series: the builtin catalog, truncated evaluation with tail bounds,
Cauchy products and powers, the series exponential and radius estimation.
"""

import logging
from fractions import Fraction
from functools import lru_cache
from math import factorial

import mpmath

from constants import (
    DEFAULT_INFINITY_THRESHOLD,
    DEFAULT_SERIES_N_MAX,
    DEFAULT_TAIL_TOL,
    ENTIRE_DECAY_RATIO,
    ENVELOPE_SAFETY,
    MAX_RADIUS_RATIO,
    RADIUS_DECLARED_SLACK,
    RADIUS_ESTIMATE_MIN_TERMS,
)
from models import Envelope, Evaluation, PowerSeries
from superosc.errors import (
    ConfigError,
    InconsistentRadius,
    OutsideRadius,
    TailNotBounded,
)
from superosc.numbers import (
    INF,
    is_exact,
    is_inf,
    largest,
    lt,
    magnitude,
    parse_number,
    smallest,
    to_mp,
)

logger = logging.getLogger(__name__)

N_START = 16


# --- Builtin catalog ---


@lru_cache(maxsize=None)
def inverse_factorial(m):
    return Fraction(1, factorial(m))


def _sin_coefficient(m):
    if m % 2 == 0:
        return Fraction(0)
    return (-1) ** ((m - 1) // 2) * inverse_factorial(m)


def _cos_coefficient(m):
    if m % 2 == 1:
        return Fraction(0)
    return (-1) ** (m // 2) * inverse_factorial(m)


def _expi_coefficient(m):
    # i^m is exact, so only the division by m! rounds
    return mpmath.mpc(*((1, 0), (0, 1), (-1, 0), (0, -1))[m % 4]) * to_mp(
        inverse_factorial(m)
    )


def _nonnegative_int(name, value):
    value = parse_number(value)
    if not is_exact(value) or value.denominator != 1 or value < 0:
        raise ConfigError(f"{name} must be a nonnegative integer, got {value}")
    return int(value)


def identity_series():
    return PowerSeries(
        lambda m: Fraction(int(m == 1)), tag="identity", degree=1
    )


def monomial_series(p):
    p = _nonnegative_int("monomial power p", p)
    return PowerSeries(lambda m: Fraction(int(m == p)), tag=f"monomial({p})", degree=p)


def exp_series():
    return PowerSeries(inverse_factorial, tag="exp", envelope=Envelope(1, 1, 1))


def expi_series():
    return PowerSeries(_expi_coefficient, tag="expi", envelope=Envelope(1, 1, 1))


def sin_series():
    return PowerSeries(_sin_coefficient, tag="sin", envelope=Envelope(1, 1, 1))


def cos_series():
    return PowerSeries(_cos_coefficient, tag="cos", envelope=Envelope(1, 1, 1))


def geometric_series(alpha):
    """1 / (1 - lambda/alpha): g_m = alpha^(-m), radius |alpha|."""
    alpha = parse_number(alpha)
    if not is_exact(alpha):
        alpha_mp = to_mp(alpha)
        if alpha_mp == 0:
            raise ConfigError("geometric series needs a nonzero pole")

        def coefficient(m):
            return to_mp(alpha) ** (-m)

    else:
        if alpha == 0:
            raise ConfigError("geometric series needs a nonzero pole")

        def coefficient(m):
            return alpha ** (-m)

    radius = magnitude(alpha)
    return PowerSeries(
        coefficient,
        radius=radius,
        tag=f"geometric({alpha})",
        envelope=Envelope(1, radius, 0),
    )


_BUILDERS = {
    "identity": identity_series,
    "monomial": monomial_series,
    "exp": exp_series,
    "expi": expi_series,
    "sin": sin_series,
    "cos": cos_series,
    "geometric": geometric_series,
}


@lru_cache(maxsize=64)
def _cached_builtin(name, params):
    return _BUILDERS[name](**dict(params))


def builtin_series(name, **params):
    if name not in _BUILDERS:
        raise ConfigError(f"Unknown builtin series {name!r}; choose from {sorted(_BUILDERS)}")
    try:
        return _cached_builtin(name, tuple(sorted((k, str(v)) for k, v in params.items())))
    except TypeError as e:
        raise ConfigError(f"Bad parameters for builtin series {name!r}: {e}") from e


def custom_series(coeffs, radius, infinity_threshold=DEFAULT_INFINITY_THRESHOLD):
    """
    Explicit coefficient list. radius "inf" makes the list a polynomial; a finite
    radius R makes it a prefix whose remainder is bounded by C R^(-m), with C
    fitted on the prefix.
    """
    values = tuple(parse_number(c) for c in coeffs)
    if not values:
        raise ConfigError("a custom series needs at least one coefficient")
    radius = parse_number(radius)
    if is_inf(radius):
        return PowerSeries(
            lambda m: values[m], radius=INF, tag="custom", degree=len(values) - 1
        )
    if isinstance(radius, mpmath.mpc) or not lt(0, radius):
        raise ConfigError(f"a series radius must be positive, got {radius}")

    if len(values) >= RADIUS_ESTIMATE_MIN_TERMS:
        estimate = radius_estimate(values, infinity_threshold)
        slack = Fraction(RADIUS_DECLARED_SLACK)
        if not is_inf(estimate) and lt(to_mp(estimate) * to_mp(slack), radius):
            raise InconsistentRadius(
                f"declared radius {radius} exceeds the coefficient estimate "
                f"{mpmath.nstr(to_mp(estimate), 8)} by more than {slack}x"
            )
        if lt(to_mp(radius) * to_mp(slack), estimate):
            logger.warning(
                f"Declared radius {radius} is far below the coefficient estimate "
                f"{mpmath.nstr(to_mp(estimate), 8)}"
            )
    return PowerSeries(
        lambda m: values[m],
        radius=radius,
        truncation_order=len(values) - 1,
        tag="custom",
        envelope=fit_envelope(values, radius),
    )


def fit_envelope(values, rate, safety=ENVELOPE_SAFETY):
    """Envelope |g_m| <= C rate^(-m) with C = safety * max_m |g_m| rate^m over the prefix."""
    rate_mp = to_mp(rate)
    scale = max(
        (abs(to_mp(v)) * rate_mp**m for m, v in enumerate(values)),
        default=mpmath.mpf(0),
    )
    return Envelope(safety * scale, rate, 0)


# --- Evaluation ---


def _horner(values, lam):
    exact = is_exact(lam) and all(is_exact(v) for v in values)
    if not exact:
        values = [to_mp(v) for v in values]
        lam = to_mp(lam)
    result = Fraction(0) if exact else mpmath.mpf(0)
    for v in reversed(values):
        result = result * lam + v
    return result


def _envelope_tail(envelope, q, first):
    """
    Bound on sum_{m >= first} |g_m| |lam|^m given the envelope and q = |lam|/rate.
    Returns None when the tail is not yet geometrically dominated.
    """
    term = to_mp(envelope.scale) * q**first
    if envelope.factorial_power:
        term /= mpmath.factorial(first) ** envelope.factorial_power
        ratio = q / mpmath.mpf(first + 1) ** envelope.factorial_power
    else:
        ratio = q
    if ratio >= 1:
        return None
    return term / (1 - ratio)


def check_inside_radius(s, lam):
    if is_inf(s.radius):
        return
    size = magnitude(lam)
    if not lt(size, s.radius):
        raise OutsideRadius(f"|lambda| = {size} is not inside the radius {s.radius} of {s.tag}")
    if lt(Fraction(MAX_RADIUS_RATIO), to_mp(size) / to_mp(s.radius)):
        raise OutsideRadius(
            f"|lambda|/R = {mpmath.nstr(to_mp(size) / to_mp(s.radius), 6)} exceeds "
            f"{MAX_RADIUS_RATIO} for {s.tag}"
        )


def truncated_eval(s, lam, N=None, tail_tol=DEFAULT_TAIL_TOL, n_max=DEFAULT_SERIES_N_MAX):
    """
    Evaluates sum_{m <= N} g_m lam^m and a bound on the neglected tail, doubling N
    until the bound is below tail_tol. Polynomials are summed exactly with zero tail.
    """
    lam = parse_number(lam)
    check_inside_radius(s, lam)
    if s.is_polynomial:
        return Evaluation(_horner(s.coefficients(s.degree + 1), lam), Fraction(0))
    if s.envelope is None:
        raise TailNotBounded(f"series {s.tag} carries no envelope to bound its tail")

    tol = to_mp(parse_number(tail_tol))
    lam_mp = to_mp(lam)
    q = abs(lam_mp) / to_mp(s.envelope.rate)
    limit = n_max
    known = s.known_terms()
    if known is not None:
        limit = min(limit, known - 1)
    N = min(N or N_START, limit)

    value = mpmath.mpf(0)
    power = mpmath.mpf(1)
    summed = 0
    while True:
        while summed <= N:
            value += to_mp(s.coeff(summed)) * power
            power *= lam_mp
            summed += 1
        tail = _envelope_tail(s.envelope, q, N + 1)
        if tail is not None and tail < tol:
            return Evaluation(value, tail)
        if N >= limit:
            raise TailNotBounded(
                f"tail of {s.tag} at |lambda|={mpmath.nstr(abs(lam_mp), 6)} is "
                f"{'unbounded' if tail is None else mpmath.nstr(tail, 5)} after "
                f"{N + 1} terms (tolerance {mpmath.nstr(tol, 5)})"
            )
        N = min(2 * N, limit)
        logger.debug(f"truncated_eval({s.tag}): raising N to {N}")


# --- Arithmetic ---


def _lift(values):
    """Keeps Fractions when every value is exact, else converts all to mpmath."""
    values = list(values)
    if all(is_exact(v) for v in values):
        return [Fraction(v) for v in values]
    return [to_mp(v) for v in values]


def _finite_series(values, radius, tag, N, degree=None):
    values = tuple(values)
    if degree is not None and degree <= N:
        values = values[: degree + 1]
        return PowerSeries(lambda m: values[m], radius=radius, tag=tag, degree=degree)
    return PowerSeries(lambda m: values[m], radius=radius, truncation_order=N, tag=tag)


def _convolve(left, right, N):
    zero = Fraction(0) if all(isinstance(v, Fraction) for v in left + right) else 0
    return [
        sum((left[i] * right[k - i] for i in range(k + 1)), zero) for k in range(N + 1)
    ]


def _prefix(s, N):
    """Coefficients 0..N, zero padded past a polynomial's degree."""
    return [s.coeff(m) for m in range(N + 1)]


def _product_degree(*series):
    if all(s.is_polynomial for s in series):
        return sum(s.degree for s in series)
    return None


def cauchy_product(s, t, N):
    """The product series to order N: coefficient k is sum_{i <= k} s_i t_{k-i}."""
    if N < 0:
        raise ConfigError("truncation order N must be nonnegative")
    left, right = _lift(_prefix(s, N)), _lift(_prefix(t, N))
    if isinstance(left[0], Fraction) != isinstance(right[0], Fraction):
        left, right = [to_mp(v) for v in left], [to_mp(v) for v in right]
    return _finite_series(
        _convolve(left, right, N),
        smallest([s.radius, t.radius]),
        f"({s.tag})*({t.tag})",
        N,
        _product_degree(s, t),
    )


def cauchy_power(s, m, N):
    """s^m to order N by repeated convolution; s^0 is the constant series 1."""
    if m < 0 or N < 0:
        raise ConfigError("power m and truncation order N must be nonnegative")
    base = _lift(_prefix(s, N))
    result = [Fraction(1)] + [Fraction(0)] * N
    if not isinstance(base[0], Fraction):
        result = [to_mp(v) for v in result]
    for _ in range(m):
        result = _convolve(result, base, N)
    degree = s.degree * m if s.is_polynomial else (0 if m == 0 else None)
    return _finite_series(result, s.radius, f"({s.tag})^{m}", N, degree)


def series_exp(s, N):
    """
    exp(s) to order N by the recurrence E_0 = exp(s_0), k E_k = sum_{j=1..k} j s_j E_{k-j}.
    Stays exact when s is exact with s_0 = 0.
    """
    if N < 0:
        raise ConfigError("truncation order N must be nonnegative")
    coeffs = _lift(_prefix(s, N))
    exact = isinstance(coeffs[0], Fraction) and coeffs[0] == 0
    if not exact:
        coeffs = [to_mp(v) for v in coeffs]
    result = [Fraction(1) if exact else mpmath.exp(coeffs[0])]
    for k in range(1, N + 1):
        acc = sum(
            (j * coeffs[j] * result[k - j] for j in range(1, k + 1)),
            Fraction(0) if exact else mpmath.mpf(0),
        )
        result.append(acc / k)
    degree = 0 if all(c == 0 for c in coeffs[1:]) and s.is_polynomial else None
    return _finite_series(result, s.radius, f"exp({s.tag})", N, degree)


def series_exp_by_powers(s, N, M):
    """sum_{m <= M} s^m / m! to order N, the nested-sum form of the exponential."""
    acc = [Fraction(0)] * (N + 1)
    for m in range(M + 1):
        power = _prefix(cauchy_power(s, m, N), N)
        scaled = [
            v * inverse_factorial(m) if is_exact(v) else to_mp(v) / factorial(m)
            for v in power
        ]
        acc = [x + y for x, y in zip(*_align(acc, scaled))]
    return _finite_series(acc, s.radius, f"exp({s.tag}) by powers", N)


def _align(left, right):
    if all(isinstance(v, Fraction) for v in left + right):
        return left, right
    return [to_mp(v) for v in left], [to_mp(v) for v in right]


# --- Radius estimation ---


def radius_estimate(coeffs, infinity_threshold=DEFAULT_INFINITY_THRESHOLD):
    """
    1 / max over the top quartile of m of |g_m|^(1/m). Classified as entire
    (infinity) when the tail vanishes, when the root estimates keep decaying
    between the second and the top quartile, or when the estimate exceeds the
    threshold.
    """
    count = len(coeffs)
    if count < RADIUS_ESTIMATE_MIN_TERMS:
        raise ConfigError(
            f"radius estimation needs at least {RADIUS_ESTIMATE_MIN_TERMS} coefficients"
        )

    def root(m):
        size = abs(to_mp(parse_number(coeffs[m])))
        if size == 0:
            return mpmath.mpf(0)
        return size ** (mpmath.mpf(1) / m)

    top = largest(root(m) for m in range(max(1, 3 * count // 4), count))
    if top == 0:
        return INF
    second = largest(root(m) for m in range(max(1, count // 4), count // 2))
    if second > 0 and top < to_mp(Fraction(ENTIRE_DECAY_RATIO)) * second:
        return INF
    estimate = 1 / top
    if estimate > to_mp(parse_number(infinity_threshold)):
        return INF
    return estimate
