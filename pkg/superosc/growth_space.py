import logging
from fractions import Fraction
from math import factorial

import mpmath

from constants import (
    CERTIFICATE_GROWTH_LIMIT,
    DEFAULT_B_MIN,
    DEFAULT_CERTIFICATE_HORIZON,
    DEFAULT_NORM_MARGIN,
    DEFAULT_SERIES_N_MAX,
    DEFAULT_TAIL_TOL,
    NORM_FLOOR,
)
from models import (
    Evaluation,
    ExponentialWave,
    GrowthFunction,
    NormEstimate,
    NormGrid,
    WaveCombination,
)
from superosc.errors import ConfigError, NormNotCertifiable, NotExponentialType
from superosc.numbers import largest, magnitude, parse_number, to_mp

logger = logging.getLogger(__name__)


def certificate_fit(taylor, horizon=DEFAULT_CERTIFICATE_HORIZON, b_min=DEFAULT_B_MIN):
    """
    Fits a growth certificate (C, b) with |a_j| <= C b^j / j! on 0 <= j <= horizon:
    b = max_j (|a_j| j! / C0)^(1/j) with C0 = max(|a_0|, 1), then the least C.
    `taylor` is a GrowthFunction or a coefficient accessor j -> a_j.
    """
    if horizon < 8:
        raise ConfigError(f"certificate horizon must be at least 8, got {horizon}")
    accessor = taylor.taylor if isinstance(taylor, GrowthFunction) else taylor
    sizes = [abs(to_mp(parse_number(accessor(j)))) for j in range(horizon + 1)]
    c0 = max(sizes[0], mpmath.mpf(1))

    def growth(limit):
        return largest(
            ((sizes[j] * factorial(j) / c0) ** (mpmath.mpf(1) / j) for j in range(1, limit + 1)),
            default=mpmath.mpf(0),
        )

    b = growth(horizon)
    b_half = growth(horizon // 2)
    if b_half > 0 and b > to_mp(Fraction(CERTIFICATE_GROWTH_LIMIT)) * b_half:
        raise NotExponentialType(
            f"growth estimate rose from {mpmath.nstr(b_half, 6)} to {mpmath.nstr(b, 6)} "
            f"between horizons {horizon // 2} and {horizon}; the coefficients decay "
            f"slower than C b^j / j!"
        )
    if b == 0:
        b = to_mp(parse_number(b_min))
    else:
        # Absorbs the rounding of the root extraction
        b *= 1 + mpmath.mpf(2) ** (-(mpmath.mp.prec // 2))
    C = max(sizes[j] * factorial(j) / b**j for j in range(horizon + 1))
    if C == 0:
        C = mpmath.eps
    logger.debug(f"certificate_fit: C={mpmath.nstr(C, 8)}, b={mpmath.nstr(b, 8)}")
    return C, b


def _certificate_tail(f, rho, first):
    """sum_{j >= first} C (b rho)^j / j!, or None while not geometrically dominated."""
    C, b = (to_mp(v) for v in f.certificate)
    x = b * rho
    ratio = x / (first + 1)
    if ratio >= 1:
        return None
    return C * x**first / mpmath.factorial(first) / (1 - ratio)


def evaluate(f, xi, tail_tol=DEFAULT_TAIL_TOL, n_max=DEFAULT_SERIES_N_MAX):
    """f(xi) with a bound on the error of the truncated Taylor sum."""
    xi = to_mp(parse_number(xi))
    if f.closed_form is not None:
        return Evaluation(f.closed_form(xi), mpmath.mpf(0))
    rho = abs(xi)
    tol = to_mp(parse_number(tail_tol))
    limit = n_max if f.horizon is None else f.horizon
    J = min(16, limit)
    value = mpmath.mpf(0)
    power = mpmath.mpf(1)
    summed = 0
    while True:
        while summed <= J:
            value += to_mp(f.taylor(summed)) * power
            power *= xi
            summed += 1
        tail = _certificate_tail(f, rho, J + 1)
        if tail is not None and (tail < tol or J >= limit):
            break
        if J >= limit:
            raise NormNotCertifiable(
                f"Taylor tail of {f.label} is not dominated at |xi|={mpmath.nstr(rho, 6)} "
                f"with {J + 1} coefficients"
            )
        J = min(2 * J, limit)
    if f.coefficient_error:
        b = to_mp(f.certificate[1])
        tail += to_mp(f.coefficient_error) * mpmath.exp(b * rho)
    return Evaluation(value, tail)


def bnorm_estimate(f, B, grid=None, margin=DEFAULT_NORM_MARGIN, floor=NORM_FLOOR):
    """
    Sampled estimate of ||f||_B = sup |f(xi)| e^(-B|xi|). The lower value is the
    sampled maximum; the upper value adds evaluation tails and the certificate
    bound C e^((b-B) rho*) beyond the sampled radius cap rho*.
    """
    grid = grid or NormGrid()
    B = to_mp(parse_number(B))
    C, b = (to_mp(v) for v in f.certificate)
    if not B > b * (1 + to_mp(parse_number(margin))):
        raise NormNotCertifiable(
            f"B={mpmath.nstr(B, 6)} does not exceed the growth rate b={mpmath.nstr(b, 6)} "
            f"of {f.label} by the margin {margin}"
        )
    at_origin = evaluate(f, 0)
    level = max(abs(at_origin.value), to_mp(parse_number(floor)) * C)
    cap = max(to_mp(grid.rho0), mpmath.log(C / level) / (B - b)) if C > level else to_mp(grid.rho0)

    lower = abs(at_origin.value)
    lower_with_tail = lower + at_origin.tail_bound
    reached = mpmath.mpf(0)
    samples = 1
    for k in range(grid.radii):
        rho = grid.radius(k)
        if rho > cap:
            break
        reached = rho
        weight = mpmath.exp(-B * rho)
        for t in range(grid.angles):
            xi = rho * mpmath.expjpi(mpmath.mpf(2 * t) / grid.angles)
            point = evaluate(f, xi)
            size = abs(point.value)
            lower = max(lower, size * weight)
            lower_with_tail = max(lower_with_tail, (size + point.tail_bound) * weight)
            samples += 1
    edge = max(reached, to_mp(grid.rho0))
    upper = max(lower_with_tail, C * mpmath.exp((b - B) * edge))
    logger.debug(
        f"bnorm_estimate({f.label}, B={mpmath.nstr(B, 6)}): {samples} samples, "
        f"cap {mpmath.nstr(cap, 6)}, [{mpmath.nstr(lower, 8)}, {mpmath.nstr(upper, 8)}]"
    )
    return NormEstimate(lower, upper)


def restrict_at_zero(f):
    """f(0) = a_0."""
    return f.taylor(0)


def linear_combination(terms, label=None):
    """
    sum_j c_j f_j with certificate (sum |c_j| C_j, max b_j). Waves collapse into a
    WaveCombination.
    """
    terms = [(parse_number(c), f) for c, f in terms]
    if not terms:
        raise ConfigError("a linear combination needs at least one term")
    if all(isinstance(f, ExponentialWave) for _, f in terms):
        return WaveCombination([(c, f.frequency) for c, f in terms], label=label)

    scale = mpmath.fsum(abs(to_mp(c)) * to_mp(f.certificate[0]) for c, f in terms)
    rate = largest(magnitude(f.certificate[1]) for _, f in terms)
    horizons = [f.horizon for _, f in terms if f.horizon is not None]
    error = mpmath.fsum(abs(to_mp(c)) * to_mp(f.coefficient_error) for c, f in terms)

    def taylor(j):
        return mpmath.fsum(to_mp(c) * to_mp(f.taylor(j)) for c, f in terms)

    combination = GrowthFunction(
        taylor,
        (scale, rate),
        label=label or " + ".join(f.label for _, f in terms),
        horizon=min(horizons) if horizons else None,
        coefficient_error=error,
    )
    if all(f.closed_form is not None for _, f in terms):
        combination.closed_form = lambda xi: mpmath.fsum(
            to_mp(c) * f.closed_form(xi) for c, f in terms
        )
    return combination
