"""
The infinite-order differential operators U and V, held as truncated series in
the differentiation symbol and applied to Taylor coefficient streams.

Both act on a function of one auxiliary variable xi through
    (op f)^(j)(0) = sum_k sigma_k i^(-k) f^(j+k)(0),
so applying them to sum_j Z_j e^(i xi h_j) and restricting to xi = 0 gives a
second route to the direct sums of the sequences module.
"""

import logging
from fractions import Fraction
from functools import reduce
from math import factorial

import mpmath

from constants import (
    DEFAULT_PROBE_FREQUENCIES,
    DEFAULT_PROBE_TERMS,
    DEFAULT_SYMBOL_N_MAX,
    DEFAULT_SYMBOL_N_START,
    DEFAULT_TAIL_TOL,
    ENVELOPE_SAFETY,
    MODE_SUPERSHIFT,
    OPERATOR_U,
    OPERATOR_V,
)
from models import (
    Evaluation,
    ExponentialWave,
    GrowthFunction,
    OperatorSymbol,
    PowerSeries,
    ProbeResult,
    WaveCombination,
)
from superosc.errors import ConfigError, OutOfRange, OutsideRadius, TailNotBounded
from superosc.growth_space import bnorm_estimate
from superosc.numbers import INF, is_exact, is_inf, lt, magnitude, parse_number, smallest, to_mp
from superosc.series import cauchy_product, series_exp

logger = logging.getLogger(__name__)

# Output coefficient errors carry this many working epsilons of rounding per unit of C S
ROUNDING_ULPS = 16


def codomain_parameter(B):
    """Growth parameter 8eB of the space the operators map A_{1,B} into."""
    if B is None:
        return None
    return 8 * mpmath.e * to_mp(B)


def _coordinates(x, G):
    x = tuple(parse_number(v) for v in x)
    if len(x) != len(G):
        raise ConfigError(f"{len(x)} coordinates given for {len(G)} series")
    return x


def build_y_series(x, G):
    """y_p = i sum_l x_l g_{l,p}, including the constant term p = 0."""
    x = _coordinates(x, G)
    radius = smallest(g.radius for g in G)
    orders = [g.truncation_order for g in G if g.truncation_order is not None]
    truncation = min(orders) if orders else None
    if all(v == 0 for v in x):
        return PowerSeries(lambda p: 0 * p, radius=radius, tag="y(0)", degree=0)

    def coefficient(p):
        return mpmath.j * mpmath.fsum(to_mp(x_l) * to_mp(g.coeff(p)) for x_l, g in zip(x, G))

    degree = max(g.degree for g in G) if all(g.is_polynomial for g in G) else None
    return PowerSeries(
        coefficient,
        radius=radius,
        truncation_order=truncation,
        tag="y(" + ", ".join(g.tag or "?" for g in G) + ")",
        degree=degree,
    )


def _symbol_meta(x, G, B):
    R = smallest(g.radius for g in G)
    meta = {"codomain_B": codomain_parameter(B)}
    if B is not None:
        meta["B_compatible"] = is_inf(R) or lt(to_mp(B), to_mp(R) / (4 * mpmath.e))
    return meta


def build_U(x, G, N, B=None):
    """U with symbol exp(i sum_l x_l G_l(lambda)) to order N."""
    x = _coordinates(x, G)
    sigma = series_exp(build_y_series(x, G), N)
    return OperatorSymbol(OPERATOR_U, sigma, N, x, tuple(G), B, _symbol_meta(x, G, B))


def _scaled_series(x_l, g):
    """lambda -> G(x_l lambda): coefficients g_m x_l^m."""

    def coefficient(m):
        g_m = g.coeff(m)
        if is_exact(g_m) and is_exact(x_l):
            return g_m * x_l**m
        return to_mp(g_m) * to_mp(x_l) ** m

    if x_l == 0:
        radius = INF
    elif is_inf(g.radius):
        radius = INF
    else:
        radius = g.radius / magnitude(x_l) if is_exact(g.radius) and is_exact(x_l) else (
            to_mp(g.radius) / to_mp(magnitude(x_l))
        )
    return PowerSeries(
        coefficient,
        radius=radius,
        truncation_order=g.truncation_order,
        tag=f"{g.tag}({x_l} lambda)",
        degree=g.degree,
    )


def build_V(x, G, N, B=None):
    """
    V with symbol prod_l G_l(x_l lambda), held as its total-degree collapse: the
    lambda^k coefficient is sum_{m_1+...+m_d=k} prod_l g_{l,m_l} x_l^m_l.
    """
    x = _coordinates(x, G)
    factors = [_scaled_series(x_l, g) for x_l, g in zip(x, G)]
    if len(factors) == 1:
        sigma = factors[0]
    else:
        sigma = reduce(lambda s, t: cauchy_product(s, t, N), factors)
    return OperatorSymbol(OPERATOR_V, sigma, N, x, tuple(G), B, _symbol_meta(x, G, B))


def build_symbol(kind, x, G, N, B=None):
    if kind == OPERATOR_U:
        return build_U(x, G, N, B)
    if kind == OPERATOR_V:
        return build_V(x, G, N, B)
    raise ConfigError(f"Unknown operator kind {kind!r}")


def symbol_tail(sigma, N, b):
    """
    Bound on sum_{k > N} |sigma_k| b^k from an envelope C r^k fitted on the upper
    half of the computed coefficients. None when the fitted ratio r is not below 1.
    """
    if sigma.is_polynomial and sigma.degree <= N:
        return mpmath.mpf(0)
    b = to_mp(b)
    window = range(max(1, N // 2), N + 1)
    terms = {k: abs(to_mp(sigma.coeff(k))) * b**k for k in window}
    nonzero = {k: t for k, t in terms.items() if t > 0}
    if not nonzero:
        return mpmath.mpf(0)
    r = max(t ** (mpmath.mpf(1) / k) for k, t in nonzero.items())
    if r >= 1:
        return None
    scale = ENVELOPE_SAFETY * max(t / r**k for k, t in nonzero.items())
    return scale * r ** (N + 1) / (1 - r)


def _weights(op, N):
    return [op.weight(k) for k in range(N + 1)]


def apply_operator(op, f, N=None, M=0, tail_tol=DEFAULT_TAIL_TOL, n_max=DEFAULT_SYMBOL_N_MAX):
    """
    Applies the operator to f. Output Taylor coefficients, for j <= M:
        c_j = sum_{k <= N} sigma_k i^(-k) f^(j+k)(0) / j!
    N is doubled from the symbol's order until the certificate-dominated k-tail of
    c_0 is below tail_tol (or fixed when given). The output certificate is (C S, b)
    with S = sum_k |sigma_k| b^k plus the fitted tail.
    """
    C, b = (to_mp(v) for v in f.certificate)
    tol = to_mp(parse_number(tail_tol))
    adaptive = N is None
    N = N or max(op.truncation_order, DEFAULT_SYMBOL_N_START)
    while True:
        if N > op.truncation_order:
            op = build_symbol(op.kind, op.x, op.G, N, op.B)
        tail = symbol_tail(op.sigma, N, b)
        if tail is not None and (C * tail < tol or not adaptive):
            break
        if not adaptive or N >= n_max:
            raise TailNotBounded(
                f"symbol tail of {op.kind} is "
                f"{'unbounded' if tail is None else mpmath.nstr(C * tail, 5)} at N={N} "
                f"(tolerance {mpmath.nstr(tol, 5)}, cap {n_max})"
            )
        N = min(2 * N, n_max)
        logger.debug(f"apply_operator({op.kind}): raising symbol order to {N}")

    if f.horizon is not None and f.horizon < M + N:
        raise TailNotBounded(
            f"{f.label} has {f.horizon + 1} Taylor coefficients; {M + N + 1} are needed"
        )
    weights = _weights(op, N)
    head = mpmath.fsum(abs(w) * b**k for k, w in enumerate(weights))
    S = head + tail
    error = C * tail + to_mp(f.coefficient_error) * S + ROUNDING_ULPS * mpmath.eps * C * S
    derivatives = {}

    def derivative(order):
        if order not in derivatives:
            derivatives[order] = f.derivative_at_zero(order)
        return derivatives[order]

    coefficients = {}

    def taylor(j):
        if j not in coefficients:
            total = mpmath.fsum(w * derivative(j + k) for k, w in enumerate(weights) if w != 0)
            coefficients[j] = total / factorial(j)
        return coefficients[j]

    result = GrowthFunction(
        taylor,
        (C * S, b),
        label=f"{op.kind}[{f.label}]",
        horizon=M,
        coefficient_error=error,
        meta={
            "N": N,
            "symbol_tail": tail,
            "codomain_B": op.meta.get("codomain_B"),
            "B_compatible": op.meta.get("B_compatible"),
        },
    )
    logger.debug(
        f"apply_operator({op.kind}): N={N}, S={mpmath.nstr(S, 8)}, "
        f"c_0 error {mpmath.nstr(error, 5)}"
    )
    return result


def check_v_admissible(x, G, B):
    """|x_l| < R/(4eB) for every coordinate."""
    if B is None:
        return
    R = smallest(g.radius for g in G)
    if is_inf(R):
        return
    bound = to_mp(R) / (4 * mpmath.e * to_mp(B))
    for x_l in x:
        if not lt(magnitude(x_l), bound):
            raise OutsideRadius(
                f"|x| = {magnitude(x_l)} is not below R/(4eB) = {mpmath.nstr(bound, 8)}"
            )


def _kind_for(problem):
    return OPERATOR_V if problem.mode == MODE_SUPERSHIFT else OPERATOR_U


def _route(problem, x, f, N):
    kind = _kind_for(problem)
    x = _coordinates(x, problem.G)
    op = build_symbol(kind, x, problem.G, N or DEFAULT_SYMBOL_N_START, problem.B)
    result = apply_operator(
        op, f, N=N, M=0, tail_tol=problem.tail_tol, n_max=problem.symbol_n_max
    )
    return Evaluation(result.taylor(0), result.coefficient_error)


def operator_route_Fn(problem, x, N=None):
    """
    F_n(x) through the operator: U (superoscillation) or V (supershift) applied to
    sum_j Z_j e^(i xi h_j), restricted to xi = 0.
    """
    x = _coordinates(x, problem.G)
    if problem.mode == MODE_SUPERSHIFT:
        check_v_admissible(x, problem.G, problem.B)
    coeffs = problem.coeffs
    terms = [
        (z, h) for z, h in zip(coeffs.values, coeffs.nodes.exact_or_mp()) if z != 0
    ]
    f = WaveCombination(terms, label=f"f_{coeffs.n}", b_min=problem.b_min)
    return _route(problem, x, f, N)


def limit_route_target(problem, x, N=None):
    """The operator applied to e^(i xi a), restricted to xi = 0."""
    x = _coordinates(x, problem.G)
    a = problem.a
    R = problem.radius
    if problem.mode == MODE_SUPERSHIFT:
        if not is_inf(R):
            for x_l in x:
                if not lt(to_mp(magnitude(x_l)) * to_mp(magnitude(a)), R):
                    raise OutsideRadius(f"|x| = {magnitude(x_l)} is not below R/|a|")
    elif not lt(magnitude(a), R):
        raise OutsideRadius(f"|a| = {magnitude(a)} is not below R = {R}")
    return _route(problem, x, ExponentialWave(a, b_min=problem.b_min), N)


def default_probe_family(B):
    """Waves at the default frequencies, scaled down when B/2 is below 1 so every norm stays finite."""
    B = parse_number(B)
    half = B / 2 if is_exact(B) else to_mp(B) / 2
    scale = smallest([Fraction(1), half])
    if is_exact(scale):
        return [ExponentialWave(Fraction(v) * scale) for v in DEFAULT_PROBE_FREQUENCIES]
    return [ExponentialWave(to_mp(Fraction(v)) * scale) for v in DEFAULT_PROBE_FREQUENCIES]


def continuity_probe(
    kind, x, G, B, family=None, grid=None, N=None, M=DEFAULT_PROBE_TERMS, n_max=DEFAULT_SYMBOL_N_MAX
):
    """
    Sampled ratios ||op f||_{8eB} / ||f||_B over a family of test functions, both
    norms taken as sampled maxima on the same grid.
    """
    x = _coordinates(x, G)
    B = parse_number(B)
    R = smallest(g.radius for g in G)
    if kind == OPERATOR_U and not is_inf(R):
        if not lt(to_mp(B), to_mp(R) / (4 * mpmath.e)):
            raise OutOfRange(f"U is only continuous for B < R/(4e); got B = {B}, R = {R}")
    if kind == OPERATOR_V:
        check_v_admissible(x, G, B)
    if family is None:
        family = default_probe_family(B)
    target_B = codomain_parameter(B)
    op = build_symbol(kind, x, G, N or DEFAULT_SYMBOL_N_START, B)
    ratios = {}
    for f in family:
        image = apply_operator(op, f, N=N, M=M, n_max=n_max)
        before = bnorm_estimate(f, B, grid).lower
        after = bnorm_estimate(image, target_B, grid).lower
        ratios[f.label] = after / before
        logger.debug(f"continuity_probe({kind}): {f.label} ratio {mpmath.nstr(ratios[f.label], 8)}")
    return ProbeResult(max(ratios.values()), ratios)


def _majorant_sum(coefficients, argument, radius, tol=DEFAULT_TAIL_TOL, n_max=DEFAULT_SYMBOL_N_MAX):
    """sum_m (m+1) |c_m| argument^m by direct summation; infinity when it diverges."""
    if not is_inf(radius) and not lt(argument, radius):
        return mpmath.inf
    argument = to_mp(argument)
    tol = to_mp(parse_number(tol))
    total = mpmath.mpf(0)
    small = 0
    for m in range(n_max + 1):
        try:
            c = coefficients(m)
        except TailNotBounded:
            break
        term = (m + 1) * abs(to_mp(c)) * argument**m
        total += term
        small = small + 1 if term <= tol * max(total, 1) else 0
        if small >= 8:
            break
    return total


def continuity_majorant(kind, x, G, B):
    """
    The majorant series bounding the continuity constant of the operator on
    A_{1,B}: for U, exp(sum_p |y_p| (p+2) (2b)^p); for V,
    prod_l sum_m (m+1) |g_{l,m}| (2b|x_l|)^m; with b = 2eB.
    """
    x = _coordinates(x, G)
    b = 2 * mpmath.e * to_mp(parse_number(B))
    if kind == OPERATOR_U:
        y = build_y_series(x, G)
        # (p+2) = (p+1) + 1 splits into two majorant sums
        inner = _majorant_sum(y.coeff, 2 * b, y.radius)
        if is_inf(inner):
            return mpmath.inf
        plain = _majorant_sum(lambda p: y.coeff(p) / (p + 1), 2 * b, y.radius)
        return mpmath.exp(inner + plain)
    if kind == OPERATOR_V:
        result = mpmath.mpf(1)
        for x_l, g in zip(x, G):
            factor = _majorant_sum(g.coeff, 2 * b * abs(to_mp(x_l)), g.radius)
            if is_inf(factor):
                return mpmath.inf
            result *= factor
        return result
    raise ConfigError(f"Unknown operator kind {kind!r}")
