import logging
from fractions import Fraction

import mpmath

from constants import (
    DEFAULT_CHECK_POINTS_PER_AXIS,
    DEFAULT_DECREASE_FACTOR,
    DEFAULT_DECREASING_SHARE,
    DEFAULT_POINTS_PER_AXIS,
    MODE_SUPERSHIFT,
    SUPERSHIFT_BOX_SHRINK,
)
from models import ConvergencePoint, ConvergenceReport, DualRouteResult, GridSpec, PrecisionPolicy
from superosc.coefficients import coefficient_magnitude
from superosc.errors import ConfigError, NoConvergenceAtMaxBits, OutOfRange, SuperoscError
from superosc.numbers import is_exact, is_inf, largest, lt, magnitude, to_mp
from superosc.operator_engine import operator_route_Fn
from superosc.precision import with_escalation
from superosc.sequences import (
    admissible_halfwidth,
    evaluate_sequence_many,
    evaluate_target,
)

logger = logging.getLogger(__name__)


def supershift_halfwidth(problem):
    """min(1, 9/10 R'), rounded down to a rational with denominator 10^6."""
    R_prime = admissible_halfwidth(problem.a, problem.B, [g.radius for g in problem.G])
    if is_inf(R_prime):
        return Fraction(1)
    if is_exact(R_prime):
        shrunk = Fraction(R_prime) * Fraction(SUPERSHIFT_BOX_SHRINK)
    else:
        shrunk = to_mp(R_prime) * to_mp(Fraction(SUPERSHIFT_BOX_SHRINK))
        shrunk = Fraction(int(mpmath.floor(shrunk * 10**6)), 10**6)
    return min(Fraction(1), shrunk)


def default_grid(problem, points_per_axis=DEFAULT_POINTS_PER_AXIS):
    """[-1, 1]^d for superoscillation; [-w, w]^d with w = min(1, 0.9 R') for supershift."""
    if problem.mode == MODE_SUPERSHIFT:
        halfwidth = supershift_halfwidth(problem)
    else:
        halfwidth = Fraction(1)
    return GridSpec.cube(halfwidth, problem.dimension, points_per_axis)


def check_grid(problem, grid):
    """Rejects grids of the wrong dimension and supershift grids outside the R' box."""
    if grid.dimension != problem.dimension:
        raise ConfigError(
            f"grid has {grid.dimension} axes but the problem has {problem.dimension}"
        )
    if problem.mode == MODE_SUPERSHIFT:
        R_prime = admissible_halfwidth(problem.a, problem.B, [g.radius for g in problem.G])
        for low, high in grid.box:
            for end in (low, high):
                if not lt(magnitude(end), R_prime):
                    raise OutOfRange(
                        f"grid coordinate {end} lies outside the admissible box |x| < {R_prime}"
                    )
    return grid


def absolute_error(left, right):
    if is_exact(left) and is_exact(right):
        return abs(Fraction(left) - Fraction(right))
    return abs(to_mp(left) - to_mp(right))


def grid_errors(problem, grid):
    """ConvergencePoint per grid point, in grid order."""
    points = grid.points()
    values = evaluate_sequence_many(problem, points)
    n = problem.coeffs.n
    return [
        ConvergencePoint(x, n, absolute_error(value.value, evaluate_target(problem, x).value))
        for x, value in zip(points, values)
    ]


def _sup(errors):
    worst = None
    for point in errors:
        if worst is None or lt(worst.error, point.error):
            worst = point
    return worst


def sweep(factory, n_list, grid, policy=None, dual_route_grid=None, metadata=None):
    """
    For each n builds the problem through `factory(n)` and records the sup over the
    grid of |F_n - target|, max_j |Z_j| and the precision reached. `policy` is a
    PrecisionPolicy or a callable n -> PrecisionPolicy. Failures are recorded per n
    and the sweep carries on.
    """
    if any(b <= a for a, b in zip(n_list, n_list[1:])):
        raise ConfigError("n_list must be strictly increasing")
    report = ConvergenceReport(
        dual_route_max_discrepancy=[] if dual_route_grid is not None else None,
        metadata=dict(metadata or {}),
    )
    points = grid.points()
    report.metadata.setdefault("points", len(points))
    checked = False
    for n in n_list:
        if callable(policy):
            run_policy = policy(n)
        else:
            run_policy = policy or PrecisionPolicy.for_order(n)

        def computation():
            return [point.error for point in grid_errors(factory(n), grid)]

        try:
            if not checked:
                with mpmath.workprec(run_policy.bits):
                    check_grid(factory(n), grid)
                checked = True
            result = with_escalation(computation, run_policy, label=f"sweep n={n}")
            with mpmath.workprec(result.bits):
                problem = factory(n)
                worst = _sup(ConvergencePoint(x, n, e) for x, e in zip(points, result.value))
                x, sup_error = worst.x, worst.error
                max_coeff, _ = coefficient_magnitude(problem.coeffs)
                discrepancy = None
                if dual_route_grid is not None:
                    discrepancy = dual_route_check(problem, dual_route_grid).discrepancy
        except SuperoscError as e:
            logger.warning(f"sweep: n={n} failed with {type(e).__name__}: {e}")
            report.n_values.append(n)
            report.sup_errors.append(None)
            report.coefficient_max_magnitudes.append(None)
            report.precision_bits_used.append(
                e.bits if isinstance(e, NoConvergenceAtMaxBits) else None
            )
            report.worst_points.append(None)
            if dual_route_grid is not None:
                report.dual_route_max_discrepancy.append(None)
            report.failures[n] = f"{type(e).__name__}: {e}"
            continue
        report.n_values.append(n)
        report.sup_errors.append(sup_error)
        report.coefficient_max_magnitudes.append(max_coeff)
        report.precision_bits_used.append(result.bits)
        report.worst_points.append(x)
        if dual_route_grid is not None:
            report.dual_route_max_discrepancy.append(discrepancy)
        logger.info(
            f"sweep: n={n} sup error {mpmath.nstr(to_mp(sup_error), 6)} at {result.bits} bits"
        )
    return report


def dual_route_check(problem, grid=None, policy=None):
    """
    Max over the grid of |direct F_n - operator route F_n|, with the largest
    combined tail bound of the two routes.
    """
    grid = grid or GridSpec.cube(
        default_grid(problem).box[0][1], problem.dimension, DEFAULT_CHECK_POINTS_PER_AXIS
    )
    points = grid.points()

    def compare():
        direct = evaluate_sequence_many(problem, points)
        worst = DualRouteResult(mpmath.mpf(0), mpmath.mpf(0), None)
        within = True
        for x, value in zip(points, direct):
            routed = operator_route_Fn(problem, x)
            gap = abs(to_mp(value.value) - to_mp(routed.value))
            bound = to_mp(value.tail_bound) + to_mp(routed.tail_bound)
            within = within and gap <= bound
            if worst.worst_point is None or gap > worst.discrepancy:
                worst = DualRouteResult(gap, largest([worst.tail_bound, bound]), x)
            else:
                worst = worst._replace(tail_bound=largest([worst.tail_bound, bound]))
        return worst._replace(within_bounds=within)

    if policy is None:
        return compare()
    with mpmath.workprec(policy.bits):
        return compare()


def decreases_by_factor(report, factor=DEFAULT_DECREASE_FACTOR):
    """sup_error at the largest n is at most sup_error at the smallest n over `factor`."""
    errors = [e for e in report.sup_errors if e is not None]
    if len(errors) < 2:
        return False
    first, last = to_mp(errors[0]), to_mp(errors[-1])
    return last * factor <= first


def decreasing_share(report):
    """Share of consecutive n pairs whose sup error decreases (or is already zero)."""
    errors = [to_mp(e) for e in report.sup_errors if e is not None]
    pairs = list(zip(errors, errors[1:]))
    if not pairs:
        return 0
    good = sum(1 for before, after in pairs if after < before or after == 0)
    return Fraction(good, len(pairs))


def is_converging(report, factor=DEFAULT_DECREASE_FACTOR, share=DEFAULT_DECREASING_SHARE):
    return decreases_by_factor(report, factor) and decreasing_share(report) >= Fraction(share)
