from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from math import factorial
from typing import Any, Callable, NamedTuple

import mpmath

from constants import (
    BITS_PER_ORDER,
    DEFAULT_AGREEMENT_TOL,
    DEFAULT_B_MIN,
    DEFAULT_ESCALATION_FACTOR,
    DEFAULT_MAX_BITS,
    DEFAULT_MIN_BITS,
    DEFAULT_SERIES_N_MAX,
    DEFAULT_SYMBOL_N_MAX,
    DEFAULT_TAIL_TOL,
    MIN_BITS,
    MODE_SUPEROSCILLATION,
    NORM_ANGLES,
    NORM_RADII,
    NORM_RHO0,
    OPERATOR_U,
)
from superosc.errors import ConfigError, TailNotBounded
from superosc.numbers import (
    INF,
    is_exact,
    largest,
    magnitude,
    parse_number,
    smallest,
    to_mp,
    total,
)

B_MIN = Fraction(DEFAULT_B_MIN)


# --- Precision ---


@dataclass(frozen=True)
class PrecisionPolicy:
    bits: int = DEFAULT_MIN_BITS
    escalation_factor: int = DEFAULT_ESCALATION_FACTOR
    agreement_tol: Fraction = Fraction(DEFAULT_AGREEMENT_TOL)
    max_bits: int = DEFAULT_MAX_BITS

    def __post_init__(self):
        if self.bits < MIN_BITS:
            raise ConfigError(f"precision.bits must be at least {MIN_BITS}, got {self.bits}")
        if self.max_bits < self.bits:
            raise ConfigError(
                f"precision.max_bits ({self.max_bits}) must be >= bits ({self.bits})"
            )
        if self.escalation_factor < 2:
            raise ConfigError("precision.escalation_factor must be at least 2")
        if not 0 < self.agreement_tol < 1:
            raise ConfigError("precision.agreement_tol must lie strictly between 0 and 1")

    @classmethod
    def for_order(cls, n, **overrides):
        """
        Default policy for sequences of order n: max(128, 8n) bits, with max_bits
        left at least one escalation step above.
        """
        bits = overrides.pop("bits", None) or max(DEFAULT_MIN_BITS, BITS_PER_ORDER * n)
        factor = overrides.get("escalation_factor", DEFAULT_ESCALATION_FACTOR)
        max_bits = max(overrides.pop("max_bits", DEFAULT_MAX_BITS), bits * factor)
        return cls(bits=bits, max_bits=max_bits, **overrides)


class EscalationResult(NamedTuple):
    value: Any
    error: Any
    bits: int
    escalations: int


# --- Nodes and coefficients ---


@dataclass(frozen=True)
class NodeSet:
    n: int
    scheme_tag: str
    # Exact Fractions where the node is rational, None where it is computed on demand
    points: tuple
    min_gap: Any = None

    @property
    def is_exact(self):
        return all(p is not None for p in self.points)

    def values(self):
        """The nodes at the working mpmath precision."""
        return [self._value(j) for j in range(self.n + 1)]

    def exact_or_mp(self):
        """Exact Fractions where available, mp values otherwise."""
        return [p if p is not None else self._value(j) for j, p in enumerate(self.points)]

    def _value(self, j):
        point = self.points[j]
        if point is not None:
            return to_mp(point)
        # Only chebyshev nodes are ever irrational
        return mpmath.cos(j * mpmath.pi / self.n)

    def __len__(self):
        return self.n + 1


@dataclass(frozen=True)
class CoefficientSet:
    nodes: NodeSet
    a: Any
    values: tuple
    exactness_flag: bool

    @property
    def n(self):
        return self.nodes.n

    def mp_values(self):
        return [to_mp(v) for v in self.values]

    def abs_sum(self):
        return total(magnitude(v) for v in self.values)


# --- Power series ---


class Envelope(NamedTuple):
    """Bound |g_m| <= scale * rate**(-m) / (m!)**factorial_power."""

    scale: Any
    rate: Any
    factorial_power: int = 0

    def bound(self, m):
        value = to_mp(self.scale) / to_mp(self.rate) ** m
        if self.factorial_power:
            value /= factorial(m) ** self.factorial_power
        return value


@dataclass(frozen=True, eq=False)
class PowerSeries:
    coeff_fn: Callable[[int], Any]
    radius: Any = INF
    truncation_order: int | None = None
    tag: str | None = None
    degree: int | None = None
    envelope: Envelope | None = None

    def coeff(self, m):
        if m < 0:
            raise IndexError(f"negative coefficient index {m}")
        if self.degree is not None and m > self.degree:
            return Fraction(0)
        if self.truncation_order is not None and m > self.truncation_order:
            raise TailNotBounded(
                f"coefficient {m} of series {self.tag or '<anonymous>'} is beyond its "
                f"truncation order {self.truncation_order}"
            )
        return self.coeff_fn(m)

    def coefficients(self, count):
        """The first `count` coefficients g_0 .. g_{count-1}."""
        return [self.coeff(m) for m in range(count)]

    def known_terms(self):
        """Number of coefficients that can be read without hitting the truncation."""
        limits = [
            v + 1 for v in (self.degree, self.truncation_order) if v is not None
        ]
        return min(limits) if limits else None

    @property
    def is_polynomial(self):
        return self.degree is not None

    def __repr__(self):
        return (
            f"PowerSeries(tag={self.tag!r}, radius={self.radius}, "
            f"degree={self.degree}, truncation_order={self.truncation_order})"
        )


# --- Growth space ---


class GrowthFunction:
    """
    An entire function given by its Taylor coefficients a_j together with a
    growth certificate (C, b) meaning |a_j| <= C b^j / j!.
    """

    def __init__(
        self,
        taylor,
        certificate,
        label="",
        *,
        horizon=None,
        coefficient_error=0,
        meta=None,
    ):
        self._taylor = taylor
        self.certificate = certificate
        self.label = label
        # Taylor coefficients beyond the horizon are unknown (bounded by the certificate)
        self.horizon = horizon
        # |error of a_j| <= coefficient_error * b^j / j!
        self.coefficient_error = coefficient_error
        self.meta = dict(meta or {})

    def taylor(self, j):
        if self.horizon is not None and j > self.horizon:
            raise TailNotBounded(
                f"Taylor coefficient {j} of {self.label} is beyond horizon {self.horizon}"
            )
        return self._taylor(j)

    def derivative_at_zero(self, j):
        """f^(j)(0) = a_j * j!"""
        return to_mp(self.taylor(j)) * factorial(j)

    closed_form = None

    def __repr__(self):
        return f"{type(self).__name__}({self.label!r}, certificate={self.certificate})"


class ExponentialWave(GrowthFunction):
    """xi -> exp(i * frequency * xi), with a_j = (i frequency)^j / j!."""

    def __init__(self, frequency, b_min=B_MIN):
        self.frequency = frequency
        b = magnitude(frequency)
        super().__init__(
            self._coefficient,
            (Fraction(1), b if b > 0 else parse_number(b_min)),
            label=f"wave({frequency})",
        )

    def _coefficient(self, j):
        return (mpmath.j * to_mp(self.frequency)) ** j / factorial(j)

    def derivative_at_zero(self, j):
        return (mpmath.j * to_mp(self.frequency)) ** j

    def closed_form(self, xi):
        return mpmath.exp(mpmath.j * to_mp(self.frequency) * xi)


class WaveCombination(GrowthFunction):
    """Sum_j c_j exp(i lambda_j xi) with the triangle-inequality certificate."""

    def __init__(self, terms, label=None, b_min=B_MIN):
        self.terms = tuple(terms)
        scale = total(magnitude(c) for c, _ in self.terms)
        rate = largest((magnitude(lam) for _, lam in self.terms), default=0)
        super().__init__(
            self._coefficient,
            (scale, rate if rate > 0 else parse_number(b_min)),
            label=label or f"combination of {len(self.terms)} waves",
        )

    def _coefficient(self, j):
        return self.derivative_at_zero(j) / factorial(j)

    def derivative_at_zero(self, j):
        return mpmath.fsum(
            to_mp(c) * (mpmath.j * to_mp(lam)) ** j for c, lam in self.terms
        )

    def closed_form(self, xi):
        return mpmath.fsum(
            to_mp(c) * mpmath.exp(mpmath.j * to_mp(lam) * xi) for c, lam in self.terms
        )


class NormEstimate(NamedTuple):
    lower: Any
    upper: Any


@dataclass(frozen=True)
class NormGrid:
    """Origin plus circles of radius rho0 * 2^(k/radial_density), `angles` points each."""

    rho0: Fraction = Fraction(NORM_RHO0)
    radii: int = NORM_RADII
    angles: int = NORM_ANGLES
    radial_density: int = 4

    def radius(self, k):
        return to_mp(self.rho0) * mpmath.mpf(2) ** (mpmath.mpf(k) / self.radial_density)

    def refined(self):
        return NormGrid(
            rho0=self.rho0,
            radii=2 * self.radii,
            angles=2 * self.angles,
            radial_density=2 * self.radial_density,
        )


# --- Problems, operators, evaluations ---


class Evaluation(NamedTuple):
    value: Any
    tail_bound: Any


@dataclass(frozen=True, eq=False)
class MultivarProblem:
    coeffs: CoefficientSet
    G: tuple
    mode: str = MODE_SUPEROSCILLATION
    B: Any = None
    tail_tol: Any = DEFAULT_TAIL_TOL
    series_n_max: int = DEFAULT_SERIES_N_MAX
    b_min: Any = B_MIN
    symbol_n_max: int = DEFAULT_SYMBOL_N_MAX

    @property
    def dimension(self):
        return len(self.G)

    @property
    def radius(self):
        """R = min over the series radii."""
        return smallest(g.radius for g in self.G)

    @property
    def a(self):
        return self.coeffs.a


@dataclass(frozen=True)
class ConvergencePoint:
    x: tuple
    n: int
    error: Any

    def __post_init__(self):
        if self.error < 0:
            raise ValueError("a convergence error cannot be negative")


@dataclass(frozen=True, eq=False)
class OperatorSymbol:
    kind: str
    sigma: PowerSeries
    truncation_order: int
    x: tuple
    G: tuple
    B: Any = None
    meta: dict = field(default_factory=dict)

    @property
    def is_U(self):
        return self.kind == OPERATOR_U

    def weight(self, k):
        """sigma_k / i^k, the factor in front of D^k."""
        return to_mp(self.sigma.coeff(k)) * (-mpmath.j) ** k


class ProbeResult(NamedTuple):
    max_ratio: Any
    ratios: dict


class DualRouteResult(NamedTuple):
    discrepancy: Any
    tail_bound: Any
    worst_point: tuple | None = None
    # every point satisfied gap <= its own combined tail bound
    within_bounds: bool = True


# --- Convergence harness ---


@dataclass(frozen=True)
class GridSpec:
    box: tuple
    points_per_axis: int

    def __post_init__(self):
        if self.points_per_axis < 2:
            raise ConfigError("points_per_axis must be at least 2")
        for low, high in self.box:
            if low > high:
                raise ConfigError(f"empty grid interval [{low}, {high}]")

    @classmethod
    def cube(cls, halfwidth, dimension, points_per_axis):
        halfwidth = Fraction(halfwidth)
        return cls(((-halfwidth, halfwidth),) * dimension, points_per_axis)

    @property
    def dimension(self):
        return len(self.box)

    def axis(self, index):
        low, high = self.box[index]
        steps = self.points_per_axis - 1
        return [low + (high - low) * Fraction(k, steps) for k in range(steps + 1)]

    def points(self):
        return list(product(*(self.axis(i) for i in range(self.dimension))))

    def refined(self):
        """Twice the resolution; 2p - 1 points per axis keep the old grid as a subset."""
        return GridSpec(self.box, 2 * self.points_per_axis - 1)


@dataclass
class ConvergenceReport:
    n_values: list = field(default_factory=list)
    sup_errors: list = field(default_factory=list)
    coefficient_max_magnitudes: list = field(default_factory=list)
    precision_bits_used: list = field(default_factory=list)
    dual_route_max_discrepancy: list | None = None
    failures: dict = field(default_factory=dict)
    worst_points: list = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        lengths = {
            len(self.n_values),
            len(self.sup_errors),
            len(self.coefficient_max_magnitudes),
            len(self.precision_bits_used),
        }
        if self.dual_route_max_discrepancy is not None:
            lengths.add(len(self.dual_route_max_discrepancy))
        if len(lengths) > 1:
            raise ValueError("ConvergenceReport columns must have equal lengths")

    def rows(self):
        dual = self.dual_route_max_discrepancy or [None] * len(self.n_values)
        return list(
            zip(
                self.n_values,
                self.sup_errors,
                self.coefficient_max_magnitudes,
                self.precision_bits_used,
                dual,
            )
        )

    def is_exact(self):
        return all(e is not None and is_exact(e) for e in self.sup_errors)
