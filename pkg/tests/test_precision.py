import threading
import time
from fractions import Fraction

import mpmath
import pytest

from models import PrecisionPolicy
from superosc.coefficients import moments, solve_coefficients
from superosc.errors import ConfigError, NoConvergenceAtMaxBits
from superosc.nodes import generate_nodes
from superosc.precision import relative_discrepancy, run_at, with_escalation


def test_policy_rejects_bad_settings():
    with pytest.raises(ConfigError):
        PrecisionPolicy(bits=32)
    with pytest.raises(ConfigError):
        PrecisionPolicy(bits=256, max_bits=128)
    with pytest.raises(ConfigError):
        PrecisionPolicy(escalation_factor=1)
    with pytest.raises(ConfigError):
        PrecisionPolicy(agreement_tol=Fraction(1))


def test_policy_for_order_scales_with_n():
    assert PrecisionPolicy.for_order(4).bits == 128
    assert PrecisionPolicy.for_order(16).bits == 128
    assert PrecisionPolicy.for_order(40).bits == 320
    assert PrecisionPolicy.for_order(40, bits=512).bits == 512
    # max_bits stays one escalation step above bits
    assert PrecisionPolicy.for_order(2000).max_bits == 32000
    assert PrecisionPolicy.for_order(2000, escalation_factor=4).max_bits == 64000


def test_exact_computation_is_accepted_at_once(policy):
    """
    GIVEN a computation with an exact result
    WHEN it runs under escalation
    THEN it is accepted after the first comparison with zero discrepancy.
    """
    result = with_escalation(lambda: Fraction(1) + Fraction(1), policy)
    assert result.value == 2
    assert result.error == 0
    assert result.bits == 256
    assert result.escalations == 0


def test_cancellation_forces_escalation():
    """
    GIVEN the moment sum_j Z_j h_j^20 for n=20, a=2 computed in floating point
    WHEN it starts at 64 bits
    THEN precision is escalated at least once and the result matches a^20.
    """
    nodes = generate_nodes("equispaced", 20)

    def computation():
        coeffs = solve_coefficients(nodes, 2, exact=False)
        return moments(coeffs, 20)[20]

    result = with_escalation(computation, PrecisionPolicy(bits=64))
    assert result.escalations >= 1
    with mpmath.workprec(result.bits):
        assert abs(result.value - 2**20) / 2**20 < mpmath.mpf("1e-20")


def test_escalation_stops_at_max_bits():
    """
    GIVEN a computation whose value depends on the working precision itself
    WHEN max_bits is reached without agreement
    THEN NoConvergenceAtMaxBits is raised with the best value and its precision.
    """
    policy = PrecisionPolicy(bits=128, max_bits=256)
    with pytest.raises(NoConvergenceAtMaxBits) as excinfo:
        with_escalation(lambda: mpmath.mpf(mpmath.mp.prec), policy)
    assert excinfo.value.bits == 256
    assert excinfo.value.best == 256


def test_relative_discrepancy_shapes():
    assert relative_discrepancy([1, 2], [1, 2]) == 0
    assert relative_discrepancy([Fraction(1)], [Fraction(2)]) == Fraction(1, 2)
    # Falls back to the absolute difference when the reference vanishes
    assert relative_discrepancy({"a": Fraction(1, 4)}, {"a": Fraction(0)}) == Fraction(1, 4)
    with pytest.raises(ValueError):
        relative_discrepancy([1, 2], [1])


def test_run_at_restores_precision():
    before = mpmath.mp.prec
    assert run_at(lambda: mpmath.mp.prec, 300) == 300
    assert mpmath.mp.prec == before


@pytest.mark.parametrize(
    "policy",
    [
        PrecisionPolicy(bits=8192, max_bits=8192),
        PrecisionPolicy(bits=5000, max_bits=8192),
        PrecisionPolicy(bits=64, max_bits=64),
        PrecisionPolicy.for_order(1100),
    ],
)
def test_exact_computation_is_accepted_under_any_policy(policy):
    """
    GIVEN a policy whose next escalation step would pass max_bits
    WHEN an exact computation runs under it
    THEN the last run is capped at max_bits and the result is (2, 0).
    """
    result = with_escalation(lambda: Fraction(1) + Fraction(1), policy)
    assert result.value == 2
    assert result.error == 0
    assert result.bits == min(policy.bits * policy.escalation_factor, policy.max_bits)


def test_policy_at_max_bits_is_checked_below():
    # Test that the reference run sits one halving under the cap
    seen = []

    def computation():
        seen.append(mpmath.mp.prec)
        return mpmath.mpf(1) / 3

    result = with_escalation(computation, PrecisionPolicy(bits=512, max_bits=512))
    assert seen == [256, 512]
    assert result.bits == 512


def test_rerun_from_higher_precision_stays_within_four_errors():
    """
    GIVEN a floating point result accepted with an error estimate
    WHEN the same computation is escalated from four times the starting bits
    THEN the two values differ by at most four times the reported error.
    """
    def computation():
        return mpmath.exp(mpmath.mpf(1) / 3) * mpmath.pi

    low = with_escalation(computation, PrecisionPolicy(bits=128))
    high = with_escalation(computation, PrecisionPolicy(bits=512))
    with mpmath.workprec(high.bits):
        assert abs(high.value - low.value) <= 4 * low.error * abs(low.value)


def test_concurrent_escalations_keep_their_own_precision():
    """
    GIVEN four threads escalating from different starting precisions
    WHEN their computations overlap in time
    THEN every run sees the same working precision before and after it yields.
    """
    observed = []

    def computation():
        before = mpmath.mp.prec
        time.sleep(0.01)
        observed.append((before, mpmath.mp.prec))
        return mpmath.mpf(1) / 7

    threads = [
        threading.Thread(target=with_escalation, args=(computation, PrecisionPolicy(bits=bits)))
        for bits in (128, 1024, 256, 2048)
    ]
    for thread in threads:
        thread.start()
    for thread in threads:
        thread.join()
    assert len(observed) == 8
    assert all(before == after for before, after in observed)
