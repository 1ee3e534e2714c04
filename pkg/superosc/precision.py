import logging
import threading
from collections.abc import Mapping

import mpmath

from models import EscalationResult, PrecisionPolicy
from superosc.errors import NoConvergenceAtMaxBits
from superosc.numbers import is_exact, is_inf, magnitude, to_mp

logger = logging.getLogger(__name__)


def _flatten(value):
    """Yields the numbers inside nested tuples, lists and mappings."""
    if value is None:
        return
    if isinstance(value, Mapping):
        for item in value.values():
            yield from _flatten(item)
    elif isinstance(value, (list, tuple)):
        for item in value:
            yield from _flatten(item)
    else:
        yield value


def _difference(left, right):
    if is_exact(left) and is_exact(right):
        return abs(left - right)
    if is_inf(left) or is_inf(right):
        return 0 if left == right else mpmath.inf
    return abs(to_mp(left) - to_mp(right))


def relative_discrepancy(previous, current):
    """
    Sup-norm relative discrepancy max|x_i - y_i| / max|y_i| between two results of
    the same shape. Falls back to the absolute discrepancy when `current` is all zero.
    """
    left = list(_flatten(previous))
    right = list(_flatten(current))
    if len(left) != len(right):
        raise ValueError(
            f"Cannot compare results of different shapes ({len(left)} vs {len(right)} values)"
        )
    if not right:
        return 0
    diff = max((_difference(x, y) for x, y in zip(left, right)), key=to_mp)
    scale = max((magnitude(y) for y in right if not is_inf(y)), key=to_mp, default=0)
    if scale == 0:
        return diff
    if is_exact(diff) and is_exact(scale):
        return diff / scale
    return to_mp(diff) / to_mp(scale)


# mpmath keeps its working precision in one process-wide context
_PRECISION_LOCK = threading.RLock()


def run_at(computation, bits):
    with _PRECISION_LOCK, mpmath.workprec(bits):
        return computation()


def with_escalation(computation, policy=None, label=None):
    """
    Runs `computation` (a zero-argument callable) at policy.bits and at
    min(bits * escalation_factor, max_bits), escalating until two consecutive runs
    agree to agreement_tol. Returns the higher-precision value with the observed
    discrepancy. A policy that starts at max_bits is checked against a run at half
    its precision. Concurrent calls are serialized.
    """
    policy = policy or PrecisionPolicy()
    label = label or getattr(computation, "__name__", "computation")
    with _PRECISION_LOCK:
        return _escalate(computation, policy, label)


def _escalate(computation, policy, label):
    bits = policy.bits
    if bits >= policy.max_bits:
        bits = policy.max_bits // 2
    previous = run_at(computation, bits)
    escalations = 0
    while True:
        if bits >= policy.max_bits:
            logger.error(f"{label}: no agreement below max_bits={policy.max_bits}")
            raise NoConvergenceAtMaxBits(
                f"{label} did not reach agreement {policy.agreement_tol} "
                f"before max_bits={policy.max_bits}",
                best=previous,
                bits=bits,
            )
        higher = min(bits * policy.escalation_factor, policy.max_bits)
        current = run_at(computation, higher)
        with mpmath.workprec(higher):
            discrepancy = relative_discrepancy(previous, current)
        if not (to_mp(discrepancy) > to_mp(policy.agreement_tol)):
            logger.debug(
                f"{label}: accepted at {higher} bits after {escalations} escalation(s), "
                f"discrepancy {mpmath.nstr(to_mp(discrepancy), 5)}"
            )
            return EscalationResult(current, discrepancy, higher, escalations)
        logger.debug(
            f"{label}: {bits} and {higher} bits disagree by "
            f"{mpmath.nstr(to_mp(discrepancy), 5)}, escalating"
        )
        escalations += 1
        previous = current
        bits = higher
