"""Arithmetic and comparisons on the extended reals (±inf allowed)."""

import math
from typing import Iterable, Optional

POS_INF = math.inf
NEG_INF = -math.inf


def ext_sum(values: Iterable[float], indeterminate: float = NEG_INF) -> float:
    """
    Sum of extended reals.

    Args:
        values: Terms, possibly infinite
        indeterminate: Value returned when both +inf and -inf occur

    Returns:
        The exactly rounded finite sum, the common infinity, or ``indeterminate``
    """
    finite = []
    has_pos = has_neg = False
    for value in values:
        value = float(value)
        if math.isnan(value):
            return math.nan
        if value == POS_INF:
            has_pos = True
        elif value == NEG_INF:
            has_neg = True
        else:
            finite.append(value)
    if has_pos and has_neg:
        return indeterminate
    if has_pos:
        return POS_INF
    if has_neg:
        return NEG_INF
    return math.fsum(finite)


def lhs_sum(values: Iterable[float]) -> float:
    """Left side of an inequality: an indeterminate sum does not bind."""
    return ext_sum(values, indeterminate=NEG_INF)


def rhs_sum(values: Iterable[float]) -> float:
    """Right side of an inequality: an indeterminate sum does not bind."""
    return ext_sum(values, indeterminate=POS_INF)


def ext_le(lhs: float, rhs: float, tol: float = 0.0) -> bool:
    """lhs ≤ rhs + tol, with -inf ≤ anything and anything ≤ +inf."""
    if math.isnan(lhs) or math.isnan(rhs):
        return False
    if lhs == NEG_INF or rhs == POS_INF:
        return True
    if lhs == POS_INF or rhs == NEG_INF:
        return False
    return lhs <= rhs + tol


def ext_slack(lhs: float, rhs: float) -> float:
    """rhs - lhs, infinite when either side is."""
    if math.isnan(lhs) or math.isnan(rhs):
        return math.nan
    if lhs == NEG_INF or rhs == POS_INF:
        return POS_INF
    if lhs == POS_INF or rhs == NEG_INF:
        return NEG_INF
    return rhs - lhs


def format_ext(value: Optional[float], digits: Optional[int] = None) -> str:
    """Render an extended real: ``+inf``/``-inf``/``nan`` or a float.

    Without ``digits`` the shortest round-tripping repr is used.
    """
    if value is None:
        return "n/a"
    value = float(value)
    if math.isnan(value):
        return "nan"
    if value == POS_INF:
        return "+inf"
    if value == NEG_INF:
        return "-inf"
    if digits is None:
        return repr(value)
    return f"{value:.{digits}f}"


def parse_ext(text: str) -> float:
    """Inverse of :func:`format_ext` for structured reports."""
    return float(text)
