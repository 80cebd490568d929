"""Null-proportion estimators: Storey's upper-tail estimator and the
maximum-spacing estimator, plus the plug-in used for oracle runs."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

STOREY = "storey"
SPACING = "spacing"
ORACLE = "oracle"

DEFAULT_STOREY_LAMBDA = 0.5


class DegenerateSpacingError(ValueError):
    """All relevant order-statistic spacings collapsed to zero (tied sample)."""


@dataclass(frozen=True)
class NullProportionEstimate:
    value: float
    method: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if not 0.0 <= self.value <= 1.0:
            raise ValueError("estimate must lie in [0, 1]")


def storey_estimate(pvalues, lam: float = DEFAULT_STOREY_LAMBDA) -> NullProportionEstimate:
    """min{ (fraction of p > lam) / (1 - lam), 1 }."""
    p = np.asarray(pvalues, dtype=float)
    if p.size == 0:
        raise ValueError("storey_estimate requires a nonempty p-value list")
    if not 0.0 < lam < 1.0:
        raise ValueError("lambda must lie in (0, 1)")
    upper = np.count_nonzero(p > lam) / p.size
    value = min(upper / (1.0 - lam), 1.0)
    return NullProportionEstimate(value, STOREY, {"lambda": lam})


def spacing_estimate(pvalues, s: int) -> NullProportionEstimate:
    """min{ 2s / (m * Z), 1 } with Z the widest 2s-wide order spacing.

    Z = max over admissible j of P_(j+s) - P_(j-s); requires m >= 2s + 1.
    """
    p = np.sort(np.asarray(pvalues, dtype=float))
    m = p.size
    s = int(s)
    if s < 1:
        raise ValueError("spacing parameter must be a positive integer")
    if m < 2 * s + 1:
        raise ValueError(f"need at least {2 * s + 1} p-values for s={s} (got {m})")
    z = float(np.max(p[2 * s:] - p[: m - 2 * s]))
    if z == 0.0:
        raise DegenerateSpacingError("all spacings are zero; sample is fully tied")
    value = min(2.0 * s / (m * z), 1.0)
    return NullProportionEstimate(value, SPACING, {"s": s})


def default_spacing_schedule(m: int) -> int:
    """Spacing parameter s = max(1, round(m^0.7)).

    Grows faster than log(m) and slower than m, as the estimator's
    consistency conditions require.
    """
    if m < 1:
        raise ValueError("m must be positive")
    return max(1, round(m**0.7))


def oracle_estimate(r0: float) -> NullProportionEstimate:
    """Testing plug-in that returns the generative null proportion."""
    return NullProportionEstimate(float(r0), ORACLE, {})
