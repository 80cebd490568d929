"""BH-family rejection procedures, proportion-matching calibration math,
asymptotic threshold solving, and confusion metrics."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .distmodel import LabeledSample
from .estimators import NullProportionEstimate

R0_STAR_CLAMP = 1.0 - 1e-6


@dataclass(frozen=True)
class RejectionOutcome:
    """Indices rejected by a threshold procedure, with the realized threshold."""

    rejected: np.ndarray  # indices into the input p-value vector
    k_hat: int
    tau: float


def _empty_outcome() -> RejectionOutcome:
    return RejectionOutcome(np.empty(0, dtype=int), 0, 0.0)


def bh_procedure(pvalues, alpha: float) -> RejectionOutcome:
    """Step-up BH: reject the k largest-feasible smallest p-values.

    k_hat is the largest k with P_(k) <= alpha*k/m; everything at or below
    tau = alpha*k_hat/m is rejected (ties at the threshold included).
    """
    if not 0.0 < alpha <= 1.0:
        raise ValueError("alpha must lie in (0, 1]")
    p = np.asarray(pvalues, dtype=float)
    m = p.size
    if m == 0:
        return _empty_outcome()
    ps = np.sort(p)
    ok = ps <= alpha * np.arange(1, m + 1) / m
    if not ok.any():
        return _empty_outcome()
    k_hat = int(np.flatnonzero(ok)[-1]) + 1
    tau = alpha * k_hat / m
    rejected = np.flatnonzero(p <= tau)
    return RejectionOutcome(rejected, k_hat, tau)


def adaptive_bh(pvalues, alpha: float, estimate: NullProportionEstimate) -> RejectionOutcome:
    """BH at the adapted level min(alpha / r0_hat, 1)."""
    if estimate.value == 0.0:
        raise ValueError("null-proportion estimate of 0 gives an undefined level")
    return bh_procedure(pvalues, min(alpha / estimate.value, 1.0))


def beta_slope(alpha: float, r0: float) -> float:
    """Slope of the line whose supremum crossing with F is the BH threshold."""
    if not 0.0 < alpha <= 1.0:
        raise ValueError("alpha must lie in (0, 1]")
    if not 0.0 <= r0 < 1.0:
        raise ValueError("r0 must lie in [0, 1); the all-null case is degenerate")
    return (1.0 / alpha - r0) / (1.0 - r0)


def local_alpha(beta_star: float, r0_local: float) -> float:
    """Local test size matching a global slope: 1 / ((1-r0)*beta + r0)."""
    if beta_star < 1.0:
        raise ValueError("beta_star must be >= 1")
    if not 0.0 <= r0_local < 1.0:
        raise ValueError("r0_local must lie in [0, 1)")
    return 1.0 / ((1.0 - r0_local) * beta_star + r0_local)


@dataclass(frozen=True)
class Calibration:
    r0_star_hat: float
    beta_star_hat: float
    alpha_locals: np.ndarray
    m0_hats: np.ndarray | None = None  # integer-message variant payloads


def calibrate_proportion_matching(
    counts, estimates, alpha: float, integer_messages: bool = False
) -> Calibration:
    """Pooled null-proportion, global slope, and per-node adapted sizes.

    With integer_messages, nodes contribute rounded null counts
    m0_hat = floor(r0_hat*m + 1/2) and the pooled proportion is built from
    their sum, mirroring the integer wire format.
    """
    counts = np.asarray(counts, dtype=int)
    r0s = np.array(
        [e.value if isinstance(e, NullProportionEstimate) else float(e) for e in estimates]
    )
    if np.any(counts <= 0):
        raise ValueError("per-node counts must be positive")
    if counts.shape != r0s.shape:
        raise ValueError("counts and estimates must align")
    if np.any((r0s < 0.0) | (r0s > 1.0)):
        raise ValueError("estimates must lie in [0, 1]")
    if np.all(r0s >= 1.0):
        raise ValueError("no signal anywhere: every node estimates all nulls")
    m = int(counts.sum())
    m0_hats = None
    if integer_messages:
        m0_hats = np.floor(r0s * counts + 0.5).astype(int)
        r0_star = m0_hats.sum() / m
    else:
        r0_star = float(np.dot(r0s, counts)) / m
    r0_star = min(r0_star, R0_STAR_CLAMP)
    beta_star = beta_slope(alpha, r0_star)
    alphas = np.array([local_alpha(beta_star, min(r, R0_STAR_CLAMP)) for r in r0s])
    return Calibration(r0_star, beta_star, alphas, m0_hats)


def asymptotic_threshold(cdf, alpha: float, grid: int = 10_000, tol: float = 1e-10) -> float:
    """Largest fixed point of G(t) = t/alpha on [0, 1].

    Scans a uniform grid downward from t=1 for a sign change of
    G(t) - t/alpha and bisects the bracketing cell; returns 0 when the
    curve never rises above the line away from the origin.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    ts = np.linspace(0.0, 1.0, grid + 1)
    diff = np.asarray(cdf(ts), dtype=float) - ts / alpha
    # skip t=0 where the difference is trivially zero
    pos = np.flatnonzero(diff[1:] >= 0.0) + 1
    if pos.size == 0:
        return 0.0
    i = int(pos[-1])
    if i == grid:
        return 1.0
    lo, hi = ts[i], ts[i + 1]
    flo = diff[i]
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        fmid = float(cdf(mid)) - mid / alpha
        if fmid >= 0.0:
            lo, flo = mid, fmid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class ConfusionMetrics:
    R: int
    V: int
    fdp: float
    tdp: float


def _metrics(R: int, V: int, m1: int) -> ConfusionMetrics:
    return ConfusionMetrics(R, V, V / max(R, 1), (R - V) / max(m1, 1))


def confusion_metrics(outcomes, sample: LabeledSample):
    """Global and per-node (R, V, FDP, TDP) for per-node rejection outcomes."""
    if len(outcomes) != sample.n_nodes:
        raise ValueError("one outcome per node required")
    per_node = []
    R_tot = V_tot = 0
    for out, labels in zip(outcomes, sample.null_labels):
        idx = np.asarray(out.rejected, dtype=int)
        if idx.size and (idx.min() < 0 or idx.max() >= labels.size):
            raise IndexError("rejected index out of range for node sample")
        R = int(idx.size)
        V = int(np.count_nonzero(labels[idx])) if R else 0
        m1 = int(np.count_nonzero(~labels))
        per_node.append(_metrics(R, V, m1))
        R_tot += R
        V_tot += V
    return _metrics(R_tot, V_tot, sample.m1), per_node
