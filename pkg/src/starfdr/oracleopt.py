"""Asymptotically optimal rejection regions (superlevel sets of the
mixture-to-null density ratio) and heterogeneity bound calculators."""

from __future__ import annotations

import numpy as np

from .distmodel import NetworkModel, NodeModel, alt_cdf, alt_pdf
from .greedy import selection_asymptotics
from .procedures import asymptotic_threshold, beta_slope, local_alpha

_BOUNDARY_TOL = 1e-8


def _alt_pdf_grid(node: NodeModel, xs: np.ndarray) -> np.ndarray:
    return np.asarray(alt_pdf(node.alt, xs), dtype=float)


def level_region(node: NodeModel, t: float, resolution: int = 10_000):
    """Superlevel set {x in (0,1): g(x)/r0 > t+1} as sorted intervals.

    Equivalent to {x: (r1/r0) f(x) > t}.  Boundaries are located by sign
    changes on a uniform grid and refined by bisection; the density may be
    non-monotone (Cauchy case), so every crossing is kept.
    """
    if t < 0.0:
        raise ValueError("t must be nonnegative")
    if node.r1 == 0.0:
        # all-null node: g/r0 = 1/r0... = 1 for r0=1; never exceeds t+1>1
        return []
    thresh = node.r0 / node.r1 * t
    xs = np.linspace(0.0, 1.0, resolution + 1)[1:-1]
    above = _alt_pdf_grid(node, xs) > thresh

    def refine(lo: float, hi: float, lo_above: bool) -> float:
        while hi - lo > _BOUNDARY_TOL:
            mid = 0.5 * (lo + hi)
            if (float(alt_pdf(node.alt, mid)) > thresh) == lo_above:
                lo = mid
            else:
                hi = mid
        return 0.5 * (lo + hi)

    intervals = []
    start = None
    if above[0]:
        start = 0.0
    flips = np.flatnonzero(above[:-1] != above[1:])
    for k in flips:
        x = refine(xs[k], xs[k + 1], above[k])
        if above[k]:
            intervals.append((start, x))
            start = None
        else:
            start = x
    if start is not None:
        intervals.append((start, 1.0))
    return intervals


def region_metrics(regions, net: NetworkModel) -> tuple[float, float]:
    """Asymptotic (FDR, power) of per-node interval unions."""
    return selection_asymptotics(regions, net)


def _regions_at(net: NetworkModel, t: float, resolution: int):
    return [level_region(node, t, resolution) for node in net.nodes]


def c_alpha_search(net: NetworkModel, alpha: float, resolution: int = 10_000,
                   tol: float = 1e-6) -> float:
    """Smallest level t whose superlevel regions satisfy FDR <= alpha.

    Bisection is valid because regions shrink as t grows; empty regions
    have FDR 0 and are always feasible.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")

    def feasible(t: float) -> bool:
        fdr, _ = region_metrics(_regions_at(net, t, resolution), net)
        return fdr <= alpha

    if feasible(0.0):
        return 0.0
    hi = 1.0
    while not feasible(hi):
        hi *= 2.0
        if hi > 1e12:
            return hi  # regions effectively empty; FDR convention 0
    lo = hi / 2.0 if hi > 1.0 else 0.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if feasible(mid):
            hi = mid
        else:
            lo = mid
    return hi


def optimal_region(net: NetworkModel, alpha: float, resolution: int = 10_000):
    """Optimal per-node regions with their asymptotic FDR and power."""
    c = c_alpha_search(net, alpha, resolution)
    regions = _regions_at(net, c, resolution)
    fdr, power = region_metrics(regions, net)
    return regions, fdr, power


def heterogeneity_delta(net: NetworkModel) -> float:
    """Weighted dispersion of null proportions around the network value."""
    return float(np.dot(net.q, np.abs(net.r0 - net.r0_star)))


def _node_threshold(node: NodeModel, beta: float, grid: int = 10_000) -> float:
    """sup{t: F_i(t) = beta * t} via the downward fixed-point scan."""
    if beta <= 1.0:
        return 1.0
    return asymptotic_threshold(lambda t: alt_cdf(node.alt, t), 1.0 / beta, grid)


def fdr_bound_null_heterogeneity(net: NetworkModel, alpha: float,
                                 limiting_r0=None) -> float | None:
    """FDR bound for proportion matching under unequal null proportions.

    With limiting_r0=None the per-node estimators are taken consistent and
    the bound is anchored at r0* * alpha; otherwise limiting_r0 gives the
    almost-sure limits of the (possibly upward-biased) estimators and the
    bound is anchored at alpha.  Returns None when inapplicable (the
    dispersion term reaches the rejection mass, or the upward-bias
    compatibility condition fails).
    """
    q, r0s = net.q, net.r0
    r0_star, r1_star = net.r0_star, net.r1_star
    delta = heterogeneity_delta(net)
    if limiting_r0 is None:
        base = r0_star * alpha
        beta_star = beta_slope(alpha, r0_star)
        betas = np.full(len(net), beta_star)
    else:
        rbar = np.asarray(limiting_r0, dtype=float)
        if np.any(rbar < r0s):
            raise ValueError("limiting estimates cannot undershoot the true r0")
        if r0_star > np.min((1.0 - rbar) / (1.0 - r0s)) + 1e-12:
            return None
        base = alpha
        rbar_star = float(np.dot(q, rbar))
        beta_bar = beta_slope(alpha, min(rbar_star, 1.0 - 1e-9))
        alphas = np.array([local_alpha(beta_bar, rb) for rb in rbar])
        betas = np.array([beta_slope(a, r) for a, r in zip(alphas, r0s)])
    taus = np.array([_node_threshold(nd, b) for nd, b in zip(net.nodes, betas)])
    fmass = np.array([alt_cdf(nd.alt, tau) for nd, tau in zip(net.nodes, taus)])
    v = r0_star * float(np.dot(q, taus))
    r = v + r1_star * float(np.dot(q, fmass))
    if delta >= r:
        return None
    return base + (v + r) / (r - delta) ** 2 * delta


def pooled_alt_cdf(net: NetworkModel, t):
    """Network-level alternative CDF: (1/r1*) sum q r1 F_i."""
    t = np.asarray(t, dtype=float)
    total = sum(nd.q * nd.r1 * alt_cdf(nd.alt, t) for nd in net.nodes)
    return total / net.r1_star


def measure_alt_heterogeneity(net: NetworkModel, alpha: float, grid: int = 10_000):
    """Numerically measure per-node sup-distances to the pooled alternative
    CDF and the Lipschitz constant of that CDF on the bracketing interval
    [min tau_i, max tau_i] of the per-node slope crossings."""
    bs = beta_slope(alpha, net.r0_star)
    taus = np.array([_node_threshold(nd, bs) for nd in net.nodes])
    lo, hi = float(taus.min()), float(taus.max())
    if hi - lo < 1e-9:
        lo = max(lo - 1e-3, 1e-6)
        hi = min(hi + 1e-3, 1.0 - 1e-6)
    ts = np.linspace(lo, hi, grid)
    pooled = pooled_alt_cdf(net, ts)
    deltas = np.array(
        [float(np.max(np.abs(alt_cdf(nd.alt, ts) - pooled))) for nd in net.nodes]
    )
    dens = sum(nd.q * nd.r1 * _alt_pdf_grid(nd, ts) for nd in net.nodes) / net.r1_star
    c = float(np.max(dens))
    return deltas, c


def alt_heterogeneity_bounds(net: NetworkModel, alpha: float, deltas,
                             lipschitz_c: float):
    """(FDR upper bound, power lower bound) under heterogeneous alternatives.

    deltas are per-node sup-distances between F_i and the pooled
    alternative CDF; lipschitz_c bounds the pooled CDF's slope on the
    bracketing interval.  Returns None when inapplicable (lipschitz_c >=
    global slope, or the aggregated distance reaches the rejection mass).
    """
    deltas = np.asarray(deltas, dtype=float)
    if np.any(deltas < 0.0) or lipschitz_c < 0.0:
        raise ValueError("deltas and lipschitz_c must be nonnegative")
    q, r0s = net.q, net.r0
    r0_star, r1_star = net.r0_star, net.r1_star
    beta_star = beta_slope(alpha, r0_star)
    if lipschitz_c >= beta_star:
        return None
    tau_star = asymptotic_threshold(lambda t: pooled_alt_cdf(net, t), 1.0 / beta_star)
    dprime = float(np.dot(q, (r0s + beta_star * (1.0 - r0s)) * deltas)) / (
        beta_star - lipschitz_c
    )
    r_check = (r0_star + r1_star * beta_star) * tau_star
    v_check = r0_star * tau_star
    if dprime >= r_check:
        return None
    fdr_bound = r0_star * alpha + (v_check + r_check) / (r_check - dprime) ** 2 * dprime
    p_star = float(pooled_alt_cdf(net, tau_star))
    power_bound = p_star - min(
        float(deltas.max()) / (1.0 - lipschitz_c / beta_star), dprime / r1_star
    )
    return fdr_bound, power_bound
