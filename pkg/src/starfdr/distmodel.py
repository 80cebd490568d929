"""Generative models for p-values in a star network.

Each node emits p-values from a two-component mixture: true nulls are
uniform on [0,1], alternatives follow a one-sided p-value distribution
induced by a Gaussian or Cauchy location shift of the test statistic.
Samplers cover independent draws and an AR(1) tapering-covariance regime.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.signal import lfilter
from scipy.special import ndtr, ndtri

GAUSSIAN = "gaussian"
CAUCHY = "cauchy"

INDEPENDENT = "independent"
TAPERING_AR = "tapering_ar"

# p-values at exact 0/1 are clamped into the open interval so that
# downstream densities stay finite
_P_EPS = np.finfo(float).tiny
_P_TOP = 1.0 - np.finfo(float).epsneg


def normal_tail(x):
    """Upper-tail probability of the standard normal, Q(x) = 1 - Phi(x)."""
    return ndtr(-np.asarray(x, dtype=float))


def normal_tail_inv(p):
    """Inverse of normal_tail; rejects arguments outside (0, 1)."""
    p = np.asarray(p, dtype=float)
    if np.any(p <= 0.0) or np.any(p >= 1.0):
        raise ValueError("normal_tail_inv requires p in the open interval (0, 1)")
    return -ndtri(p)


@dataclass(frozen=True)
class AlternativeModel:
    """One-sided p-value distribution under the alternative.

    kind is "gaussian" or "cauchy"; mu is the location shift of the
    underlying test statistic.
    """

    kind: str
    mu: float

    def __post_init__(self):
        if self.kind not in (GAUSSIAN, CAUCHY):
            raise ValueError(f"unknown alternative kind {self.kind!r}")
        if not math.isfinite(self.mu):
            raise ValueError("mu must be finite")


def gaussian_alt(mu: float) -> AlternativeModel:
    return AlternativeModel(GAUSSIAN, mu)


def cauchy_alt(mu: float) -> AlternativeModel:
    return AlternativeModel(CAUCHY, mu)


def _cot_pi(t):
    # cot(pi*t) evaluated stably on (0,1)
    return np.tan(np.pi * (0.5 - t))


def alt_cdf(alt: AlternativeModel, t):
    """CDF of the alternative p-value distribution, total on [0, 1]."""
    t = np.asarray(t, dtype=float)
    out = np.empty_like(t)
    inner = (t > 0.0) & (t < 1.0)
    out[t <= 0.0] = 0.0
    out[t >= 1.0] = 1.0
    ti = t[inner]
    if alt.kind == GAUSSIAN:
        out[inner] = normal_tail(normal_tail_inv(ti) - alt.mu)
    else:
        out[inner] = 0.5 - np.arctan(_cot_pi(ti) - alt.mu) / np.pi
    if out.ndim == 0:
        return float(out)
    return out


def alt_pdf(alt: AlternativeModel, t):
    """Density of the alternative p-value distribution on the open interval.

    Rejects t in {0, 1}: the Gaussian density diverges at the endpoint in
    the direction of the shift.
    """
    t = np.asarray(t, dtype=float)
    if np.any(t <= 0.0) or np.any(t >= 1.0):
        raise ValueError("alt_pdf requires t strictly inside (0, 1)")
    if alt.kind == GAUSSIAN:
        out = np.exp(-0.5 * alt.mu**2 + alt.mu * normal_tail_inv(t))
    else:
        c = _cot_pi(t)
        out = (c**2 + 1.0) / ((c - alt.mu) ** 2 + 1.0)
    if out.ndim == 0:
        return float(out)
    return out


@dataclass(frozen=True)
class NodeModel:
    """Per-node mixture: null proportion r0 and alternative distribution."""

    q: float
    r0: float
    alt: AlternativeModel

    def __post_init__(self):
        if not 0.0 < self.q <= 1.0:
            raise ValueError("q must lie in (0, 1]")
        # r0 = 1 (all-null node) is tolerated for testing degenerate mixtures
        if not 0.0 < self.r0 <= 1.0:
            raise ValueError("r0 must lie in (0, 1]")

    @property
    def r1(self) -> float:
        return 1.0 - self.r0


def mixture_cdf(node: NodeModel, t):
    """G(t) = r0*t + (1-r0)*F(t) for one node."""
    t = np.asarray(t, dtype=float)
    u = np.clip(t, 0.0, 1.0)
    out = node.r0 * u + node.r1 * alt_cdf(node.alt, u)
    if out.ndim == 0:
        return float(out)
    return out


def mixture_pdf(node: NodeModel, t):
    """g(t) = r0 + (1-r0)*f(t); t must be interior."""
    if node.r1 == 0.0:
        t = np.asarray(t, dtype=float)
        if np.any(t <= 0.0) or np.any(t >= 1.0):
            raise ValueError("mixture_pdf requires t strictly inside (0, 1)")
        out = np.ones_like(t)
        return float(out) if out.ndim == 0 else out
    out = node.r0 + node.r1 * alt_pdf(node.alt, t)
    return out


@dataclass(frozen=True)
class NetworkModel:
    """Ordered collection of node models; weights q must sum to one."""

    nodes: tuple[NodeModel, ...]

    def __init__(self, nodes):
        object.__setattr__(self, "nodes", tuple(nodes))
        if len(self.nodes) < 1:
            raise ValueError("network needs at least one node")
        qsum = sum(nd.q for nd in self.nodes)
        if abs(qsum - 1.0) > 1e-9:
            raise ValueError(f"node weights must sum to 1 (got {qsum})")

    def __len__(self) -> int:
        return len(self.nodes)

    @property
    def q(self) -> np.ndarray:
        return np.array([nd.q for nd in self.nodes])

    @property
    def r0(self) -> np.ndarray:
        return np.array([nd.r0 for nd in self.nodes])

    @property
    def r0_star(self) -> float:
        return float(np.dot(self.q, self.r0))

    @property
    def r1_star(self) -> float:
        return 1.0 - self.r0_star

    def cdf(self, t):
        """Network mixture CDF, the q-weighted average of node CDFs."""
        t = np.asarray(t, dtype=float)
        return sum(nd.q * mixture_cdf(nd, t) for nd in self.nodes)


@dataclass(frozen=True)
class DependenceSpec:
    """Dependence regime for the underlying statistics within each node."""

    kind: str = INDEPENDENT
    rho: float = 0.0

    def __post_init__(self):
        if self.kind not in (INDEPENDENT, TAPERING_AR):
            raise ValueError(f"unknown dependence kind {self.kind!r}")
        if not 0.0 <= self.rho < 1.0:
            raise ValueError("rho must lie in [0, 1)")
        if self.kind == INDEPENDENT and self.rho != 0.0:
            raise ValueError("independent spec cannot carry nonzero rho")


@dataclass
class LabeledSample:
    """One trial: per-node p-values plus ground-truth null labels."""

    pvalues: list  # list of float arrays, one per node
    null_labels: list  # list of bool arrays, True = truly null

    def __post_init__(self):
        if len(self.pvalues) != len(self.null_labels):
            raise ValueError("pvalues and null_labels must align per node")

    @property
    def n_nodes(self) -> int:
        return len(self.pvalues)

    @property
    def m_per_node(self) -> np.ndarray:
        return np.array([len(p) for p in self.pvalues])

    @property
    def m(self) -> int:
        return int(self.m_per_node.sum())

    @property
    def m1(self) -> int:
        return int(sum(np.count_nonzero(~lab) for lab in self.null_labels))

    def pooled(self):
        """Concatenate nodes: (pvalues, node ids, null labels)."""
        if self.m == 0:
            return (np.empty(0), np.empty(0, dtype=int), np.empty(0, dtype=bool))
        p = np.concatenate(self.pvalues)
        ids = np.concatenate(
            [np.full(len(pv), i, dtype=int) for i, pv in enumerate(self.pvalues)]
        )
        lab = np.concatenate(self.null_labels)
        return p, ids, lab


def _ar1_latent(rng: np.random.Generator, m: int, rho: float) -> np.ndarray:
    """Stationary AR(1) sequence with unit marginals and corr rho^|i-j|."""
    eps = rng.standard_normal(m)
    if m == 0 or rho == 0.0:
        return eps
    x = eps * math.sqrt(1.0 - rho * rho)
    x[0] = eps[0]
    return lfilter([1.0], [1.0, -rho], x)


def sample_trial(
    net: NetworkModel,
    sizes,
    dep: DependenceSpec = DependenceSpec(),
    mean_jitter: float | None = None,
    seed=0,
) -> LabeledSample:
    """Draw one labeled trial from the network model.

    sizes is either a per-node sequence of counts, or a single total count
    in which case each p-value is assigned to node i with probability q_i.
    When mean_jitter is set, each node draws one location shift per trial
    uniformly within +-mean_jitter of its base mu.  Identical seeds give
    identical samples; the rho=0 tapering regime coincides with the
    independent path draw for draw.
    """
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    n = len(net)
    if np.isscalar(sizes):
        total = int(sizes)
        if total < 0:
            raise ValueError("total count must be nonnegative")
        counts = rng.multinomial(total, net.q)
    else:
        counts = np.asarray(sizes, dtype=int)
        if len(counts) != n:
            raise ValueError("sizes must provide one count per node")
        if np.any(counts < 0):
            raise ValueError("counts must be nonnegative")

    rho = dep.rho if dep.kind == TAPERING_AR else 0.0
    pvals, labels = [], []
    for node, mi in zip(net.nodes, counts):
        mi = int(mi)
        mu = node.alt.mu
        if mean_jitter is not None:
            mu = rng.uniform(mu - mean_jitter, mu + mean_jitter)
        is_null = rng.random(mi) < node.r0
        z = _ar1_latent(rng, mi, rho)
        shift = np.where(is_null, 0.0, mu)
        if node.alt.kind == GAUSSIAN:
            x = shift + z
            p = normal_tail(x)
        else:
            # Gaussian copula keeps the rho^|i-j| latent structure while
            # the marginal statistic stays standard Cauchy
            u = ndtr(z)
            u = np.clip(u, _P_EPS, _P_TOP)
            x = shift + np.tan(np.pi * (u - 0.5))
            p = 0.5 - np.arctan(x) / np.pi
        pvals.append(np.clip(p, _P_EPS, _P_TOP))
        labels.append(is_null)
    return LabeledSample(pvals, labels)


def trial_rng(master_seed: int, trial_index: int) -> np.random.Generator:
    """Derive the per-trial generator stream from (master seed, trial index)."""
    return np.random.default_rng(np.random.SeedSequence([master_seed, trial_index]))
