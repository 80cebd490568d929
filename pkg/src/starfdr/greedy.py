"""Interval-grid machinery: candidate cells per node, p-value densities,
the oracle top-M* selection, and asymptotic FDR/power of interval unions."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .distmodel import LabeledSample, NetworkModel, mixture_cdf


@dataclass(frozen=True)
class IntervalGrid:
    """Per-node cell length L and cell count K = floor(1/L); K=0 means the
    node has no candidate intervals."""

    lengths: np.ndarray
    counts: np.ndarray
    epsilon: float

    @property
    def n_nodes(self) -> int:
        return len(self.lengths)

    @property
    def total_cells(self) -> int:
        return int(self.counts.sum())

    def cell_bounds(self, node: int, cell: int) -> tuple[float, float]:
        """Half-open support (a, b] of one cell (1-based cell index)."""
        L = float(self.lengths[node])
        return (cell - 1) * L, cell * L


def build_grid(epsilon: float, q_hat, r0_hat) -> IntervalGrid:
    """Cell length L_i = epsilon / (q_i * r0_i) per node."""
    if epsilon <= 0.0:
        raise ValueError("epsilon must be positive")
    q = np.asarray(q_hat, dtype=float)
    r0 = np.asarray(r0_hat, dtype=float)
    if np.any(q <= 0.0) or np.any(r0 <= 0.0):
        raise ValueError("q and r0 must be positive at every node")
    lengths = epsilon / (q * r0)
    counts = np.floor(1.0 / lengths).astype(int)
    return IntervalGrid(lengths, counts, epsilon)


@dataclass(frozen=True)
class CellDensity:
    node: int  # 0-based node index
    cell: int  # 1-based cell index
    count: int
    h: float


def cell_densities(grid: IntervalGrid, sample: LabeledSample) -> list[CellDensity]:
    """Empirical density h = count/(epsilon*m) for every candidate cell.

    Cells are half-open (a, b]: a p-value exactly at a right endpoint
    belongs to that cell; p-values above K*L belong to no cell.
    """
    if grid.n_nodes != sample.n_nodes:
        raise ValueError("grid and sample node counts differ")
    m = sample.m
    out = []
    for i in range(grid.n_nodes):
        K = int(grid.counts[i])
        if K == 0:
            continue
        L = float(grid.lengths[i])
        p = sample.pvalues[i]
        # cell index j = ceil(p / L); right endpoints land in their own cell
        j = np.ceil(p / L).astype(int)
        valid = (j >= 1) & (j <= K)
        counts = np.bincount(j[valid], minlength=K + 1)[1:]
        scale = grid.epsilon * m
        for cell in range(1, K + 1):
            c = int(counts[cell - 1])
            out.append(CellDensity(i, cell, c, c / scale))
    return out


def select_mstar(h_values, alpha: float) -> int:
    """Largest M with M <= alpha * (sum of the M largest densities)."""
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    h = np.sort(np.asarray(h_values, dtype=float))[::-1]
    if h.size == 0:
        return 0
    ok = np.arange(1, h.size + 1) <= alpha * np.cumsum(h)
    idx = np.flatnonzero(ok)
    return int(idx[-1]) + 1 if idx.size else 0


@dataclass(frozen=True)
class IntervalSelection:
    cells: tuple  # (node, cell) pairs in selection order
    m_selected: int
    fdr_hat: float

    @property
    def cell_set(self) -> frozenset:
        return frozenset(self.cells)


def _select_top(densities, alpha: float) -> IntervalSelection:
    order = sorted(densities, key=lambda c: (-c.h, c.node, c.cell))
    mstar = select_mstar([c.h for c in order], alpha)
    # never select empty cells: rejecting a zero-density interval adds no
    # discoveries and the round-based protocol stops at density zero
    while mstar > 0 and order[mstar - 1].h == 0.0:
        mstar -= 1
    chosen = order[:mstar]
    total = sum(c.h for c in chosen)
    fdr_hat = mstar / total if mstar else 0.0
    return IntervalSelection(tuple((c.node, c.cell) for c in chosen), mstar, fdr_hat)


def greedy_select(densities, alpha: float) -> IntervalSelection:
    """Batch form of the round-based aggregation: top-M cells by density,
    ties broken by (node, cell) ascending."""
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    return _select_top(densities, alpha)


def true_cell_densities(net: NetworkModel, grid: IntervalGrid) -> list[CellDensity]:
    """Population densities h = q * G_i(cell) / epsilon (count field unused)."""
    out = []
    for i, node in enumerate(net.nodes):
        K = int(grid.counts[i])
        if K == 0:
            continue
        L = float(grid.lengths[i])
        edges = mixture_cdf(node, np.arange(K + 1) * L)
        mass = np.diff(edges)
        for cell in range(1, K + 1):
            out.append(CellDensity(i, cell, 0, node.q * float(mass[cell - 1]) / grid.epsilon))
    return out


def oracle_interval_set(net: NetworkModel, epsilon: float, alpha: float):
    """Selection under the true model: M* largest population densities.

    Returns (grid, selection).
    """
    grid = build_grid(epsilon, net.q, net.r0)
    return grid, _select_top(true_cell_densities(net, grid), alpha)


def selection_regions(grid: IntervalGrid, selection: IntervalSelection, n_nodes: int):
    """Per-node sorted disjoint intervals covered by the selected cells."""
    regions = [[] for _ in range(n_nodes)]
    for node, cell in selection.cells:
        regions[node].append(grid.cell_bounds(node, cell))
    return [sorted(r) for r in regions]


def selection_asymptotics(regions, net: NetworkModel) -> tuple[float, float]:
    """Asymptotic FDR and power of per-node interval unions.

    regions is one list of (a, b) intervals per node, disjoint within a
    node.  FDR is the null mass over total mass of the union; power is the
    alternative mass scaled by 1/r1*.
    """
    if len(regions) != len(net):
        raise ValueError("one region list per node required")
    num = den = gain = 0.0
    for node, intervals in zip(net.nodes, regions):
        prev_end = -np.inf
        for a, b in sorted(intervals):
            if not (0.0 <= a <= b <= 1.0):
                raise ValueError(f"interval ({a}, {b}) outside [0, 1]")
            if a < prev_end:
                raise ValueError("intervals within a node must be disjoint")
            prev_end = b
            g_mass = mixture_cdf(node, b) - mixture_cdf(node, a)
            num += node.q * node.r0 * (b - a)
            den += node.q * g_mass
            gain += node.q * (g_mass - node.r0 * (b - a))
    fdr = num / den if den > 0.0 else 0.0
    power = gain / net.r1_star if net.r1_star > 0.0 else 0.0
    return fdr, power


def default_epsilon(alpha: float, m: int, multiplier: float = 1.0) -> float:
    """Grid parameter epsilon = multiplier * alpha / sqrt(m)."""
    if m < 1:
        raise ValueError("m must be positive")
    return multiplier * alpha / np.sqrt(m)
