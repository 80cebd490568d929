"""Deterministic star-network protocol simulation with exact bit accounting.

Four protocols: local BH with no communication, pooled BH (p-value
shipping), one-shot proportion matching, and the round-based greedy
interval aggregation.  Every run produces a Transcript whose messages and
bit sizes are exactly reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .distmodel import LabeledSample
from .estimators import (
    DEFAULT_STOREY_LAMBDA,
    NullProportionEstimate,
    default_spacing_schedule,
    oracle_estimate,
    spacing_estimate,
    storey_estimate,
)
from .greedy import (
    IntervalSelection,
    build_grid,
    cell_densities,
    greedy_select,
    selection_regions,
)
from .procedures import (
    R0_STAR_CLAMP,
    ConfusionMetrics,
    RejectionOutcome,
    adaptive_bh,
    bh_procedure,
    beta_slope,
    confusion_metrics,
    local_alpha,
)

CENTER = -1

UP = "up"  # node -> center
DOWN = "down"  # center -> node
BCAST = "bcast"  # center -> broadcast

TERM_COMPLETE = "complete"
TERM_NO_REJECTIONS = "no_rejections"
TERM_FDR_EXCEEDED = "fdr_exceeded"
TERM_ALL_REJECTED = "all_rejected"
TERM_BUDGET_EXHAUSTED = "budget_exhausted"

CONTROL_BITS = 2  # encodes the {1, 0, -1} control alphabet
PVALUE_BITS = 64  # reporting convention for shipping one real p-value


def _bits_for_count(n: int) -> int:
    """ceil(log2(n)) for a positive integer payload range."""
    return max(0, math.ceil(math.log2(n))) if n > 1 else 0


@dataclass(frozen=True)
class Message:
    round: int
    direction: str
    sender: int
    receiver: int
    payload: tuple
    bits: int

    def serialize(self) -> str:
        payload = ",".join(str(v) for v in self.payload)
        return f"{self.round}\t{self.direction}\t{self.sender}\t{self.receiver}\t{payload}\t{self.bits}"


@dataclass
class Transcript:
    messages: list = field(default_factory=list)
    rounds: int = 0
    termination: str = TERM_COMPLETE
    notes: list = field(default_factory=list)

    def add(self, round_, direction, sender, receiver, payload, bits):
        self.messages.append(Message(round_, direction, sender, receiver, tuple(payload), bits))

    @property
    def bits_up(self) -> int:
        return sum(msg.bits for msg in self.messages if msg.direction == UP)

    @property
    def bits_down(self) -> int:
        return sum(msg.bits for msg in self.messages if msg.direction != UP)

    @property
    def total_bits(self) -> int:
        return sum(msg.bits for msg in self.messages)

    def serialize(self) -> str:
        return "\n".join(msg.serialize() for msg in self.messages)


@dataclass
class ProtocolResult:
    outcomes: list  # per-node RejectionOutcome
    metrics: ConfusionMetrics
    per_node_metrics: list
    transcript: Transcript
    selection: IntervalSelection | None = None  # greedy runs only


def make_estimator(choice, net=None, storey_lambda: float = DEFAULT_STOREY_LAMBDA):
    """Resolve an estimator spec into a callable (pvalues, node_index).

    choice is "spacing", "storey", "oracle" (needs net for the true r0),
    or already a callable.
    """
    if callable(choice):
        return choice
    if choice == "spacing":
        def est(p, _i):
            return spacing_estimate(p, default_spacing_schedule(len(p)))
        return est
    if choice == "storey":
        return lambda p, _i: storey_estimate(p, storey_lambda)
    if choice == "oracle":
        if net is None:
            raise ValueError("oracle estimator needs the generative network model")
        return lambda _p, i: oracle_estimate(net.nodes[i].r0)
    raise ValueError(f"unknown estimator choice {choice!r}")


def _estimate_all(sample: LabeledSample, estimator, transcript: Transcript):
    """Run the estimator at every node; failures degrade to None with a note."""
    values = []
    for i, p in enumerate(sample.pvalues):
        try:
            est = estimator(p, i)
        except Exception as exc:  # estimator failure must not abort the network
            transcript.notes.append(f"node {i}: estimator failed: {exc}")
            est = None
        values.append(est)
    return values


def _finish(outcomes, sample, transcript) -> ProtocolResult:
    glob, per_node = confusion_metrics(outcomes, sample)
    if transcript.termination == TERM_COMPLETE and glob.R == 0:
        transcript.termination = TERM_NO_REJECTIONS
    return ProtocolResult(outcomes, glob, per_node, transcript)


def run_no_comm(sample: LabeledSample, alpha: float, estimator="spacing") -> ProtocolResult:
    """Each node runs adaptive BH at alpha / r0_hat; zero communication."""
    if sample.m == 0:
        raise ValueError("sample is empty")
    transcript = Transcript()
    estimator = make_estimator(estimator)
    estimates = _estimate_all(sample, estimator, transcript)
    outcomes = []
    for p, est in zip(sample.pvalues, estimates):
        if est is None or est.value == 0.0:
            outcomes.append(RejectionOutcome(np.empty(0, dtype=int), 0, 0.0))
        else:
            outcomes.append(adaptive_bh(p, alpha, est))
    return _finish(outcomes, sample, transcript)


def run_pooled_bh(sample: LabeledSample, alpha: float, estimator="spacing") -> ProtocolResult:
    """Centralized baseline: ship all p-values, adaptive BH on the pool.

    Bit accounting uses the 64-bits-per-p-value shipping convention; this
    is a reporting choice for comparison plots.
    """
    if sample.m == 0:
        raise ValueError("sample is empty")
    transcript = Transcript(rounds=1)
    pooled, ids, _ = sample.pooled()
    for i, mi in enumerate(sample.m_per_node):
        transcript.add(1, UP, i, CENTER, ("pvalues", int(mi)), PVALUE_BITS * int(mi))
    try:
        est = make_estimator(estimator)(pooled, 0)
    except Exception as exc:
        transcript.notes.append(f"pooled estimator failed: {exc}")
        est = NullProportionEstimate(1.0, "fallback", {})
    outcome = adaptive_bh(pooled, alpha, est)
    outcomes = _split_pooled_outcome(outcome, ids, sample)
    return _finish(outcomes, sample, transcript)


def _split_pooled_outcome(outcome: RejectionOutcome, ids, sample: LabeledSample):
    outcomes = []
    rejected_mask = np.zeros(len(ids), dtype=bool)
    rejected_mask[outcome.rejected] = True
    start = 0
    for mi in sample.m_per_node:
        node_mask = rejected_mask[start : start + mi]
        idx = np.flatnonzero(node_mask)
        outcomes.append(RejectionOutcome(idx, int(idx.size), outcome.tau))
        start += mi
    return outcomes


def run_pooled_bh_oracle(sample, alpha, net):
    """Pooled BH with the true network null proportion."""
    return run_pooled_bh(
        sample, alpha, estimator=lambda _p, _i: oracle_estimate(net.r0_star)
    )


def run_proportion_matching(
    sample: LabeledSample, alpha: float, estimator="spacing", adaptive: bool = False
) -> ProtocolResult:
    """One-shot calibration protocol.

    Each node sends (m_i, rounded null count) in 2*ceil(log2(m_i)) bits;
    the center broadcasts (m, summed null count) in 2*ceil(log2(m)) bits;
    each node recomputes the shared slope and runs BH at its matched local
    size.  With adaptive=True the target level is scaled to
    alpha / r0_star_hat (the configuration used in the experiment sweeps).
    """
    if sample.m == 0:
        raise ValueError("sample is empty")
    transcript = Transcript(rounds=1)
    estimator = make_estimator(estimator)
    estimates = _estimate_all(sample, estimator, transcript)
    m = sample.m
    m_per_node = sample.m_per_node

    m0_hats = []
    for i, (mi, est) in enumerate(zip(m_per_node, estimates)):
        r0_hat = 1.0 if est is None else est.value
        m0 = int(math.floor(r0_hat * mi + 0.5))
        m0_hats.append(m0)
        transcript.add(1, UP, i, CENTER, (int(mi), m0), 2 * _bits_for_count(int(mi)))
    m0_total = sum(m0_hats)
    transcript.add(1, BCAST, CENTER, CENTER, (m, m0_total), 2 * _bits_for_count(m))

    if m0_total >= m:
        transcript.termination = TERM_NO_REJECTIONS
        transcript.notes.append("all nodes estimate every hypothesis null")
        outcomes = [RejectionOutcome(np.empty(0, dtype=int), 0, 0.0) for _ in sample.pvalues]
        glob, per_node = confusion_metrics(outcomes, sample)
        return ProtocolResult(outcomes, glob, per_node, transcript)

    r0_star_hat = min(m0_total / m, R0_STAR_CLAMP)
    target = min(alpha / r0_star_hat, 1.0) if adaptive else alpha
    beta_star = beta_slope(target, r0_star_hat) if target < 1.0 else 1.0
    beta_star = max(beta_star, 1.0)

    outcomes = []
    for p, mi, m0, est in zip(sample.pvalues, m_per_node, m0_hats, estimates):
        if est is None or int(mi) == 0:
            outcomes.append(RejectionOutcome(np.empty(0, dtype=int), 0, 0.0))
            continue
        # the node calibrates with the quantized proportion it sent, so the
        # N=1 fixed point (level == target) holds exactly on the wire values
        r0_local = min(m0 / int(mi), R0_STAR_CLAMP)
        level = min(local_alpha(beta_star, r0_local), 1.0)
        outcomes.append(bh_procedure(p, level))
    return _finish(outcomes, sample, transcript)


class _GreedyNode:
    """Leaf-node state: its cells ranked by count desc, cell index asc."""

    def __init__(self, node_id, counts):
        order = sorted(range(len(counts)), key=lambda j: (-counts[j], j))
        self.node_id = node_id
        self.ranked = [(counts[j], j + 1) for j in order]  # (count, 1-based cell)
        self.cursor = 0

    def current(self):
        """Count it would report now, or None when exhausted."""
        if self.cursor >= len(self.ranked):
            return None
        return self.ranked[self.cursor][0]

    def pop_cell(self) -> int:
        count, cell = self.ranked[self.cursor]
        self.cursor += 1
        return cell


def run_greedy_aggregation(
    sample: LabeledSample,
    alpha: float,
    epsilon: float,
    estimator="spacing",
) -> ProtocolResult:
    """Round-based interval aggregation.

    Setup: nodes report sizes, the center broadcasts the total (needed for
    the density scale and per-node weights).  Round 1: every node sends
    its best cell count; afterwards only the previous winner updates.
    Density messages carry raw cell counts in ceil(log2(m+1)) bits;
    control signals (1/0/-1) cost 2 bits.  The center stops when the
    running rejection-rate estimate would exceed alpha, when only empty
    cells remain, or when all nodes are exhausted.
    """
    if sample.m == 0:
        raise ValueError("sample is empty")
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    if epsilon <= 0.0:
        raise ValueError("epsilon must be positive")

    transcript = Transcript()
    estimator = make_estimator(estimator)
    estimates = _estimate_all(sample, estimator, transcript)
    m = sample.m
    m_per_node = sample.m_per_node
    n = sample.n_nodes
    count_bits = _bits_for_count(m + 1)

    # setup exchange: sizes up, total broadcast down (round 0)
    for i, mi in enumerate(m_per_node):
        transcript.add(0, UP, i, CENTER, (int(mi),), _bits_for_count(int(mi) + 1))
    transcript.add(0, BCAST, CENTER, CENTER, (m,), count_bits)

    # local grids; estimator failure or zero size leaves a node cell-less
    nodes = []
    grid_lengths = np.zeros(n)
    grid_counts = np.zeros(n, dtype=int)
    for i in range(n):
        mi = int(m_per_node[i])
        est = estimates[i]
        if mi == 0 or est is None or est.value == 0.0:
            nodes.append(_GreedyNode(i, []))
            continue
        g = build_grid(epsilon, [mi / m], [est.value])
        grid_lengths[i] = g.lengths[0]
        grid_counts[i] = g.counts[0]
        K = int(g.counts[0])
        if K == 0:
            nodes.append(_GreedyNode(i, []))
            continue
        L = float(g.lengths[0])
        j = np.ceil(sample.pvalues[i] / L).astype(int)
        valid = (j >= 1) & (j <= K)
        counts = np.bincount(j[valid], minlength=K + 1)[1:]
        nodes.append(_GreedyNode(i, counts.tolist()))

    scale = epsilon * m
    selected = []  # (node, cell) in selection order
    sum_h = 0.0  # running density total, accumulated in selection order
    latest = [None] * n  # last reported value per node; None = exhausted (-1)
    rounds = 0
    termination = None

    while True:
        rounds += 1
        if rounds == 1:
            for i in range(n):
                cur = nodes[i].current()
                if cur is None:
                    transcript.add(1, UP, i, CENTER, (-1,), CONTROL_BITS)
                else:
                    transcript.add(1, UP, i, CENTER, (cur,), count_bits)
                latest[i] = cur
        else:
            prev = selected[-1][0]
            cur = nodes[prev].current()
            if cur is None:
                transcript.add(rounds, UP, prev, CENTER, (-1,), CONTROL_BITS)
            else:
                transcript.add(rounds, UP, prev, CENTER, (cur,), count_bits)
            latest[prev] = cur

        live = [(latest[i], i) for i in range(n) if latest[i] is not None]
        if not live:
            termination = TERM_ALL_REJECTED if selected else TERM_NO_REJECTIONS
            break
        best_count = max(c for c, _ in live)
        if best_count == 0:
            termination = TERM_BUDGET_EXHAUSTED if selected else TERM_NO_REJECTIONS
            break
        winner = min(i for c, i in live if c == best_count)
        k = len(selected) + 1
        # same float expression as the batch selector: k <= alpha * sum(h)
        if not k <= alpha * (sum_h + best_count / scale):
            termination = TERM_FDR_EXCEEDED if selected else TERM_NO_REJECTIONS
            break
        transcript.add(rounds, DOWN, CENTER, winner, (1,), CONTROL_BITS)
        if rounds == 1:
            for i in range(n):
                if i != winner:
                    transcript.add(1, DOWN, CENTER, i, (0,), CONTROL_BITS)
        cell = nodes[winner].pop_cell()
        selected.append((winner, cell))
        sum_h = sum_h + best_count / scale
        latest[winner] = nodes[winner].current()

    transcript.add(rounds, BCAST, CENTER, CENTER, (0,), CONTROL_BITS)
    transcript.rounds = rounds
    transcript.termination = termination

    selection = IntervalSelection(
        tuple(selected), len(selected), len(selected) / sum_h if selected else 0.0
    )
    outcomes = _cells_to_outcomes(selected, grid_lengths, sample)
    glob, per_node = confusion_metrics(outcomes, sample)
    return ProtocolResult(outcomes, glob, per_node, transcript, selection)


def _cells_to_outcomes(selected, grid_lengths, sample: LabeledSample):
    outcomes = []
    for i, p in enumerate(sample.pvalues):
        cells = sorted(c for nd, c in selected if nd == i)
        if not cells or grid_lengths[i] == 0.0:
            outcomes.append(RejectionOutcome(np.empty(0, dtype=int), 0, 0.0))
            continue
        L = grid_lengths[i]
        j = np.ceil(p / L).astype(int)
        mask = np.isin(j, cells)
        idx = np.flatnonzero(mask)
        outcomes.append(RejectionOutcome(idx, int(idx.size), 0.0))
    return outcomes


def replay_greedy_transcript(
    transcript: Transcript,
    sample: LabeledSample,
    epsilon: float,
    estimator="spacing",
):
    """Re-apply a greedy transcript's center decisions to the same sample.

    The per-node cell rankings are recomputed deterministically; each
    center->node grant then rejects that node's next-best unrejected cell.
    Returns the per-node RejectionOutcome list.
    """
    tmp = Transcript()
    estimator = make_estimator(estimator)
    estimates = _estimate_all(sample, estimator, tmp)
    m = sample.m
    n = sample.n_nodes
    nodes = []
    grid_lengths = np.zeros(n)
    for i in range(n):
        mi = int(sample.m_per_node[i])
        est = estimates[i]
        if mi == 0 or est is None or est.value == 0.0:
            nodes.append(_GreedyNode(i, []))
            continue
        g = build_grid(epsilon, [mi / m], [est.value])
        grid_lengths[i] = g.lengths[0]
        K = int(g.counts[0])
        if K == 0:
            nodes.append(_GreedyNode(i, []))
            continue
        L = float(g.lengths[0])
        j = np.ceil(sample.pvalues[i] / L).astype(int)
        valid = (j >= 1) & (j <= K)
        counts = np.bincount(j[valid], minlength=K + 1)[1:]
        nodes.append(_GreedyNode(i, counts.tolist()))

    selected = []
    for msg in transcript.messages:
        if msg.direction == DOWN and msg.payload == (1,):
            selected.append((msg.receiver, nodes[msg.receiver].pop_cell()))
    return _cells_to_outcomes(selected, grid_lengths, sample)


def batch_equivalent_selection(sample: LabeledSample, alpha, epsilon, estimator="spacing"):
    """Batch-form selection on the same estimates the protocol would use."""
    tmp = Transcript()
    estimator = make_estimator(estimator)
    estimates = _estimate_all(sample, estimator, tmp)
    m = sample.m
    q_hat, r0_hat = [], []
    keep = []
    for i, est in enumerate(estimates):
        mi = int(sample.m_per_node[i])
        if mi == 0 or est is None or est.value == 0.0:
            continue
        keep.append(i)
        q_hat.append(mi / m)
        r0_hat.append(est.value)
    if not keep:
        return IntervalSelection((), 0, 0.0)
    grid = build_grid(epsilon, q_hat, r0_hat)
    sub = LabeledSample(
        [sample.pvalues[i] for i in keep], [sample.null_labels[i] for i in keep]
    )
    dens = cell_densities(grid, sub)
    sel = greedy_select(dens, alpha)
    remap = {k: i for k, i in enumerate(keep)}
    return IntervalSelection(
        tuple((remap[nd], c) for nd, c in sel.cells), sel.m_selected, sel.fdr_hat
    )
