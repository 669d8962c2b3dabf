"""Node-corruption strategies.

An adversary chooses a set B of corrupted nodes and may rewire any edge
with at least one endpoint in B; edges between uncorrupted nodes
(F x F, F = [n] \\ B) are never touched. Omniscient strategies see the
realized graph; oblivious ones commit to a rewiring distribution that
depends only on (n, gamma) and their construction parameters.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .graphs import AdjacencyMatrix, DirectedAdjacencyMatrix, NodeSet

__all__ = [
    "CorruptionRecord",
    "AdversaryOutcome",
    "BudgetError",
    "ContractViolationError",
    "fill_or_empty_adversary",
    "five_set_adversary",
    "degree_rewiring_adversary",
    "custom_adversary",
    "STRATEGY_NAMES",
]

STRATEGY_NAMES = ("fill", "empty", "coin", "five-set", "degree-rewire", "none")


class BudgetError(ValueError):
    """The corrupted set exceeds the floor(gamma * n) budget."""


class ContractViolationError(ValueError):
    """A strategy modified an edge between two uncorrupted nodes."""


@dataclass(frozen=True)
class CorruptionRecord:
    corrupted: NodeSet
    strategy: str
    gamma_requested: float
    seed: int | None = None
    over_budget: bool = False
    detail: dict = field(default_factory=dict)


@dataclass(frozen=True)
class AdversaryOutcome:
    graph: AdjacencyMatrix | DirectedAdjacencyMatrix
    record: CorruptionRecord


def _check_gamma(gamma: float) -> None:
    if not 0.0 <= gamma < 1.0:
        raise ValueError(f"corruption fraction must be in [0, 1), got {gamma}")


def _writable(mat: np.ndarray) -> np.ndarray:
    out = mat.copy()
    out.setflags(write=True)
    return out


def fill_or_empty_adversary(
    g: AdjacencyMatrix, gamma: float, mode: str, rng: np.random.Generator
) -> AdversaryOutcome:
    """Pick a uniformly random floor(gamma*n)-subset B; set every
    B-incident edge (``fill``), clear them (``empty``), or flip a fair
    coin between the two (``coin``)."""
    _check_gamma(gamma)
    if mode not in ("fill", "empty", "coin"):
        raise ValueError(f"mode must be fill/empty/coin, got {mode!r}")
    n = g.n
    k = int(np.floor(gamma * n))
    b_idx = np.sort(rng.choice(n, size=k, replace=False)) if k else np.empty(0, np.int64)
    b = NodeSet.from_indices(n, b_idx)
    effective = mode
    if mode == "coin":
        effective = "fill" if rng.random() < 0.5 else "empty"
    mat = _writable(g.mat)
    if k:
        val = 1 if effective == "fill" else 0
        mat[b_idx, :] = val
        mat[:, b_idx] = val
        np.fill_diagonal(mat, 0)
    record = CorruptionRecord(
        corrupted=b,
        strategy=mode,
        gamma_requested=gamma,
        detail={"effective_mode": effective},
    )
    return AdversaryOutcome(AdjacencyMatrix(mat, validate=False), record)


def five_set_adversary(
    g: AdjacencyMatrix, gamma: float, c: float, rng: np.random.Generator
) -> AdversaryOutcome:
    """The prune-breaking strategy for graphs with nominal density 1/2.

    Partitions the nodes into B, S0, S1, S2, S3 and rewires all
    B-incident edges so that, after degree pruning, the surviving
    corrupted edges bias the estimate by Theta(gamma^2) for the mean and
    Theta(gamma) for the median.
    """
    _check_gamma(gamma)
    if c * gamma >= 0.25:
        raise ValueError(f"requires c * gamma < 0.25, got {c * gamma}")
    n = g.n
    nb = int(np.floor(gamma * n))
    ns01 = int(np.floor(c * gamma * n))
    rest = n - nb - 2 * ns01
    ns2 = (2 * rest) // 3
    ns3 = rest - ns2

    perm = rng.permutation(n)
    b_idx = np.sort(perm[:nb])
    s0_idx = np.sort(perm[nb : nb + ns01])
    s1_idx = np.sort(perm[nb + ns01 : nb + 2 * ns01])
    s2_idx = np.sort(perm[nb + 2 * ns01 : nb + 2 * ns01 + ns2])
    s3_idx = np.sort(perm[nb + 2 * ns01 + ns2 :])

    mat = _writable(g.mat)
    if nb:
        # Clear everything incident to B (also covers the B-S0 step).
        mat[b_idx, :] = 0
        mat[:, b_idx] = 0
        # Fill B-S1.
        mat[np.ix_(b_idx, s1_idx)] = 1
        mat[np.ix_(s1_idx, b_idx)] = 1
        # B-S2 at 3/5, B-S3 at 3/10.
        block2 = (rng.random((nb, ns2)) < 0.6).astype(np.uint8)
        mat[np.ix_(b_idx, s2_idx)] = block2
        mat[np.ix_(s2_idx, b_idx)] = block2.T
        block3 = (rng.random((nb, ns3)) < 0.3).astype(np.uint8)
        mat[np.ix_(b_idx, s3_idx)] = block3
        mat[np.ix_(s3_idx, b_idx)] = block3.T
        # B-B at 3/5, kept symmetric with a zero diagonal.
        bb = np.triu((rng.random((nb, nb)) < 0.6).astype(np.uint8), k=1)
        mat[np.ix_(b_idx, b_idx)] = bb | bb.T

    record = CorruptionRecord(
        corrupted=NodeSet.from_indices(n, b_idx),
        strategy="five-set",
        gamma_requested=gamma,
        detail={
            "c": c,
            "s0": s0_idx,
            "s1": s1_idx,
            "s2": s2_idx,
            "s3": s3_idx,
        },
    )
    return AdversaryOutcome(AdjacencyMatrix(mat, validate=False), record)


def degree_rewiring_adversary(
    dg: DirectedAdjacencyMatrix,
    gamma: float,
    degree_dist: np.ndarray,
    rng: np.random.Generator,
) -> AdversaryOutcome:
    """Oblivious out-degree rewiring for directed graphs.

    Each node independently joins B with probability 0.15 * gamma. For
    i in B, a new out-degree is drawn from ``degree_dist`` (a pmf over
    {0, ..., n-1}) and the out-neighborhood is replaced by a uniform
    subset of that size. Only outgoing edges of B change. |B| may exceed
    the budget; the record's ``over_budget`` flag reports it (the Markov
    bound keeps the frequency at most 0.15).
    """
    _check_gamma(gamma)
    n = dg.n
    pmf = np.asarray(degree_dist, dtype=np.float64)
    if pmf.ndim != 1 or pmf.shape[0] > n:
        raise ValueError(f"degree pmf must live on {{0..{n - 1}}}, got shape {pmf.shape}")
    if np.any(pmf < 0) or abs(pmf.sum() - 1.0) > 1e-12:
        raise ValueError("degree pmf entries must be nonnegative and sum to 1")

    b_mask = rng.random(n) < 0.15 * gamma
    b_idx = np.flatnonzero(b_mask)
    mat = _writable(dg.mat)
    others = np.arange(n)
    degs = rng.choice(pmf.shape[0], size=b_idx.size, p=pmf)
    for i, d in zip(b_idx.tolist(), degs.tolist()):
        pool = np.delete(others, i)
        row = np.zeros(n, dtype=np.uint8)
        if d:
            row[rng.choice(pool, size=d, replace=False)] = 1
        mat[i, :] = row
    record = CorruptionRecord(
        corrupted=NodeSet(n, b_mask),
        strategy="degree-rewire",
        gamma_requested=gamma,
        over_budget=b_idx.size > gamma * n,
    )
    return AdversaryOutcome(DirectedAdjacencyMatrix(mat, validate=False), record)


def custom_adversary(
    g: AdjacencyMatrix, gamma: float, rewire_callback
) -> AdversaryOutcome:
    """Run a user strategy and validate its contract.

    ``rewire_callback(g, gamma)`` must return ``(graph, corrupted)``.
    The framework rejects callbacks that exceed the floor(gamma*n)
    budget or modify any F x F entry.
    """
    _check_gamma(gamma)
    n = g.n
    out, b = rewire_callback(g, gamma)
    if not isinstance(out, AdjacencyMatrix) or out.n != n:
        raise ContractViolationError("callback must return an AdjacencyMatrix of the same size")
    if not isinstance(b, NodeSet) or b.n != n:
        raise ContractViolationError("callback must return the corrupted NodeSet")
    if b.size > int(np.floor(gamma * n)):
        raise BudgetError(
            f"corrupted set of size {b.size} exceeds budget {int(np.floor(gamma * n))}"
        )
    f_idx = b.complement().indices
    if not np.array_equal(
        out.mat[np.ix_(f_idx, f_idx)], g.mat[np.ix_(f_idx, f_idx)]
    ):
        raise ContractViolationError("callback modified an edge between uncorrupted nodes")
    record = CorruptionRecord(corrupted=b, strategy="custom", gamma_requested=gamma)
    return AdversaryOutcome(out, record)
