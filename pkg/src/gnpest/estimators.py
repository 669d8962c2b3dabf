"""Estimators for the edge probability, from the mean baseline to the
spectral filtering + trimming pipeline and the exhaustive small-n oracle.

All estimators are pure given an explicit random stream and report their
result as an :class:`EstimatorReport` with per-stage diagnostics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .graphs import AdjacencyMatrix, NodeSet, complement_graph
from .linalg import kernel
from .linalg.spectral import (
    EXACT_SOLVER_CAP,
    CenteredOperator,
    spectral_norm_exact,
    top_eigvec_approx,
)

__all__ = [
    "EstimatorReport",
    "SpectralConfig",
    "mean_estimator",
    "median_estimator",
    "prune_then",
    "spectral_candidates",
    "trim",
    "robust_estimate",
    "robust_estimate_symmetric",
    "exhaustive_estimate",
    "ESTIMATOR_NAMES",
    "run_named_estimator",
]

ESTIMATOR_NAMES = (
    "mean",
    "median",
    "prune-mean",
    "prune-median",
    "spectral",
    "spectral-sym",
    "exhaustive",
)

ALPHA1_MAX = 1.0 / 60.0
EXHAUSTIVE_MAX_N = 16

# A random restart is mixed into the warm-started deletion rounds this
# often, guarding against the warm vector getting stuck.
_FRESH_RESTART_PERIOD = 16


@dataclass(frozen=True)
class EstimatorReport:
    """Estimate with diagnostics.

    ``estimate`` is clamped to [0, 1]; the pre-clamp value is kept in
    ``raw_estimate`` (branch decisions in the symmetric pipeline use the
    raw values).
    """

    estimate: float
    method: str
    raw_estimate: float
    trace: dict = field(default_factory=dict)


@dataclass(frozen=True)
class SpectralConfig:
    """Knobs of the spectral filtering stage.

    ``repeats=None`` means adaptive: one run when the deletion budget
    floor(9 * alpha1 * n) already exceeds 2 * log2(n) (a single run then
    succeeds with high probability), otherwise ceil(2 * log2(n)) runs
    with the minimum-norm candidate kept.
    """

    alpha1: float
    repeats: int | None = None
    eig_tol: float = 0.01

    def validate(self, n: int) -> None:
        if not (1.0 / n <= self.alpha1 <= ALPHA1_MAX):
            raise ValueError(
                f"alpha1 must be in [1/n, 1/60] = [{1.0 / n:.6g}, {ALPHA1_MAX:.6g}], "
                f"got {self.alpha1}"
            )
        if not (0.0 < self.eig_tol <= 0.01):
            raise ValueError(f"eig_tol must be in (0, 0.01], got {self.eig_tol}")
        if self.repeats is not None and self.repeats < 1:
            raise ValueError("repeats must be >= 1")

    def effective_repeats(self, n: int) -> int:
        if self.repeats is not None:
            return self.repeats
        budget = int(math.floor(9.0 * self.alpha1 * n))
        logish = 2.0 * math.log2(max(n, 2))
        return 1 if budget >= logish else int(math.ceil(logish))


def _clamped(value: float, method: str, trace: dict | None = None) -> EstimatorReport:
    return EstimatorReport(
        estimate=min(1.0, max(0.0, value)),
        method=method,
        raw_estimate=value,
        trace=trace or {},
    )


def mean_estimator(a: AdjacencyMatrix) -> EstimatorReport:
    """Edge count over n-choose-2."""
    if a.n < 2:
        raise ValueError("mean estimator needs at least 2 nodes")
    return _clamped(a.edge_count / math.comb(a.n, 2), "mean")


def _lower_median(values: np.ndarray) -> float:
    """Median with the even-length convention of taking the lower of the
    two middle order statistics."""
    srt = np.sort(values)
    return float(srt[(srt.size - 1) // 2])


def median_estimator(a: AdjacencyMatrix) -> EstimatorReport:
    """Median degree over n - 1."""
    if a.n < 2:
        raise ValueError("median estimator needs at least 2 nodes")
    return _clamped(_lower_median(a.degrees()) / (a.n - 1), "median")


def _prune_extreme_degrees(a: AdjacencyMatrix, k: int) -> NodeSet:
    """Survivors after removing the k highest- and k lowest-degree nodes.

    Ties are broken by ascending node index; the high-degree set is
    selected first, the low-degree set from the remainder.
    """
    n = a.n
    deg = a.degrees()
    order_high = np.lexsort((np.arange(n), -deg))  # by -degree, then index
    high = order_high[:k]
    keep_mask = np.ones(n, dtype=bool)
    keep_mask[high] = False
    rest = np.flatnonzero(keep_mask)
    order_low = rest[np.lexsort((rest, deg[rest]))]
    low = order_low[:k]
    keep_mask[low] = False
    return NodeSet(n, keep_mask)


def prune_then(
    a: AdjacencyMatrix, gamma: float, c: float, inner: str
) -> EstimatorReport:
    """Remove floor(c * gamma * n) highest- and lowest-degree nodes, then
    apply the mean or median estimator to the induced subgraph."""
    if inner not in ("mean", "median"):
        raise ValueError(f"inner estimator must be mean or median, got {inner!r}")
    if not 0.0 <= gamma < 1.0:
        raise ValueError(f"corruption fraction must be in [0, 1), got {gamma}")
    k = int(math.floor(c * gamma * a.n))
    if a.n - 2 * k < 2:
        raise ValueError(
            f"pruning 2*{k} nodes leaves fewer than 2 of {a.n}; lower c or gamma"
        )
    survivors = _prune_extreme_degrees(a, k)
    sub = a.induced(survivors)
    inner_report = mean_estimator(sub) if inner == "mean" else median_estimator(sub)
    return EstimatorReport(
        estimate=inner_report.estimate,
        method=f"prune-{inner}",
        raw_estimate=inner_report.raw_estimate,
        trace={"pruned_per_side": k, "survivors": survivors.indices},
    )


def _child_rng(rng: np.random.Generator) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=int(rng.integers(2**63, dtype=np.int64))))


def _one_filtering_pass(a, cfg, rng):
    """One deletion path of the spectral filtering stage.

    Returns (best_norm, best_step, deleted_order, norms): at step t the
    candidate set is [n] minus the first t deleted nodes and norms[t] is
    its centered spectral norm estimate.
    """
    n = a.n
    rounds = int(math.floor(9.0 * cfg.alpha1 * n))
    mask = np.ones(n, dtype=bool)
    deg = a.degrees().astype(np.float64)
    tot = float(deg.sum())
    deleted: list[int] = []
    norms: list[float] = []
    warm = None
    for t in range(rounds + 1):
        s = NodeSet(n, mask.copy())
        shift = tot / (s.size**2)
        cold = warm is None or (t % _FRESH_RESTART_PERIOD == 0 and t > 0)
        est = top_eigvec_approx(
            CenteredOperator(a, s, shift),
            tol=cfg.eig_tol,
            rng=rng,
            restarts=8 if warm is None else (1 if cold else 0),
            warm_start=warm,
        )
        norms.append(abs(est.value))
        if t == rounds:
            break
        probs = est.vector**2
        total = probs.sum()
        idx = s.indices
        if total <= 0.0:
            # Degenerate (zero) operator: fall back to a uniform draw.
            victim = int(rng.choice(idx))
        else:
            victim = int(rng.choice(n, p=probs / total))
        deleted.append(victim)
        mask[victim] = False
        tot -= 2.0 * deg[victim]
        deg -= a.mat[:, victim]
        warm = est.vector
    best_step = int(np.argmin(norms))
    return norms[best_step], best_step, deleted, norms


def spectral_candidates(
    a: AdjacencyMatrix, cfg: SpectralConfig, rng: np.random.Generator
) -> tuple[NodeSet, dict]:
    """Spectral filtering: iteratively delete nodes sampled with
    probability proportional to the squared top-eigenvector entries of
    the centered submatrix, and keep the minimum-norm candidate set.

    Returns (S*, trace); the trace records every deletion path with its
    per-candidate norm estimates.
    """
    cfg.validate(a.n)
    if a.n < 60:
        raise ValueError(f"spectral filtering needs n >= 60, got {a.n}")
    repeats = cfg.effective_repeats(a.n)
    best = None
    paths = []
    for r in range(repeats):
        sub_rng = _child_rng(rng)
        norm, step, deleted, norms = _one_filtering_pass(a, cfg, sub_rng)
        paths.append({"norms": norms, "deleted": deleted, "best_step": step})
        if best is None or norm < best[0]:
            best = (norm, r, step)
    norm, r, step = best
    deleted = paths[r]["deleted"]
    mask = np.ones(a.n, dtype=bool)
    mask[deleted[:step]] = False
    s_star = NodeSet(a.n, mask)
    trace = {
        "paths": paths,
        "chosen_repeat": r,
        "chosen_step": step,
        "s_star_norm": norm,
        "candidate_sizes": [a.n - t for t in range(len(paths[r]["norms"]))],
    }
    return s_star, trace


def trim(a: AdjacencyMatrix, alpha1: float, s_star: NodeSet) -> EstimatorReport:
    """Remove the floor(3 * alpha1 * n) nodes of S* whose within-S*
    normalized degree deviates furthest from the subgraph density, then
    report the density of what remains."""
    n = a.n
    k = int(math.floor(3.0 * alpha1 * n))
    m = s_star.size
    if m <= k:
        raise ValueError(f"|S*| = {m} must exceed the trim count {k}")
    idx = s_star.indices
    within_deg = a.mat[np.ix_(idx, idx)].sum(axis=1, dtype=np.int64)
    p_star = within_deg.sum() / (m * m)
    scores = np.abs(p_star - within_deg / m)
    order = np.lexsort((idx, -scores))  # by -score, ties by ascending index
    trimmed = idx[order[:k]]
    keep = np.ones(n, dtype=bool)
    keep[:] = s_star.mask
    keep[trimmed] = False
    s_f = NodeSet(n, keep)
    kept_idx = s_f.indices
    p_f = a.mat[np.ix_(kept_idx, kept_idx)].sum(dtype=np.int64) / (kept_idx.size**2)
    return _clamped(
        float(p_f),
        "trim",
        trace={
            "p_s_star": float(p_star),
            "scores": scores,
            "trimmed": trimmed,
            "s_f": s_f,
        },
    )


def robust_estimate(
    a: AdjacencyMatrix,
    alpha1: float,
    rng: np.random.Generator,
    repeats: int | None = None,
    eig_tol: float = 0.01,
) -> EstimatorReport:
    """Spectral filtering followed by trimming."""
    cfg = SpectralConfig(alpha1=alpha1, repeats=repeats, eig_tol=eig_tol)
    s_star, spectral_trace = spectral_candidates(a, cfg, rng)
    trimmed = trim(a, alpha1, s_star)
    return EstimatorReport(
        estimate=trimmed.estimate,
        method="spectral",
        raw_estimate=trimmed.raw_estimate,
        trace={
            "alpha1": alpha1,
            "s_star": s_star,
            "spectral": spectral_trace,
            "trim": trimmed.trace,
        },
    )


def robust_estimate_symmetric(
    a: AdjacencyMatrix,
    gamma: float,
    rng: np.random.Generator,
    repeats: int | None = None,
    eig_tol: float = 0.01,
) -> EstimatorReport:
    """Density-symmetric pipeline: run the spectral + trim estimator on
    the graph and on its complement, and keep whichever side reports a
    density at most 1/2.

    gamma is mapped to alpha1 = clamp(gamma, 1/n, 1/60); the filtering
    stage cannot delete more than 9 * alpha1 * n nodes, so larger
    corruption fractions run at the alpha1 cap.
    """
    if not 1.0 / a.n <= gamma < 1.0:
        raise ValueError(f"gamma must be in [1/n, 1), got {gamma}")
    alpha1 = min(max(gamma, 1.0 / a.n), ALPHA1_MAX)
    p_report = robust_estimate(a, alpha1, rng, repeats=repeats, eig_tol=eig_tol)
    q_report = robust_estimate(
        complement_graph(a), alpha1, rng, repeats=repeats, eig_tol=eig_tol
    )
    # The branch uses the unclamped values.
    if p_report.raw_estimate <= 0.5:
        raw = p_report.raw_estimate
    else:
        raw = 1.0 - q_report.raw_estimate
    return _clamped(
        raw,
        "spectral-sym",
        trace={
            "alpha1": alpha1,
            "p_star": p_report.raw_estimate,
            "q_star": q_report.raw_estimate,
            "branch": "direct" if p_report.raw_estimate <= 0.5 else "complement",
            "direct": p_report.trace,
            "complement": q_report.trace,
        },
    )


def _subset_norms_for_size(a: AdjacencyMatrix, size: int):
    """All (subset, p_S, exact centered norm) for subsets of [n] of a
    given size, batched through the dense eigensolver."""
    from itertools import combinations

    n = a.n
    subsets = list(combinations(range(n), size))
    mats = np.empty((len(subsets), size, size), dtype=np.float64)
    dens = np.empty(len(subsets))
    af = a.mat.astype(np.float64)
    for t, sub in enumerate(subsets):
        block = af[np.ix_(sub, sub)]
        p_s = block.sum() / (size * size)
        mats[t] = block - p_s
        dens[t] = p_s
    norms = np.abs(np.linalg.eigvalsh(mats)).max(axis=1)
    return subsets, dens, norms


def exhaustive_estimate(a: AdjacencyMatrix) -> EstimatorReport:
    """Enumerate all S with |S| >= ceil(n/2) and return p_S for the set
    minimizing the exact centered spectral norm.

    Ties: smallest norm, then largest |S|, then smallest bitmask. Only
    feasible at desk scale; refuses n > 16.
    """
    n = a.n
    if n > EXHAUSTIVE_MAX_N:
        raise ValueError(
            f"exhaustive enumeration over 2^{n} subsets is refused for n > "
            f"{EXHAUSTIVE_MAX_N}; use the spectral estimator instead"
        )
    best = None  # (norm, -size, bitmask, p_s)
    for size in range(math.ceil(n / 2), n + 1):
        subsets, dens, norms = _subset_norms_for_size(a, size)
        for sub, p_s, norm in zip(subsets, dens, norms):
            bitmask = sum(1 << i for i in sub)
            key = (norm, -size, bitmask)
            if best is None or key < best[0]:
                best = (key, float(p_s), sub)
    (norm, neg_size, bitmask), p_s, sub = best
    return _clamped(
        p_s,
        "exhaustive",
        trace={
            "s_hat": NodeSet.from_indices(n, list(sub)),
            "norm": float(norm),
            "bitmask": bitmask,
        },
    )


def run_named_estimator(
    name: str,
    a: AdjacencyMatrix,
    rng: np.random.Generator,
    gamma: float = 0.0,
    c: float = 1.0,
    repeats: int | None = None,
) -> EstimatorReport:
    """CLI/harness entry point: dispatch an estimator by registry name."""
    if name == "mean":
        return mean_estimator(a)
    if name == "median":
        return median_estimator(a)
    if name == "prune-mean":
        return prune_then(a, gamma, c, "mean")
    if name == "prune-median":
        return prune_then(a, gamma, c, "median")
    if name == "spectral":
        alpha1 = min(max(gamma, 1.0 / a.n), ALPHA1_MAX)
        return robust_estimate(a, alpha1, rng, repeats=repeats)
    if name == "spectral-sym":
        return robust_estimate_symmetric(a, max(gamma, 1.0 / a.n), rng, repeats=repeats)
    if name == "exhaustive":
        return exhaustive_estimate(a)
    raise ValueError(f"unknown estimator {name!r}; known: {ESTIMATOR_NAMES}")
