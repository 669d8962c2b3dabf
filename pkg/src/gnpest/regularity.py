"""Regularity conditions for centered adjacency matrices: the eta/kappa
rate functions, brute-force verification on small graphs, and
Monte Carlo audits of the concentration bounds.

A node set F of an adjacency matrix A is (alpha1, alpha2, p)-regular if
(1) |F^c| <= alpha1 * n, (2) every principal submatrix of (A - p)
indexed by a subset of F has spectral norm at most n * eta(p, n), and
(3) every centered block sum over F' x F'' with both sizes in
[0, alpha2*n] union [n - alpha2*n, n] is at most n^2 * kappa(alpha2, p, n)
in magnitude.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .graphs import AdjacencyMatrix, NodeSet, empirical_density
from .linalg.spectral import spectral_norm_exact, spectral_norm_of_centered

__all__ = [
    "RateConstants",
    "DEFAULT_CONSTANTS",
    "RegularityReport",
    "eta",
    "kappa",
    "admissible_sizes",
    "max_block_sum",
    "check_regularity",
    "consequence_checks",
    "coarse_bound_audit",
    "concentration_theorem_bound",
    "concentration_audit",
    "chernoff_tail_bound",
]

EXACT_ENUM_CAP = 14


@dataclass(frozen=True)
class RateConstants:
    """The leading constants of the eta and kappa rate functions.

    The defaults were frozen by the calibration sweep (``gnpest
    calibrate``): smallest 0.5-grid pair for which all regularity
    conditions hold in at least 99% of uncorrupted trials over
    n in {100, 400, 1600} x p in {0.05, 0.5, 0.95}.
    """

    c_eta: float
    c_kappa: float

    def __post_init__(self):
        if self.c_eta <= 0 or self.c_kappa <= 0:
            raise ValueError("rate constants must be positive")


DEFAULT_CONSTANTS = RateConstants(c_eta=3.0, c_kappa=2.5)


def eta(p: float, n: int, k: RateConstants = DEFAULT_CONSTANTS) -> float:
    """Spectral-norm fluctuation rate c * max(sqrt(p(1-p)/n), sqrt(ln n)/n)."""
    if n < 2:
        raise ValueError(f"need n >= 2, got {n}")
    return k.c_eta * max(math.sqrt(p * (1.0 - p) / n), math.sqrt(math.log(n)) / n)


def kappa(alpha: float, p: float, n: int, k: RateConstants = DEFAULT_CONSTANTS) -> float:
    """Block-sum fluctuation rate
    c1 * max(alpha*sqrt((p/n)ln(e/alpha)), (alpha/n)ln(e/alpha), sqrt(p ln n)/n)."""
    if n < 2:
        raise ValueError(f"need n >= 2, got {n}")
    if alpha <= 0.0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    lg = math.log(math.e / alpha)
    return k.c_kappa * max(
        alpha * math.sqrt(p / n * lg),
        alpha / n * lg,
        math.sqrt(p * math.log(n)) / n,
    )


@dataclass(frozen=True)
class RegularityReport:
    holds: tuple[bool, bool, bool]
    margins: tuple[float, float, float]
    worst_witness: dict = field(default_factory=dict)
    sampled: bool = False

    @property
    def all_hold(self) -> bool:
        return all(self.holds)


def admissible_sizes(n: int, alpha: float, cap: int | None = None) -> list[int]:
    """Sizes in [0, floor(alpha*n)] union [ceil((1-alpha)*n), n], optionally
    truncated to sizes <= cap (the ambient set may be smaller than [n])."""
    lo = int(math.floor(alpha * n))
    hi = int(math.ceil((1.0 - alpha) * n))
    out = list(range(0, lo + 1)) + [s for s in range(hi, n + 1) if s > lo]
    if cap is not None:
        out = [s for s in out if s <= cap]
    return out


def _best_rows_for(r: np.ndarray, sizes: list[int]) -> tuple[float, np.ndarray]:
    """Max of sum(r[F']) over subsets F' with |F'| in sizes, by taking the
    top-s entries for each admissible s."""
    order = np.argsort(-r, kind="stable")
    prefix = np.concatenate(([0.0], np.cumsum(r[order])))
    best_s = max(sizes, key=lambda s: prefix[s])
    return float(prefix[best_s]), order[:best_s]


def _best_rows_batch(r: np.ndarray, sizes: list[int]) -> tuple[np.ndarray, np.ndarray]:
    """Column-wise :func:`_best_rows_for`: for each column of r, the best
    admissible top-s sum and its 0/1 indicator. Returns (values, U) with
    U of the same shape as r."""
    order = np.argsort(-r, axis=0, kind="stable")
    prefix = np.vstack(
        [np.zeros((1, r.shape[1])), np.cumsum(np.take_along_axis(r, order, axis=0), axis=0)]
    )
    cand = prefix[np.asarray(sizes), :]
    pick = np.argmax(cand, axis=0)
    cols = np.arange(r.shape[1])
    best_sizes = np.asarray(sizes)[pick]
    u = np.zeros_like(r)
    for j in cols:
        u[order[: best_sizes[j], j], j] = 1.0
    return cand[pick, cols], u


def max_block_sum(
    m: np.ndarray,
    sizes_rows: list[int],
    sizes_cols: list[int],
    exact: bool,
    rng: np.random.Generator | None = None,
    starts: int = 32,
) -> float:
    """max over F', F'' (row/column subsets with admissible sizes) of
    |sum of M over F' x F''|.

    Exact mode enumerates every admissible subset pair (cap: 14 ambient
    nodes). The heuristic mode runs alternating maximization (optimal
    row set given a column set and vice versa) from random and extremal
    starts, on both M and -M; it reports a lower bound on the true max.
    """
    k = m.shape[0]
    if exact:
        subsets_r = [list(c) for s in sizes_rows for c in combinations(range(k), s)]
        subsets_c = [list(c) for s in sizes_cols for c in combinations(range(k), s)]
        u = np.zeros((len(subsets_r), k))
        for t, sub in enumerate(subsets_r):
            u[t, sub] = 1.0
        v = np.zeros((len(subsets_c), k))
        for t, sub in enumerate(subsets_c):
            v[t, sub] = 1.0
        return float(np.abs(u @ m @ v.T).max())

    if rng is None:
        rng = np.random.default_rng(0)
    best = 0.0
    for sign in (1.0, -1.0):
        ms = sign * m
        cols = [np.ones(k), (ms.sum(axis=0) > 0).astype(np.float64)]
        for _ in range(starts):
            cols.append((rng.random(k) < rng.random()).astype(np.float64))
        # All starts advance together as one matrix product per half-step.
        v = np.column_stack(cols)
        prev = np.full(v.shape[1], -np.inf)
        for _ in range(40):
            _, u = _best_rows_batch(ms @ v, sizes_rows)
            vals, v = _best_rows_batch(ms.T @ u, sizes_cols)
            if np.all(vals <= prev + 1e-12):
                prev = np.maximum(prev, vals)
                break
            prev = np.maximum(prev, vals)
        best = max(best, float(prev.max()))
    return best


def _enumerate_principal_norm(mf: np.ndarray) -> tuple[float, tuple]:
    """Max exact spectral norm over all principal submatrices of mf,
    batched per subset size. Returns (max norm, witness index tuple)."""
    k = mf.shape[0]
    best = (0.0, ())
    for size in range(1, k + 1):
        subs = list(combinations(range(k), size))
        mats = np.stack([mf[np.ix_(s, s)] for s in subs])
        norms = np.abs(np.linalg.eigvalsh(mats)).max(axis=1)
        t = int(np.argmax(norms))
        if norms[t] > best[0]:
            best = (float(norms[t]), subs[t])
    return best


def check_regularity(
    a: AdjacencyMatrix,
    f: NodeSet,
    p: float,
    alpha1: float,
    alpha2: float,
    k: RateConstants = DEFAULT_CONSTANTS,
    rng: np.random.Generator | None = None,
    sample_pairs: int = 2**14,
) -> RegularityReport:
    """Verify the three regularity conditions for (A, F, p).

    Exact (all-subsets) evaluation when n <= 14; otherwise condition 2
    is checked at F' = F (which dominates every smaller F' exactly, by
    submatrix norm monotonicity) and condition 3 by sampled/alternating
    maximization, with the report flagged ``sampled``.
    """
    n = a.n
    f_idx = f.indices
    exact = n <= EXACT_ENUM_CAP

    margin1 = alpha1 * n - (n - f.size)
    hold1 = margin1 >= 0

    bound2 = n * eta(p, n, k)
    witness: dict = {}
    if f.size == 0:
        norm2 = 0.0
        wit2: tuple = ()
    elif exact:
        mf = a.mat[np.ix_(f_idx, f_idx)].astype(np.float64) - p
        norm2, wit_local = _enumerate_principal_norm(mf)
        wit2 = tuple(f_idx[list(wit_local)]) if wit_local else ()
    else:
        norm2 = spectral_norm_of_centered(a, f, shift=p)
        wit2 = tuple(f_idx)
    margin2 = bound2 - norm2
    hold2 = margin2 >= 0
    if not hold2:
        witness["condition2"] = {"subset": wit2, "norm": norm2, "bound": bound2}

    bound3 = n * n * kappa(alpha2, p, n, k)
    sizes = admissible_sizes(n, alpha2, cap=f.size)
    if f.size == 0 or not sizes:
        lhs3 = 0.0
    else:
        mf = a.mat[np.ix_(f_idx, f_idx)].astype(np.float64) - p
        lhs3 = max_block_sum(mf, sizes, sizes, exact=exact, rng=rng)
    margin3 = bound3 - lhs3
    hold3 = margin3 >= 0
    if not hold3:
        witness["condition3"] = {"lhs": lhs3, "bound": bound3}

    return RegularityReport(
        holds=(hold1, hold2, hold3),
        margins=(margin1, margin2, margin3),
        worst_witness=witness,
        sampled=not exact,
    )


def consequence_checks(
    a: AdjacencyMatrix,
    f: NodeSet,
    p: float,
    alpha2: float,
    k: RateConstants = DEFAULT_CONSTANTS,
) -> dict:
    """Audit the two consequences of regularity over all enumerable F':
    the self-centered norm bound ||(A - p_{F'})_{F' x F'}|| <= 2n*eta and,
    for |F'| >= (1 - alpha2) n, the density bound |p_{F'} - p| <= 4*kappa.

    Only meaningful when the regularity conditions themselves hold; the
    caller audits the implication, never the converse.
    """
    n = a.n
    if n > EXACT_ENUM_CAP:
        raise ValueError(f"consequence audit enumerates subsets; needs n <= {EXACT_ENUM_CAP}")
    f_idx = f.indices
    bound_norm = 2.0 * n * eta(p, n, k)
    bound_dens = 4.0 * kappa(alpha2, p, n, k)
    min_large = (1.0 - alpha2) * n
    norm_ok, dens_ok = True, True
    failures: list[dict] = []
    for size in range(1, f.size + 1):
        for sub in combinations(f_idx.tolist(), size):
            s = NodeSet.from_indices(n, list(sub))
            p_s = empirical_density(a, s)
            block = a.mat[np.ix_(list(sub), list(sub))].astype(np.float64) - p_s
            norm = spectral_norm_exact(block) if size > 1 else abs(block[0, 0])
            if norm > bound_norm:
                norm_ok = False
                failures.append({"kind": "norm", "subset": sub, "lhs": norm})
            if size >= min_large and abs(p_s - p) > bound_dens:
                dens_ok = False
                failures.append({"kind": "density", "subset": sub, "lhs": abs(p_s - p)})
    return {
        "norm_bound_holds": norm_ok,
        "density_bound_holds": dens_ok,
        "norm_bound": bound_norm,
        "density_bound": bound_dens,
        "failures": failures,
    }


def coarse_bound_audit(
    a: AdjacencyMatrix,
    p: float,
    alpha1: float,
    k: RateConstants = DEFAULT_CONSTANTS,
) -> dict:
    """For every S with |S| >= n/2, check the coarse-estimate inequality
    |p_S - p| <= (||(A - p_S)_{S x S}|| + n*eta(p, n)) / ((1/2 - alpha1) n).

    Valid whenever the graph contains an (alpha1, *, p)-regular subgraph;
    the caller establishes the premise before treating a violation as a
    counterexample.
    """
    n = a.n
    if n > EXACT_ENUM_CAP:
        raise ValueError(f"coarse-bound audit needs n <= {EXACT_ENUM_CAP}")
    if not alpha1 < 0.5:
        raise ValueError("alpha1 must be < 1/2")
    slack = n * eta(p, n, k)
    denom = (0.5 - alpha1) * n
    worst = math.inf
    failures = []
    for size in range(math.ceil(n / 2), n + 1):
        for sub in combinations(range(n), size):
            s = NodeSet.from_indices(n, list(sub))
            p_s = empirical_density(a, s)
            block = a.mat[np.ix_(sub, sub)].astype(np.float64) - p_s
            rhs = (spectral_norm_exact(block) + slack) / denom
            margin = rhs - abs(p_s - p)
            worst = min(worst, margin)
            if margin < 0:
                failures.append({"subset": sub, "lhs": abs(p_s - p), "rhs": rhs})
    return {"holds": not failures, "worst_margin": worst, "failures": failures}


def concentration_theorem_bound(n: int, p: float, alpha: float) -> float:
    """6 * max(16*alpha*n*sqrt(p*n*ln(e/alpha)), 60*alpha*n*ln(e/alpha),
    5*n*sqrt(p*ln(e*n))), with the alpha -> 0 limit of the first two
    terms taken as 0."""
    third = 5.0 * n * math.sqrt(p * math.log(math.e * n))
    if alpha <= 0.0:
        return 6.0 * third
    lg = math.log(math.e / alpha)
    return 6.0 * max(
        16.0 * alpha * n * math.sqrt(p * n * lg),
        60.0 * alpha * n * lg,
        third,
    )


def concentration_audit(
    n: int,
    p: float,
    alpha_grid: list[float],
    trials: int,
    rng_for_trial,
    sample_graph,
) -> list[dict]:
    """Empirical audit of the block-sum concentration bound.

    For each trial and alpha, computes max over |S|, |S'| in
    [0, alpha*n] union [n - alpha*n, n] of |sum over S x S' of (A - p)|
    and compares it to :func:`concentration_theorem_bound`.

    ``sample_graph(trial)`` supplies the uncorrupted sample and
    ``rng_for_trial(trial)`` the stream for sampled-mode maximization.
    Returns one row dict per (alpha, trial).
    """
    exact = n <= EXACT_ENUM_CAP
    rows = []
    for trial in range(trials):
        a = sample_graph(trial)
        m = a.mat.astype(np.float64) - p
        rng = rng_for_trial(trial)
        for alpha in alpha_grid:
            sizes = admissible_sizes(n, alpha)
            lhs = max_block_sum(m, sizes, sizes, exact=exact, rng=rng)
            bound = concentration_theorem_bound(n, p, alpha)
            rows.append(
                {
                    "n": n,
                    "p": p,
                    "alpha": alpha,
                    "trial": trial,
                    "lhs": lhs,
                    "bound": bound,
                    "holds": lhs <= bound,
                    "sampled": not exact,
                }
            )
    return rows


def chernoff_tail_bound(t: int, p: float, lam: float) -> float:
    """Two-sided Bernoulli-sum tail bound
    2 * exp(-min(lam^2 / (3 t p), lam / 3))."""
    if t < 1 or lam <= 0:
        raise ValueError("need t >= 1 and lambda > 0")
    if p == 0.0:
        return 0.0 if lam > 0 else 2.0
    return 2.0 * math.exp(-min(lam * lam / (3.0 * t * p), lam / 3.0))
