"""Lower-bound machinery: exact binomial pmfs, total-variation bounds
for shifted binomials, the degree-distribution coupling that makes two
corrupted directed processes identically distributed, and an end-to-end
indistinguishability demonstration.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .adversaries import AdversaryOutcome, degree_rewiring_adversary
from .graphs import DirectedAdjacencyMatrix, GraphParams, sample_directed_er

__all__ = [
    "Pmf",
    "DegreeCoupling",
    "binomial_pmf",
    "tv_distance",
    "roos_tv_bound",
    "construct_coupling",
    "operating_point_p2",
    "indistinguishable_pair",
    "two_sample_chisquare",
]

MIXTURE_TOL = 1e-12


@dataclass(frozen=True)
class Pmf:
    """Probability mass function over {0, ..., support_size - 1}."""

    mass: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.mass, dtype=np.float64)
        if m.ndim != 1 or m.size == 0:
            raise ValueError("pmf mass must be a nonempty vector")
        if np.any(m < 0):
            raise ValueError("pmf entries must be nonnegative")
        if abs(m.sum() - 1.0) > MIXTURE_TOL:
            raise ValueError(f"pmf must sum to 1 within {MIXTURE_TOL}, got {m.sum()!r}")
        object.__setattr__(self, "mass", m)
        self.mass.setflags(write=False)

    @property
    def support_size(self) -> int:
        return int(self.mass.size)


@dataclass(frozen=True)
class DegreeCoupling:
    """Out-degree distributions (dist1, dist2) satisfying the mixture
    identity (1-eps) Bin(n-1, p1) + eps*dist1 = (1-eps) Bin(n-1, p2) + eps*dist2
    entrywise."""

    n: int
    p1: float
    p2: float
    epsilon: float
    dist1: Pmf
    dist2: Pmf

    def mixture_error(self) -> float:
        d1 = binomial_pmf(self.n - 1, self.p1).mass
        d2 = binomial_pmf(self.n - 1, self.p2).mass
        lhs = (1.0 - self.epsilon) * d1 + self.epsilon * self.dist1.mass
        rhs = (1.0 - self.epsilon) * d2 + self.epsilon * self.dist2.mass
        return float(np.abs(lhs - rhs).max())


def binomial_pmf(n: int, p: float) -> Pmf:
    """Exact Bin(n, p) pmf over {0..n}, computed stably in log space."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"probability must be in [0, 1], got {p}")
    if n < 0:
        raise ValueError(f"need n >= 0, got {n}")
    mass = stats.binom.pmf(np.arange(n + 1), n, p)
    # Guard against rounding drift for huge n; the mass is renormalized
    # only within the 1e-12 contract.
    s = mass.sum()
    if abs(s - 1.0) > MIXTURE_TOL:
        raise ValueError(f"pmf computation lost mass: sum = {s!r}")
    return Pmf(mass)


def tv_distance(a: Pmf, b: Pmf) -> float:
    """Half the L1 distance between two pmfs on the same support."""
    if a.support_size != b.support_size:
        raise ValueError(
            f"support mismatch: {a.support_size} vs {b.support_size}"
        )
    return 0.5 * float(np.abs(a.mass - b.mass).sum())


def roos_tv_bound(n_prime: int, p: float, x: float) -> dict:
    """Upper bounds on d_TV(Bin(n', p), Bin(n', p + x)).

    Returns the sharp bound sqrt(e/2) * tau / (1 - tau)^2 with
    tau = x * sqrt((n' + 2) / (2 p (1 - p))) (infinite when tau >= 1),
    the trivial bound n' * x, and their minimum.
    """
    if not 0.0 < p < 1.0:
        raise ValueError(f"need p in (0, 1), got {p}")
    if x < 0.0:
        raise ValueError(f"need x >= 0, got {x}")
    tau = x * math.sqrt((n_prime + 2) / (2.0 * p * (1.0 - p)))
    sharp = math.inf if tau >= 1.0 else math.sqrt(math.e / 2.0) * tau / (1.0 - tau) ** 2
    trivial = n_prime * x
    return {"tau": tau, "sharp": sharp, "trivial": trivial, "bound": min(sharp, trivial)}


def construct_coupling(n: int, p1: float, p2: float, epsilon: float) -> DegreeCoupling:
    """Build the degree distributions that equalize the two corrupted
    out-degree mixtures.

    With D_k = Bin(n-1, p_k) and m = (1 - eps) * TV(D1, D2) / eps:
    dist1 = (1-eps)(D2 - D1)_+ / eps + (1 - m) D1 and symmetrically for
    dist2; the positive parts cancel algebraically so the mixture
    identity holds to machine precision. Feasible iff TV(D1, D2) <=
    eps / (1 - eps) (and classically whenever TV <= eps).
    """
    if not 0.0 < epsilon < 1.0:
        raise ValueError(f"mixture weight must be in (0, 1), got {epsilon}")
    d1 = binomial_pmf(n - 1, p1)
    d2 = binomial_pmf(n - 1, p2)
    tv = tv_distance(d1, d2)
    m = (1.0 - epsilon) * tv / epsilon
    if m > 1.0 + MIXTURE_TOL:
        raise ValueError(
            f"infeasible: TV(Bin({n - 1},{p1}), Bin({n - 1},{p2})) = {tv:.6g} "
            f"exceeds eps/(1-eps) = {epsilon / (1 - epsilon):.6g}"
        )
    m = min(m, 1.0)
    scale = (1.0 - epsilon) / epsilon
    pos12 = np.maximum(d2.mass - d1.mass, 0.0)
    pos21 = np.maximum(d1.mass - d2.mass, 0.0)
    dist1 = Pmf(scale * pos12 + (1.0 - m) * d1.mass)
    dist2 = Pmf(scale * pos21 + (1.0 - m) * d1.mass)
    return DegreeCoupling(n=n, p1=p1, p2=p2, epsilon=epsilon, dist1=dist1, dist2=dist2)


def operating_point_p2(n: int, p1: float, gamma: float) -> float:
    """The separation target p2 = p1 + 0.1 * max(gamma*sqrt(p1/n), gamma/n)."""
    return p1 + 0.1 * max(gamma * math.sqrt(p1 / n), gamma / n)


def indistinguishable_pair(
    n: int, p1: float, gamma: float, rng: np.random.Generator
) -> tuple[AdversaryOutcome, AdversaryOutcome, DegreeCoupling]:
    """Sample one graph from each of two corrupted directed processes
    whose out-degree vectors are iid from the same mixture.

    Side k samples directed ER(p_k) and rewires it with the oblivious
    degree adversary using dist_k from the coupling; p2 is the
    operating point 0.1 * max(gamma*sqrt(p1/n), gamma/n) above p1.
    """
    if not 0.0 <= p1 <= 0.5:
        raise ValueError(f"need p1 in [0, 0.5], got {p1}")
    p2 = operating_point_p2(n, p1, gamma)
    coupling = construct_coupling(n, p1, p2, epsilon=0.15 * gamma)
    g1 = sample_directed_er(GraphParams(n=n, p=p1, gamma=gamma), rng)
    g2 = sample_directed_er(GraphParams(n=n, p=p2, gamma=gamma), rng)
    out1 = degree_rewiring_adversary(g1, gamma, coupling.dist1.mass, rng)
    out2 = degree_rewiring_adversary(g2, gamma, coupling.dist2.mass, rng)
    return out1, out2, coupling


def two_sample_chisquare(
    sample_a: np.ndarray, sample_b: np.ndarray, min_expected: float = 5.0
) -> dict:
    """Two-sample chi-square test on pooled histograms.

    Bins are individual values pooled greedily (in value order) until
    each bin's expected count reaches ``min_expected`` under the pooled
    distribution. Returns the statistic, degrees of freedom, and p-value.
    """
    sample_a = np.asarray(sample_a)
    sample_b = np.asarray(sample_b)
    hi = int(max(sample_a.max(), sample_b.max()))
    ca = np.bincount(sample_a, minlength=hi + 1).astype(np.float64)
    cb = np.bincount(sample_b, minlength=hi + 1).astype(np.float64)
    pooled = ca + cb
    bins_a, bins_b = [], []
    acc_a = acc_b = acc_p = 0.0
    for v in range(hi + 1):
        acc_a += ca[v]
        acc_b += cb[v]
        acc_p += pooled[v]
        if acc_p >= 2.0 * min_expected:
            bins_a.append(acc_a)
            bins_b.append(acc_b)
            acc_a = acc_b = acc_p = 0.0
    if acc_p > 0:
        if bins_a:
            bins_a[-1] += acc_a
            bins_b[-1] += acc_b
        else:
            bins_a, bins_b = [acc_a], [acc_b]
    oa = np.array(bins_a)
    ob = np.array(bins_b)
    na, nb = oa.sum(), ob.sum()
    tot = oa + ob
    ea = tot * na / (na + nb)
    eb = tot * nb / (na + nb)
    stat = float((((oa - ea) ** 2) / ea).sum() + (((ob - eb) ** 2) / eb).sum())
    dof = max(len(bins_a) - 1, 1)
    pval = float(stats.chi2.sf(stat, dof))
    return {"statistic": stat, "dof": dof, "p_value": pval, "bins": len(bins_a)}
