"""Statistical machinery: confidence bands, rank-sum tests with Holm
correction, and the Fligner-Killeen variance test."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy import stats as scistats

Z_95 = 1.96


def mean_ci(samples: np.ndarray, axis: int = 0) -> tuple:
    """Mean and 95% CI half-width (normal approximation, sample std)."""
    samples = np.asarray(samples, dtype=float)
    n = samples.shape[axis]
    mean = samples.mean(axis=axis)
    if n < 2:
        return mean, np.zeros_like(mean)
    half = Z_95 * samples.std(axis=axis, ddof=1) / math.sqrt(n)
    return mean, half


def rank_sum_p(a, b) -> float:
    """Two-sided Wilcoxon rank-sum (Mann-Whitney) p-value.

    Exact distribution when both groups have <= 20 samples and the pooled
    data is tie-free; otherwise the tie-corrected normal approximation.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    pooled = np.concatenate([a, b])
    tie_free = len(np.unique(pooled)) == len(pooled)
    method = "exact" if (len(a) <= 20 and len(b) <= 20 and tie_free) else "asymptotic"
    return float(scistats.mannwhitneyu(a, b, alternative="two-sided", method=method).pvalue)


def holm(p_values) -> list:
    """Holm's step-down adjustment; monotone and clipped to 1."""
    m = len(p_values)
    order = sorted(range(m), key=lambda i: p_values[i])
    adjusted = [0.0] * m
    running = 0.0
    for rank, idx in enumerate(order):
        running = max(running, (m - rank) * p_values[idx])
        adjusted[idx] = min(1.0, running)
    return adjusted


@dataclass
class PairwiseResult:
    pairs: list  # (label_a, label_b, p_raw, p_holm)
    fligner_p: float
    degenerate: bool  # all samples identical; p-values are not informative


def pairwise_tests(groups: dict) -> PairwiseResult:
    """All pairwise rank-sum tests with Holm correction, plus one
    Fligner-Killeen homogeneity-of-variances p-value across the groups."""
    labels = list(groups)
    if any(len(groups[label]) < 5 for label in labels):
        raise ValueError("pairwise tests need >= 5 samples per group")
    pooled = np.concatenate([np.asarray(groups[label], dtype=float) for label in labels])
    degenerate = bool(np.all(pooled == pooled[0]))

    combos = list(itertools.combinations(labels, 2))
    if degenerate:
        raw = [1.0] * len(combos)
        fligner_p = 1.0
    else:
        raw = [rank_sum_p(groups[a], groups[b]) for a, b in combos]
        fligner_p = float(scistats.fligner(*(groups[label] for label in labels)).pvalue)
    adjusted = holm(raw)
    pairs = [
        (a, b, raw[i], adjusted[i]) for i, (a, b) in enumerate(combos)
    ]
    return PairwiseResult(pairs=pairs, fligner_p=fligner_p, degenerate=degenerate)


def representative_index(best_values) -> int:
    """Index of the run closest to the median best value (first on ties)."""
    best_values = list(best_values)
    med = float(np.median(best_values))
    return min(range(len(best_values)), key=lambda i: (abs(best_values[i] - med), i))
