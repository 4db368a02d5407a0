"""Shared statistical helpers for the test suite."""

from collections import Counter

import numpy as np
from scipy import stats


def chisq_two_sample(counts_a, counts_b, min_freq=1e-3):
    """Chi-square p-value that two outcome Counters draw from one law.

    Outcomes rarer than ``min_freq`` of the pooled sample are lumped into a
    single residual cell to keep expected counts healthy.
    """
    total = sum(counts_a.values()) + sum(counts_b.values())
    pooled = Counter(counts_a)
    pooled.update(counts_b)
    keep = [k for k, v in pooled.items() if v / total >= min_freq]
    rare = [k for k in pooled if k not in set(keep)]
    rows = np.zeros((2, len(keep) + (1 if rare else 0)))
    for j, k in enumerate(keep):
        rows[0, j] = counts_a.get(k, 0)
        rows[1, j] = counts_b.get(k, 0)
    if rare:
        rows[0, -1] = sum(counts_a.get(k, 0) for k in rare)
        rows[1, -1] = sum(counts_b.get(k, 0) for k in rare)
    keep_cols = rows.sum(axis=0) > 0
    rows = rows[:, keep_cols]
    _, pval, _, _ = stats.chi2_contingency(rows)
    return pval


def chisq_against_law(counts, law, n_draws, min_prob=1e-4):
    """Chi-square p-value of observed Counter against an exact law dict."""
    keep = {k: pr for k, pr in law.items() if pr >= min_prob}
    tail = 1.0 - sum(keep.values())
    obs = [counts.get(k, 0) for k in keep]
    exp = [pr * n_draws for pr in keep.values()]
    if tail > 0:
        obs.append(n_draws - sum(obs))
        exp.append(tail * n_draws)
    obs, exp = np.array(obs, dtype=float), np.array(exp, dtype=float)
    exp *= obs.sum() / exp.sum()
    _, pval = stats.chisquare(obs, exp)
    return pval


def empirical_tv(counter_a, counter_b):
    """Total variation distance between two empirical laws given as Counters."""
    na, nb = sum(counter_a.values()), sum(counter_b.values())
    keys = set(counter_a) | set(counter_b)
    return 0.5 * sum(abs(counter_a.get(k, 0) / na - counter_b.get(k, 0) / nb) for k in keys)
