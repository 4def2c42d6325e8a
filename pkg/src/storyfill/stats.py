"""Monte Carlo permutation tests.

Two flavors:

* `permutation_test` -- classic two-sample test on independent samples. The
  statistic is the difference of means; resampling draws random partitions of
  the pooled values. The pooled values are canonicalized (sorted) and the
  smaller group size is always the drawn subset, so the p-value is exactly
  invariant to swapping the two samples.

* `preference_permutation_test` -- randomization test for forced-choice
  preference data. Each response picks one of three sources; under the null
  the source labels within a judgment group are exchangeable, so resampling
  redraws each response's preferred source uniformly. A plain two-sample
  test is miscalibrated here because the per-response indicators for two
  sources are structurally dependent (picking one excludes the other).

Both report two-sided p-values with add-one smoothing:
p = (1 + #{resamples with |stat| >= |observed|}) / (1 + n_resamples).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

_TIE_EPS = 1e-12


@dataclass(frozen=True)
class PermutationTestResult:
    observed_stat: float
    p_value: float
    n_resamples: int
    seed: int


def _smoothed_p(exceed: int, n_resamples: int) -> float:
    return (1 + exceed) / (1 + n_resamples)


def permutation_test(
    sample_a: Sequence[float],
    sample_b: Sequence[float],
    n_resamples: int = 10_000,
    seed: int = 0,
) -> PermutationTestResult:
    """Two-sample Monte Carlo permutation test on mean(a) - mean(b)."""
    a = np.asarray(sample_a, dtype=np.float64)
    b = np.asarray(sample_b, dtype=np.float64)
    if a.size == 0 or b.size == 0:
        raise ValueError("both samples must be non-empty")
    if n_resamples < 100:
        raise ValueError("n_resamples must be at least 100")
    observed = float(a.mean() - b.mean())
    threshold = abs(observed) - _TIE_EPS * max(1.0, abs(observed))

    pooled = np.sort(np.concatenate([a, b]))
    n = pooled.size
    ns = min(a.size, b.size)  # always draw the smaller group: symmetric in (a, b)
    total = pooled.sum()
    rng = np.random.default_rng(seed)
    exceed = 0
    chunk = max(1, min(n_resamples, 4_000_000 // max(n, 1)))
    remaining = n_resamples
    while remaining > 0:
        rows = min(chunk, remaining)
        idx = np.broadcast_to(np.arange(n), (rows, n))
        perm = rng.permuted(idx, axis=1)
        subset_sum = pooled[perm[:, :ns]].sum(axis=1)
        mean_s = subset_sum / ns
        mean_rest = (total - subset_sum) / (n - ns)
        stats = np.abs(mean_s - mean_rest)
        exceed += int((stats >= threshold).sum())
        remaining -= rows
    return PermutationTestResult(
        observed_stat=observed,
        p_value=_smoothed_p(exceed, n_resamples),
        n_resamples=n_resamples,
        seed=seed,
    )


def preference_permutation_test(
    preferred: Sequence[str],
    source_x: str,
    source_y: str,
    sources: Sequence[str] = ("PRE", "POST", "GEN"),
    n_resamples: int = 10_000,
    seed: int = 0,
) -> PermutationTestResult:
    """Randomization test for rate(source_x) - rate(source_y).

    `preferred` holds one chosen source per response. Resampling relabels
    each response's choice uniformly over the sources, the Monte Carlo
    analogue of permuting source labels within each judgment group.
    """
    choices = list(preferred)
    if not choices:
        raise ValueError("no responses supplied")
    if n_resamples < 100:
        raise ValueError("n_resamples must be at least 100")
    unknown = {c for c in choices if c not in sources}
    if unknown:
        raise ValueError(f"choices outside {sources}: {sorted(unknown)}")
    n = len(choices)
    xi = sources.index(source_x)
    yi = sources.index(source_y)
    observed = (
        sum(1 for c in choices if c == source_x) - sum(1 for c in choices if c == source_y)
    ) / n
    threshold = abs(observed) - _TIE_EPS * max(1.0, abs(observed))

    rng = np.random.default_rng(seed)
    exceed = 0
    chunk = max(1, min(n_resamples, 8_000_000 // max(n, 1)))
    remaining = n_resamples
    while remaining > 0:
        rows = min(chunk, remaining)
        draws = rng.integers(0, len(sources), size=(rows, n))
        stats = np.abs(((draws == xi).sum(axis=1) - (draws == yi).sum(axis=1)) / n)
        exceed += int((stats >= threshold).sum())
        remaining -= rows
    return PermutationTestResult(
        observed_stat=float(observed),
        p_value=_smoothed_p(exceed, n_resamples),
        n_resamples=n_resamples,
        seed=seed,
    )


def paired_swap_permutation_test(
    values_a_by_cluster: Sequence[Sequence[float]],
    values_b_by_cluster: Sequence[Sequence[float]],
    n_resamples: int = 10_000,
    seed: int = 0,
) -> PermutationTestResult:
    """Within-cluster swap test for paired condition comparisons.

    Each cluster (an authoring block) contributes values under condition a
    and condition b; resampling swaps the two condition lists within each
    cluster independently. Exact when conditions are exchangeable within a
    cluster, and unlike a pooled two-sample test it stays calibrated when
    values are correlated inside clusters (here: influence scores sharing a
    block's generated examples).
    """
    if len(values_a_by_cluster) != len(values_b_by_cluster):
        raise ValueError("need the same clusters on both sides")
    if not values_a_by_cluster:
        raise ValueError("no clusters supplied")
    if n_resamples < 100:
        raise ValueError("n_resamples must be at least 100")
    sums_a = np.array([np.sum(v) for v in values_a_by_cluster], dtype=np.float64)
    sums_b = np.array([np.sum(v) for v in values_b_by_cluster], dtype=np.float64)
    counts_a = np.array([len(v) for v in values_a_by_cluster], dtype=np.float64)
    counts_b = np.array([len(v) for v in values_b_by_cluster], dtype=np.float64)
    na, nb = counts_a.sum(), counts_b.sum()
    if na == 0 or nb == 0:
        raise ValueError("both conditions must be non-empty")
    observed = float(sums_a.sum() / na - sums_b.sum() / nb)
    threshold = abs(observed) - _TIE_EPS * max(1.0, abs(observed))

    rng = np.random.default_rng(seed)
    n_clusters = len(sums_a)
    exceed = 0
    chunk = max(1, min(n_resamples, 4_000_000 // max(n_clusters, 1)))
    remaining = n_resamples
    while remaining > 0:
        rows = min(chunk, remaining)
        swap = rng.integers(0, 2, size=(rows, n_clusters)).astype(bool)
        sa = np.where(swap, sums_b, sums_a).sum(axis=1)
        sb = np.where(swap, sums_a, sums_b).sum(axis=1)
        ca = np.where(swap, counts_b, counts_a).sum(axis=1)
        cb = np.where(swap, counts_a, counts_b).sum(axis=1)
        stats = np.abs(sa / ca - sb / cb)
        exceed += int((stats >= threshold).sum())
        remaining -= rows
    return PermutationTestResult(
        observed_stat=observed,
        p_value=_smoothed_p(exceed, n_resamples),
        n_resamples=n_resamples,
        seed=seed,
    )


def cluster_label_permutation_test(
    clusters_x: Sequence[Sequence[float]],
    clusters_y: Sequence[Sequence[float]],
    n_resamples: int = 10_000,
    seed: int = 0,
) -> PermutationTestResult:
    """Two-sample test that permutes labels at the cluster level.

    Used for between-block comparisons (easy vs hard prompts): every block
    carries its sentences' values as one unit, so within-block correlation
    cannot distort the null distribution.
    """
    if not clusters_x or not clusters_y:
        raise ValueError("both label groups need at least one cluster")
    if n_resamples < 100:
        raise ValueError("n_resamples must be at least 100")
    all_sums = np.array(
        [np.sum(v) for v in clusters_x] + [np.sum(v) for v in clusters_y], dtype=np.float64
    )
    all_counts = np.array(
        [len(v) for v in clusters_x] + [len(v) for v in clusters_y], dtype=np.float64
    )
    nx = len(clusters_x)
    n_clusters = len(all_sums)
    total_sum, total_count = all_sums.sum(), all_counts.sum()
    observed = float(
        all_sums[:nx].sum() / all_counts[:nx].sum()
        - all_sums[nx:].sum() / all_counts[nx:].sum()
    )
    threshold = abs(observed) - _TIE_EPS * max(1.0, abs(observed))

    rng = np.random.default_rng(seed)
    exceed = 0
    chunk = max(1, min(n_resamples, 4_000_000 // max(n_clusters, 1)))
    remaining = n_resamples
    while remaining > 0:
        rows = min(chunk, remaining)
        idx = np.broadcast_to(np.arange(n_clusters), (rows, n_clusters))
        perm = rng.permuted(idx, axis=1)[:, :nx]
        sx = all_sums[perm].sum(axis=1)
        cx = all_counts[perm].sum(axis=1)
        stats = np.abs(sx / cx - (total_sum - sx) / (total_count - cx))
        exceed += int((stats >= threshold).sum())
        remaining -= rows
    return PermutationTestResult(
        observed_stat=observed,
        p_value=_smoothed_p(exceed, n_resamples),
        n_resamples=n_resamples,
        seed=seed,
    )


__all__ = [
    "PermutationTestResult",
    "permutation_test",
    "preference_permutation_test",
    "paired_swap_permutation_test",
    "cluster_label_permutation_test",
]
