"""Clustering agreement metrics and the linear-assignment solver behind ACC.

ACC relabels predicted clusters through a minimum-cost assignment on the
negated contingency table, NMI normalizes mutual information by the geometric
mean of the two entropies, and ARI is the pair-counting Rand index corrected
for chance agreement. All three are invariant to relabeling either input.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import Empty, LengthMismatch, NonFinite, TooFew


@dataclass(frozen=True)
class ContingencyTable:
    """Cross-tabulation of two labelings over the same n samples."""

    counts: np.ndarray        # (r, c) ints; entry (i, j) = |true i  &  pred j|
    row_labels: np.ndarray    # distinct true labels, ascending
    col_labels: np.ndarray    # distinct predicted labels, ascending

    @property
    def row_sums(self) -> np.ndarray:
        return self.counts.sum(axis=1)

    @property
    def col_sums(self) -> np.ndarray:
        return self.counts.sum(axis=0)

    @property
    def n(self) -> int:
        return int(self.counts.sum())


@dataclass(frozen=True)
class MetricsReport:
    """ACC, NMI, ARI, and the predicted-to-true relabeling ACC used."""

    acc: float
    nmi: float
    ari: float
    mapping: dict


def contingency_table(true_labels, pred_labels) -> ContingencyTable:
    t, p = _check_pair(true_labels, pred_labels)
    rows, t_idx = np.unique(t, return_inverse=True)
    cols, p_idx = np.unique(p, return_inverse=True)
    counts = np.zeros((rows.size, cols.size), dtype=int)
    np.add.at(counts, (t_idx, p_idx), 1)
    return ContingencyTable(counts=counts, row_labels=rows, col_labels=cols)


def hungarian(cost) -> tuple[dict, float]:
    """Minimum-cost assignment covering min(r, c) rows of a cost matrix.

    Non-square matrices are padded internally with zero-cost dummy entries;
    rows or columns matched to dummies are left out of the returned map.
    Returns ({row: col}, total cost over matched real entries).
    """
    cost = np.asarray(cost, dtype=float)
    if cost.ndim != 2 or cost.size == 0:
        raise ValueError("cost must be a non-empty 2-d matrix")
    if not np.isfinite(cost).all():
        raise NonFinite()
    r, c = cost.shape
    k = max(r, c)
    padded = np.zeros((k, k))
    padded[:r, :c] = cost
    row_of_col = _assign_square(padded)
    mapping = {}
    total = 0.0
    for j, i in enumerate(row_of_col):
        if i < r and j < c:
            mapping[i] = j
            total += float(cost[i, j])
    return mapping, total


def acc(true_labels, pred_labels) -> float:
    """Fraction of samples whose predicted label matches after the best
    one-to-one relabeling of predicted clusters onto true clusters."""
    return _acc_with_mapping(contingency_table(true_labels, pred_labels))[0]


def nmi(true_labels, pred_labels) -> float:
    """Mutual information over the geometric mean of the two entropies.

    Natural-log entropies from empirical frequencies with 0 log 0 = 0. When
    either partition has zero entropy the ratio is degenerate; returns 1 for
    identical partitions and 0 otherwise.
    """
    return _nmi_from_table(contingency_table(true_labels, pred_labels))


def ari(true_labels, pred_labels) -> float:
    """Chance-corrected pair-counting agreement from the contingency table.

    Degenerate case (expected index equals maximum index, e.g. two trivial
    partitions): returns 1 for identical partitions and 0 otherwise.
    """
    table = contingency_table(true_labels, pred_labels)
    if table.n < 2:
        raise TooFew("pair counting needs n >= 2")
    return _ari_from_table(table)


def evaluate(true_labels, pred_labels) -> MetricsReport:
    """All three metrics plus the ACC relabeling map in one pass."""
    table = contingency_table(true_labels, pred_labels)
    if table.n < 2:
        raise TooFew("pair counting needs n >= 2")
    acc_value, mapping = _acc_with_mapping(table)
    return MetricsReport(
        acc=acc_value,
        nmi=_nmi_from_table(table),
        ari=_ari_from_table(table),
        mapping=mapping,
    )


def _check_pair(true_labels, pred_labels):
    t = np.asarray(true_labels).ravel()
    p = np.asarray(pred_labels).ravel()
    if t.shape[0] != p.shape[0]:
        raise LengthMismatch(f"{t.shape[0]} true labels vs {p.shape[0]} predicted")
    if t.shape[0] == 0:
        raise Empty("no samples")
    return t, p


def _acc_with_mapping(table: ContingencyTable) -> tuple[float, dict]:
    mapping_rc, neg_total = hungarian(-table.counts.astype(float))
    correct = -neg_total
    mapping = {
        int(table.col_labels[j]): int(table.row_labels[i]) for i, j in mapping_rc.items()
    }
    return correct / table.n, mapping


def _entropy(freq: np.ndarray) -> float:
    p = freq[freq > 0]
    return float(-(p * np.log(p)).sum())


def _identical_partitions(table: ContingencyTable) -> bool:
    if table.counts.shape[0] != table.counts.shape[1]:
        return False
    return ((table.counts > 0).sum(axis=0) == 1).all() and (
        (table.counts > 0).sum(axis=1) == 1
    ).all()


def _nmi_from_table(table: ContingencyTable) -> float:
    n = table.n
    hx = _entropy(table.row_sums / n)
    hy = _entropy(table.col_sums / n)
    if hx == 0.0 or hy == 0.0:
        return 1.0 if _identical_partitions(table) else 0.0
    # Mutual information through the entropy identity; equals the double sum
    # over the joint distribution and is exact for identical partitions.
    hxy = _entropy(table.counts.ravel() / n)
    r = hx + hy - hxy
    return float(min(max(r / np.sqrt(hx * hy), 0.0), 1.0))


def _ari_from_table(table: ContingencyTable) -> float:
    def pairs2(v):
        return int((v * (v - 1) // 2).sum())

    n = table.n
    index = pairs2(table.counts)
    sum_a = pairs2(table.row_sums)
    sum_b = pairs2(table.col_sums)
    total = n * (n - 1) // 2
    expected = sum_a * sum_b / total
    max_index = (sum_a + sum_b) / 2.0
    if max_index == expected:
        return 1.0 if _identical_partitions(table) else 0.0
    return float((index - expected) / (max_index - expected))


def _assign_square(cost: np.ndarray) -> list[int]:
    """O(n^3) potential-based assignment on a square cost matrix.

    Returns row_of_col: the row matched to each column. Handles negative
    costs; optimality is what the tests enforce.
    """
    k = cost.shape[0]
    inf = float("inf")
    u = [0.0] * (k + 1)
    v = [0.0] * (k + 1)
    match = [0] * (k + 1)      # match[j] = row assigned to column j (1-based)
    way = [0] * (k + 1)
    for i in range(1, k + 1):
        match[0] = i
        j0 = 0
        minv = [inf] * (k + 1)
        used = [False] * (k + 1)
        while True:
            used[j0] = True
            i0 = match[j0]
            delta = inf
            j1 = 0
            row = cost[i0 - 1]
            for j in range(1, k + 1):
                if not used[j]:
                    cur = row[j - 1] - u[i0] - v[j]
                    if cur < minv[j]:
                        minv[j] = cur
                        way[j] = j0
                    if minv[j] < delta:
                        delta = minv[j]
                        j1 = j
            for j in range(k + 1):
                if used[j]:
                    u[match[j]] += delta
                    v[j] -= delta
                else:
                    minv[j] -= delta
            j0 = j1
            if match[j0] == 0:
                break
        while j0:
            j1 = way[j0]
            match[j0] = match[j1]
            j0 = j1
    return [match[j] - 1 for j in range(1, k + 1)]
