"""Stratified train/validation split.

Stratification happens per label within each source dataset. Cell sizes
are rounded by largest remainder within each label, so every
(dataset, label) cell is within one item of ``fraction * n`` and every
label's overall train count is within half an item of its target.
"""

from __future__ import annotations

import math
from collections import defaultdict

import numpy as np

from crisis_exporter.data import LabeledTweet


def stratified_split(
    rows: list[LabeledTweet], fraction: float = 0.8, seed: int = 0
) -> tuple[list[LabeledTweet], list[LabeledTweet]]:
    if not 0.0 < fraction < 1.0:
        raise ValueError("fraction must be in (0, 1)")
    cells: dict[tuple[str, int], list[LabeledTweet]] = defaultdict(list)
    for row in rows:
        cells[(row.dataset, row.label)].append(row)

    by_label: dict[int, list[tuple[str, int]]] = defaultdict(list)
    for dataset, label in cells:
        by_label[label].append((dataset, label))

    take: dict[tuple[str, int], int] = {}
    for label, keys in by_label.items():
        keys = sorted(keys)
        quotas = [fraction * len(cells[k]) for k in keys]
        base = [math.floor(q) for q in quotas]
        target = round(fraction * sum(len(cells[k]) for k in keys))
        extra = target - sum(base)
        order = sorted(
            range(len(keys)), key=lambda i: (-(quotas[i] - base[i]), keys[i])
        )
        for rank, i in enumerate(order):
            take[keys[i]] = base[i] + (1 if rank < extra else 0)

    rng = np.random.default_rng(seed)
    train: list[LabeledTweet] = []
    val: list[LabeledTweet] = []
    for key in sorted(cells):
        members = cells[key]
        perm = rng.permutation(len(members))
        n_train = take[key]
        for pos, idx in enumerate(perm):
            (train if pos < n_train else val).append(members[int(idx)])
    return train, val
