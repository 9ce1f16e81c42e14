"""Hidden-unit group layouts for the group-sparsity penalty.

Groups are contiguous, equal-size windows over the hidden units. With zero
overlap they tile the layer exactly. With overlap, every group gets a
private copy of its members on an "augmented" axis, on which the groups are
again disjoint; `expand` duplicates unit values onto that axis and
`accumulate` (its adjoint) sums augmented-axis values back per original
unit, which is how gradients of shared units are combined.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError


@dataclass(frozen=True, eq=False)
class GroupPartition:
    """Immutable description of a group layout.

    `aug_to_orig` maps each augmented slot to its original hidden index and
    `group_bounds` lists each group's contiguous [lo, hi) range on the
    augmented axis. By construction every group covers a contiguous,
    ascending window of original indices.
    """

    j_original: int
    j_augmented: int
    group_size: int
    num_groups: int
    overlap_fraction: float
    aug_to_orig: np.ndarray
    group_bounds: tuple[tuple[int, int], ...]


def make_nonoverlapping(j: int, group_size: int) -> GroupPartition:
    """Partition j hidden units into j / group_size disjoint groups."""
    if group_size < 1:
        raise ConfigError(f"group_size must be >= 1, got {group_size}")
    if j % group_size != 0:
        raise ConfigError(
            f"group_size {group_size} does not divide the layer size {j}"
        )
    m = j // group_size
    bounds = tuple((k * group_size, (k + 1) * group_size) for k in range(m))
    return GroupPartition(
        j_original=j,
        j_augmented=j,
        group_size=group_size,
        num_groups=m,
        overlap_fraction=0.0,
        aug_to_orig=np.arange(j, dtype=np.int64),
        group_bounds=bounds,
    )


def make_overlapping(j: int, group_size: int, overlap_fraction: float) -> GroupPartition:
    """Sliding-window groups with the given overlap fraction.

    Consecutive groups start `stride = group_size * (1 - overlap_fraction)`
    units apart; the stride must be a positive integer and must divide
    (j - group_size) so the windows cover the layer exactly with no ragged
    tail. Each group's members are copied to a private window of the
    augmented axis.
    """
    if not 0.0 < overlap_fraction < 1.0:
        raise ConfigError(
            f"overlap_fraction must be in (0, 1), got {overlap_fraction}"
        )
    stride_f = group_size * (1.0 - overlap_fraction)
    stride = int(round(stride_f))
    if stride < 1 or abs(stride_f - stride) > 1e-9:
        raise ConfigError(
            f"group_size {group_size} with overlap {overlap_fraction} gives a "
            f"non-integer stride {stride_f}"
        )
    if group_size > j:
        raise ConfigError(f"group_size {group_size} exceeds the layer size {j}")
    if (j - group_size) % stride != 0:
        raise ConfigError(
            f"stride {stride} does not divide layer size {j} minus group_size "
            f"{group_size}; choose sizes so (j - group_size) / stride is integral"
        )
    k_groups = (j - group_size) // stride + 1
    aug_to_orig = np.concatenate(
        [np.arange(k * stride, k * stride + group_size) for k in range(k_groups)]
    ).astype(np.int64)
    bounds = tuple((k * group_size, (k + 1) * group_size) for k in range(k_groups))
    return GroupPartition(
        j_original=j,
        j_augmented=k_groups * group_size,
        group_size=group_size,
        num_groups=k_groups,
        overlap_fraction=float(overlap_fraction),
        aug_to_orig=aug_to_orig,
        group_bounds=bounds,
    )


def make_partition(j: int, group_size: int, overlap_fraction: float = 0.0) -> GroupPartition:
    """Dispatch on the overlap fraction; 0 means disjoint tiling."""
    if overlap_fraction == 0.0:
        return make_nonoverlapping(j, group_size)
    return make_overlapping(j, group_size, overlap_fraction)


def expand(h_values, p: GroupPartition) -> np.ndarray:
    """Copy per-unit values onto the augmented axis (last axis)."""
    h_values = np.asarray(h_values, dtype=float)
    if h_values.shape[-1] != p.j_original:
        raise ValueError(
            f"expected last axis of length {p.j_original}, got {h_values.shape[-1]}"
        )
    return h_values[..., p.aug_to_orig]


def accumulate(aug_values, p: GroupPartition) -> np.ndarray:
    """Adjoint of `expand`: sum augmented-axis values per original unit."""
    aug_values = np.asarray(aug_values, dtype=float)
    if aug_values.shape[-1] != p.j_augmented:
        raise ValueError(
            f"expected last axis of length {p.j_augmented}, got {aug_values.shape[-1]}"
        )
    out = np.zeros(aug_values.shape[:-1] + (p.j_original,))
    for lo, hi in p.group_bounds:
        start = int(p.aug_to_orig[lo])
        out[..., start : start + p.group_size] += aug_values[..., lo:hi]
    return out
