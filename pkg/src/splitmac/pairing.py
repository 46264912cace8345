"""Device pairing for two-device NOMA groups.

All pairing algorithms take SNRs in ascending order. Device ids default to
positions ``0..N-1`` in that order, which matches the relabelling done by
:func:`splitmac.channel.place_devices`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from splitmac.rates import DeviceGroup, min_latency_group

EXHAUSTIVE_MAX_N = 14


class CapacityError(ValueError):
    """Raised when an exhaustive search would be too large to run."""


@dataclass(frozen=True)
class GroupingPlan:
    groups: tuple[DeviceGroup, ...]

    def __post_init__(self):
        object.__setattr__(self, "groups", tuple(self.groups))
        seen: set[int] = set()
        for g in self.groups:
            dup = seen.intersection(g.member_ids)
            if dup:
                raise ValueError(f"device(s) {sorted(dup)} appear in more than one group")
            seen.update(g.member_ids)

    @property
    def covers(self) -> frozenset[int]:
        return frozenset(i for g in self.groups for i in g.member_ids)

    @property
    def n_devices(self) -> int:
        return sum(len(g) for g in self.groups)

    def validate(self, device_ids=None, group_size: int | None = None) -> None:
        if device_ids is not None and self.covers != frozenset(device_ids):
            raise ValueError("plan does not cover exactly the device set")
        if group_size is not None and any(len(g) != group_size for g in self.groups):
            raise ValueError(f"every group must have exactly {group_size} members")

    def pairs(self) -> list[tuple[int, ...]]:
        """Sorted member-id tuples, sorted; handy for comparisons."""
        return sorted(tuple(sorted(g.member_ids)) for g in self.groups)


@dataclass(frozen=True)
class DeviationReport:
    small_deviation: bool
    large_deviation: bool
    snr_min: float
    snr_max: float


def _as_ids(snrs: Sequence[float], ids) -> list[int]:
    ids = list(range(len(snrs))) if ids is None else [int(i) for i in ids]
    if len(ids) != len(snrs):
        raise ValueError("ids and snrs differ in length")
    return ids


def _check_even_sorted(snrs: Sequence[float]) -> None:
    if len(snrs) % 2:
        raise ValueError(f"pairing needs an even number of devices, got {len(snrs)}")
    if any(b < a for a, b in zip(snrs, snrs[1:])):
        raise ValueError("SNRs must be in ascending order")


def small_deviation_holds(snrs: Sequence[float]) -> bool:
    lo, hi = min(snrs), max(snrs)
    return hi <= (1.0 + lo) * lo


def large_deviation_holds(snrs_sorted: Sequence[float]) -> bool:
    if any(b < a for a, b in zip(snrs_sorted, snrs_sorted[1:])):
        raise ValueError("large deviation check needs SNRs in ascending order")
    return all(b >= (1.0 + a) * a for a, b in zip(snrs_sorted, snrs_sorted[1:]))


def deviation_report(snrs_sorted: Sequence[float]) -> DeviationReport:
    return DeviationReport(
        small_deviation=small_deviation_holds(snrs_sorted),
        large_deviation=large_deviation_holds(snrs_sorted),
        snr_min=float(min(snrs_sorted)),
        snr_max=float(max(snrs_sorted)),
    )


def total_uplink_latency(plan: GroupingPlan, payload_bits: float = 1.0) -> float:
    """Sum of per-group min-max latencies (normalized, bandwidth-free)."""
    if not plan.groups:
        raise ValueError("empty plan")
    return sum(min_latency_group(g, payload_bits)[1] for g in plan.groups)


def _pair(snrs, ids, i, j) -> DeviceGroup:
    return DeviceGroup((ids[i], ids[j]), (snrs[i], snrs[j]))


def snr_balanced_pairing(snrs: Sequence[float], ids=None) -> GroupingPlan:
    """Weakest with strongest, second weakest with second strongest, ..."""
    _check_even_sorted(snrs)
    ids = _as_ids(snrs, ids)
    n = len(snrs)
    return GroupingPlan(tuple(_pair(snrs, ids, i, n - 1 - i) for i in range(n // 2)))


def snr_ordered_pairing(snrs: Sequence[float], ids=None) -> GroupingPlan:
    """Adjacent devices in SNR order: (1,2), (3,4), ..."""
    _check_even_sorted(snrs)
    ids = _as_ids(snrs, ids)
    return GroupingPlan(tuple(_pair(snrs, ids, i, i + 1) for i in range(0, len(snrs), 2)))


def near_optimal_subsets(snrs: Sequence[float]) -> tuple[list[list[int]], list[int]]:
    """Peel small-deviation subsets off the top of the SNR range.

    Returns ``(subsets, remainder)`` as lists of positions into ``snrs``,
    each in ascending SNR order. Every subset has even size.
    """
    remaining = list(range(len(snrs)))
    subsets: list[list[int]] = []
    while remaining:
        top = max(snrs[i] for i in remaining)
        lower = (-1.0 + math.sqrt(1.0 + 4.0 * top)) / 2.0
        sub = [i for i in remaining if lower <= snrs[i] <= top]
        if len(sub) % 2:
            # weakest member goes back to the remaining set
            sub.remove(min(sub, key=lambda i: (snrs[i], i)))
        if not sub:
            break
        subsets.append(sub)
        taken = set(sub)
        remaining = [i for i in remaining if i not in taken]
    return subsets, remaining


def near_optimal_pairing(snrs: Sequence[float], ids=None) -> GroupingPlan:
    """SNR-balanced pairing inside each peeled subset, SNR-ordered on the rest."""
    _check_even_sorted(snrs)
    ids = _as_ids(snrs, ids)
    subsets, rest = near_optimal_subsets(snrs)
    groups: list[DeviceGroup] = []
    for sub in subsets:
        groups.extend(snr_balanced_pairing([snrs[i] for i in sub], [ids[i] for i in sub]).groups)
    if rest:
        groups.extend(snr_ordered_pairing([snrs[i] for i in rest], [ids[i] for i in rest]).groups)
    return GroupingPlan(tuple(groups))


def _matchings(items: list[int]):
    # yields matchings in lexicographic order of their sorted pair lists
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for k, partner in enumerate(rest):
        for tail in _matchings(rest[:k] + rest[k + 1:]):
            yield [(first, partner)] + tail


def count_perfect_matchings(n: int) -> int:
    return math.prod(range(n - 1, 0, -2)) if n else 1


def exhaustive_pairing(snrs: Sequence[float], payload_bits: float = 1.0, ids=None) -> tuple[GroupingPlan, float]:
    """Best pairing over all (N-1)!! perfect matchings.

    Ties go to the lexicographically smallest sorted pair list (by position).
    """
    n = len(snrs)
    if n % 2:
        raise ValueError(f"pairing needs an even number of devices, got {n}")
    if n > EXHAUSTIVE_MAX_N:
        raise CapacityError(f"exhaustive pairing capped at N <= {EXHAUSTIVE_MAX_N}, got {n}")
    if n == 0:
        raise ValueError("no devices")
    ids = _as_ids(snrs, ids)
    cost = {}
    for i in range(n):
        for j in range(i + 1, n):
            cost[i, j] = min_latency_group(DeviceGroup((ids[i], ids[j]), (snrs[i], snrs[j])), payload_bits)[1]
    best, best_m = math.inf, None
    for m in _matchings(list(range(n))):
        f = sum(cost[p] for p in m)
        if f < best:
            best, best_m = f, m
    plan = GroupingPlan(tuple(_pair(snrs, ids, i, j) for i, j in best_m))
    return plan, total_uplink_latency(plan, payload_bits)


def random_pairing(snrs: Sequence[float], seed: int, ids=None) -> GroupingPlan:
    """Uniformly random perfect matching (random permutation, adjacent pairs)."""
    n = len(snrs)
    if n % 2:
        raise ValueError(f"pairing needs an even number of devices, got {n}")
    ids = _as_ids(snrs, ids)
    perm = np.random.default_rng(seed).permutation(n)
    groups = []
    for a, b in zip(perm[0::2], perm[1::2]):
        i, j = sorted((int(a), int(b)), key=lambda k: (snrs[k], k))
        groups.append(_pair(snrs, ids, i, j))
    return GroupingPlan(tuple(groups))


ALGORITHMS: dict[str, Callable[..., GroupingPlan]] = {
    "balanced": snr_balanced_pairing,
    "ordered": snr_ordered_pairing,
    "near_optimal": near_optimal_pairing,
}


def pair_devices(algorithm: str, snrs: Sequence[float], ids=None, *, seed: int = 0,
                 payload_bits: float = 1.0) -> GroupingPlan:
    """Dispatch by algorithm name (balanced, ordered, near_optimal, exhaustive, random)."""
    if algorithm in ALGORITHMS:
        return ALGORITHMS[algorithm](snrs, ids)
    if algorithm == "exhaustive":
        return exhaustive_pairing(snrs, payload_bits, ids)[0]
    if algorithm == "random":
        return random_pairing(snrs, seed, ids)
    raise ValueError(f"unknown algorithm {algorithm!r}")
