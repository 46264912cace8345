"""Uplink multiple-access capacity regions and min-max latency rate allocation.

Everything here is bandwidth-free: rates are spectral efficiencies
(bits/s/Hz) and latencies are ``payload / rate`` in bit-seconds-per-bit-Hz.
Divide by the uplink bandwidth to get seconds.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

CAPACITY_TOL = 1e-12
BRUTE_FORCE_MAX_L = 12


@dataclass(frozen=True)
class DeviceGroup:
    """Co-scheduled devices. ``snrs`` are linear uplink SNRs aligned with ``member_ids``."""

    member_ids: tuple[int, ...]
    snrs: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "member_ids", tuple(int(i) for i in self.member_ids))
        object.__setattr__(self, "snrs", tuple(float(s) for s in self.snrs))
        if not self.member_ids:
            raise ValueError("group must be nonempty")
        if len(self.member_ids) != len(self.snrs):
            raise ValueError("member_ids and snrs differ in length")
        if len(set(self.member_ids)) != len(self.member_ids):
            raise ValueError(f"duplicate ids in group {self.member_ids}")
        if not all(s > 0 for s in self.snrs):
            raise ValueError(f"group {self.member_ids}: SNRs must be > 0, got {self.snrs}")

    def __len__(self):
        return len(self.member_ids)

    @classmethod
    def of(cls, snrs, ids=None) -> "DeviceGroup":
        snrs = tuple(snrs)
        if ids is None:
            ids = range(len(snrs))
        return cls(tuple(ids), snrs)

    def ascending(self) -> list[tuple[float, int]]:
        """(snr, id) pairs sorted by SNR, ties by id."""
        return sorted(zip(self.snrs, self.member_ids))


@dataclass(frozen=True)
class RateAllocation:
    rates_bits_per_hz: tuple[float, ...]
    latency_normalized: float  # 1 / rate, i.e. latency for a 1-bit payload at 1 Hz
    binding_size: int  # size m of the weakest-m subset whose constraint is tight


def capacity_region_contains(group: DeviceGroup, rates, tol: float = CAPACITY_TOL) -> bool:
    """True iff every subset-sum constraint of the group's capacity region holds."""
    rates = [float(r) for r in rates]
    if len(rates) != len(group):
        raise ValueError(f"expected {len(group)} rates, got {len(rates)}")
    idx = range(len(group))
    for m in range(1, len(group) + 1):
        for sub in itertools.combinations(idx, m):
            lhs = sum(rates[k] for k in sub)
            rhs = math.log2(1.0 + sum(group.snrs[k] for k in sub))
            if lhs > rhs + tol:
                return False
    return True


def _prefix_ratios(group: DeviceGroup) -> list[float]:
    # ratio m / log2(1 + sum of the m weakest SNRs), m = 1..L
    out = []
    acc = 0.0
    for m, (s, _) in enumerate(group.ascending(), start=1):
        acc = s if m == 1 else acc + s
        out.append(m / math.log2(1.0 + acc))
    return out


def min_latency_group(group: DeviceGroup, payload_bits: float = 1.0) -> tuple[RateAllocation, float]:
    """Min-max uplink latency of a group and its equal-rate allocation.

    For a fixed subset size m the tightest constraint comes from the m
    weakest devices, so only the L prefixes of the SNR-ascending order are
    checked (see :func:`min_latency_group_bruteforce` for the full version).
    """
    if not payload_bits > 0:
        raise ValueError(f"payload must be positive, got {payload_bits}")
    ratios = _prefix_ratios(group)
    worst = max(ratios)
    m = ratios.index(worst) + 1
    rate = 1.0 / worst
    alloc = RateAllocation((rate,) * len(group), worst, m)
    return alloc, payload_bits * worst


def min_latency_group_bruteforce(group: DeviceGroup, payload_bits: float = 1.0) -> tuple[float, tuple[int, ...]]:
    """Latency from every nonempty subset constraint; returns (tau, binding member ids)."""
    if len(group) > BRUTE_FORCE_MAX_L:
        raise ValueError(f"brute force limited to L <= {BRUTE_FORCE_MAX_L}")
    best, best_sub = -math.inf, ()
    idx = range(len(group))
    for m in range(1, len(group) + 1):
        for sub in itertools.combinations(idx, m):
            r = m / math.log2(1.0 + sum(group.snrs[k] for k in sub))
            if r > best:
                best, best_sub = r, tuple(group.member_ids[k] for k in sub)
    return payload_bits * best, best_sub


def _check_snr(*snrs):
    for s in snrs:
        if not s > 0:
            raise ValueError(f"SNR must be positive, got {s}")


def optimal_rates_pair(snr1: float, snr2: float) -> tuple[float, float]:
    """Closed-form min-max rate pair for two devices."""
    _check_snr(snr1, snr2)
    half_sum = math.log2(1.0 + snr1 + snr2) / 2.0
    return min(half_sum, math.log2(1.0 + snr1)), min(half_sum, math.log2(1.0 + snr2))


def min_latency_pair(snr1: float, snr2: float, payload_bits: float = 1.0) -> float:
    _check_snr(snr1, snr2)
    lo, hi = min(snr1, snr2), max(snr1, snr2)
    return payload_bits * max(1.0 / math.log2(1.0 + lo), 2.0 / math.log2(1.0 + (lo + hi)))


def min_latency_pair_numeric(
    snr1: float, snr2: float, payload_bits: float = 1.0, grid_n: int = 100_000, rounds: int = 2
) -> float:
    """Grid search of max(B/R1, B/R2) along the capacity-region boundary.

    The boundary is parameterised by R1 in (0, C1] with R2 = min(C2, Csum - R1).
    Each round re-grids the bracket around the previous best point.
    """
    if grid_n < 1000:
        raise ValueError("grid_n must be >= 1000")
    _check_snr(snr1, snr2)
    c1 = np.log2(1.0 + snr1)
    c2 = np.log2(1.0 + snr2)
    cs = np.log2(1.0 + snr1 + snr2)
    lo, hi = c1 * 1e-9, c1
    best = math.inf
    for _ in range(rounds):
        r1 = np.linspace(lo, hi, grid_n)
        r2 = np.minimum(c2, cs - r1)
        obj = payload_bits * np.maximum(1.0 / r1, 1.0 / r2)
        i = int(np.argmin(obj))
        best = min(best, float(obj[i]))
        lo, hi = r1[max(i - 1, 0)], r1[min(i + 1, grid_n - 1)]
    return best
