"""Device deployment and uplink/downlink link budgets.

Random draws come from ``numpy.random.default_rng(seed)`` (PCG64) and are
consumed in a fixed order so runs are reproducible:

1. ``n`` distances, uniform on ``[cell_radius_min_km, cell_radius_max_km]``
2. ``n`` uplink shadowing offsets, ``N(0, shadowing_sigma_db)`` in dB
3. ``n`` downlink shadowing offsets, same distribution
4. (optional, :func:`place_devices_with_snr_range`) ``n`` uplink SNRs,
   uniform in dB over the requested range
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Literal

import numpy as np

Direction = Literal["uplink", "downlink"]


@dataclass(frozen=True)
class RadioParams:
    uplink_tx_power_dbm: float = 30.0
    downlink_tx_power_dbm: float = 42.0
    bandwidth_ul_hz: float = 20e6
    bandwidth_dl_hz: float = 20e6
    noise_psd_dbm_hz: float = -174.0
    shadowing_sigma_db: float = 4.0
    cell_radius_min_km: float = 0.01
    cell_radius_max_km: float = 0.5
    device_cpu_hz: float = 1e9

    def __post_init__(self):
        problems = self.problems()
        if problems:
            raise ValueError("; ".join(problems))

    def problems(self) -> list[str]:
        out = []
        if not self.bandwidth_ul_hz > 0:
            out.append("bandwidth_ul_hz must be > 0")
        if not self.bandwidth_dl_hz > 0:
            out.append("bandwidth_dl_hz must be > 0")
        if not 0 < self.cell_radius_min_km <= self.cell_radius_max_km:
            out.append("need 0 < cell_radius_min_km <= cell_radius_max_km")
        if not self.shadowing_sigma_db >= 0:
            out.append("shadowing_sigma_db must be >= 0")
        if not self.device_cpu_hz > 0:
            out.append("device_cpu_hz must be > 0")
        return out


@dataclass(frozen=True)
class DeviceChannel:
    device_id: int
    distance_km: float
    snr_ul_linear: float
    snr_dl_linear: float
    cpu_hz: float = 1e9

    def __post_init__(self):
        if not (self.snr_ul_linear > 0 and self.snr_dl_linear > 0):
            raise ValueError(f"device {self.device_id}: SNRs must be > 0")
        if not self.cpu_hz > 0:
            raise ValueError(f"device {self.device_id}: cpu_hz must be > 0")


def path_loss_db(distance_km: float, direction: Direction = "uplink") -> float:
    """Path loss in dB at ``distance_km`` (km)."""
    if not distance_km > 0:
        raise ValueError(f"distance must be positive, got {distance_km}")
    if direction == "uplink":
        return 127.0 + 30.0 * math.log10(distance_km)
    if direction == "downlink":
        return 128.1 + 37.6 * math.log10(distance_km)
    raise ValueError(f"unknown direction {direction!r}")


def noise_power_dbm(noise_psd_dbm_hz: float, bandwidth_hz: float) -> float:
    if not bandwidth_hz > 0:
        raise ValueError("bandwidth must be positive")
    return noise_psd_dbm_hz + 10.0 * math.log10(bandwidth_hz)


def snr_from_link_budget(
    tx_power_dbm: float,
    path_loss_db: float,
    shadowing_db: float,
    noise_psd_dbm_hz: float,
    bandwidth_hz: float,
) -> float:
    """Linear SNR; ``shadowing_db`` is an extra loss (positive = weaker)."""
    snr_db = tx_power_dbm - path_loss_db - shadowing_db - noise_power_dbm(noise_psd_dbm_hz, bandwidth_hz)
    return 10.0 ** (snr_db / 10.0)


def rate_bps(snr_linear: float, bandwidth_hz: float) -> float:
    """Shannon rate ``W log2(1 + SNR)`` in bits/s."""
    if not snr_linear > 0:
        raise ValueError(f"SNR must be positive, got {snr_linear}")
    if not bandwidth_hz > 0:
        raise ValueError(f"bandwidth must be positive, got {bandwidth_hz}")
    return bandwidth_hz * math.log2(1.0 + snr_linear)


def _draw_geometry(n: int, params: RadioParams, rng: np.random.Generator):
    d = rng.uniform(params.cell_radius_min_km, params.cell_radius_max_km, size=n)
    sh_ul = rng.normal(0.0, params.shadowing_sigma_db, size=n)
    sh_dl = rng.normal(0.0, params.shadowing_sigma_db, size=n)
    return d, sh_ul, sh_dl


def _relabel(raw: list[tuple[float, float, float]], cpu_hz: float) -> list[DeviceChannel]:
    # stable sort keeps generation order among equal uplink SNRs
    order = sorted(range(len(raw)), key=lambda i: raw[i][1])
    return [
        DeviceChannel(device_id=new, distance_km=raw[old][0], snr_ul_linear=raw[old][1],
                      snr_dl_linear=raw[old][2], cpu_hz=cpu_hz)
        for new, old in enumerate(order)
    ]


def place_devices(n: int, params: RadioParams, seed: int) -> list[DeviceChannel]:
    """Drop ``n`` devices in the cell and compute their SNRs.

    Device ids are assigned after generation in ascending uplink SNR order,
    so ``devices[i].device_id == i`` and uplink SNRs are non-decreasing.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    rng = np.random.default_rng(seed)
    d, sh_ul, sh_dl = _draw_geometry(n, params, rng)
    raw = []
    for k in range(n):
        dk = float(d[k])
        ul = snr_from_link_budget(params.uplink_tx_power_dbm, path_loss_db(dk, "uplink"),
                                  float(sh_ul[k]), params.noise_psd_dbm_hz, params.bandwidth_ul_hz)
        dl = snr_from_link_budget(params.downlink_tx_power_dbm, path_loss_db(dk, "downlink"),
                                  float(sh_dl[k]), params.noise_psd_dbm_hz, params.bandwidth_dl_hz)
        raw.append((dk, ul, dl))
    return _relabel(raw, params.device_cpu_hz)


def place_devices_with_snr_range(
    n: int, params: RadioParams, seed: int, snr_db_range: tuple[float, float]
) -> list[DeviceChannel]:
    """Like :func:`place_devices`, but uplink SNRs are drawn uniformly in dB.

    Geometry (distance, downlink SNR) is still drawn first from the same
    stream; the uplink SNR draws come last.
    """
    lo, hi = snr_db_range
    if not lo <= hi:
        raise ValueError(f"bad SNR range {snr_db_range}")
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    rng = np.random.default_rng(seed)
    d, _, sh_dl = _draw_geometry(n, params, rng)
    ul_db = rng.uniform(lo, hi, size=n)
    raw = []
    for k in range(n):
        dk = float(d[k])
        dl = snr_from_link_budget(params.downlink_tx_power_dbm, path_loss_db(dk, "downlink"),
                                  float(sh_dl[k]), params.noise_psd_dbm_hz, params.bandwidth_dl_hz)
        raw.append((dk, 10.0 ** (float(ul_db[k]) / 10.0), dl))
    return _relabel(raw, params.device_cpu_hz)


def devices_from_snrs(
    snrs_ul, snrs_dl=None, cpu_hz: float = 1e9, distance_km: float = float("nan")
) -> list[DeviceChannel]:
    """Build devices from explicit SNR lists (relabelled by uplink SNR)."""
    snrs_ul = [float(s) for s in snrs_ul]
    if snrs_dl is None:
        snrs_dl = snrs_ul
    raw = [(distance_km, u, float(v)) for u, v in zip(snrs_ul, snrs_dl, strict=True)]
    return _relabel(raw, cpu_hz)


def with_cpu(devices: list[DeviceChannel], cpu_hz) -> list[DeviceChannel]:
    if np.isscalar(cpu_hz):
        cpu_hz = [cpu_hz] * len(devices)
    return [replace(d, cpu_hz=float(f)) for d, f in zip(devices, cpu_hz, strict=True)]
