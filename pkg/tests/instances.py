"""Random instance generators shared by the tests."""

import numpy as np

MARGIN = 1e-6


def log_uniform(rng, lo, hi, size=None):
    return 10.0 ** rng.uniform(np.log10(lo), np.log10(hi), size)


def small_deviation_snrs(rng, n):
    """Ascending SNRs with max <= (1 + min) * min * (1 - MARGIN)."""
    lo = float(log_uniform(rng, 0.05, 100.0))
    top = lo + rng.uniform() * ((1.0 + lo) * lo * (1.0 - MARGIN) - lo)
    mid = rng.uniform(lo, top, n - 2)
    return sorted([lo, top, *map(float, mid)])


def large_deviation_snrs(rng, n):
    """Ascending SNRs with snr[i+1] >= (1 + snr[i]) * snr[i] * (1 + MARGIN)."""
    s = [float(log_uniform(rng, 1e-4, 1e-2))]
    for _ in range(n - 1):
        s.append((1.0 + s[-1]) * s[-1] * (1.0 + MARGIN) * (1.0 + rng.uniform()))
    return s


def snrs_db_uniform(rng, n, lo_db, hi_db):
    return sorted(float(x) for x in 10.0 ** (rng.uniform(lo_db, hi_db, n) / 10.0))
