"""Uplink latency vs. number of devices for each pairing strategy, in both SNR bands.

Usage: python scripts/pairing_sweep.py [--out-dir results] [--replications R]
"""

import argparse
import dataclasses
from pathlib import Path

from splitmac.harness import emit_csv, load_spec, run_sweep, summarize

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out-dir", default="results")
    ap.add_argument("--replications", type=int)
    args = ap.parse_args()
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)

    for band in ("low", "high"):
        spec = load_spec(CONFIGS / f"pairing_{band}.json")
        if args.replications:
            spec = dataclasses.replace(spec, replications=args.replications)
        result = run_sweep(spec)
        emit_csv(result, out / f"pairing_{band}.csv")
        lo, hi = spec.snr_override.range_db
        means = {(r["sweep_point"], r["algorithm"]): r["uplink_mean"] for r in summarize(result)}
        print(f"\nSNR uniform on [{lo:g}, {hi:g}] dB, mean uplink latency (s), {spec.replications} reps")
        print(f"{'N':>4} " + " ".join(f"{a:>13}" for a in spec.algorithms) + "   near/opt-1")
        for n in spec.n_devices:
            cells = " ".join(f"{means[(n, a)]:>13.5f}" for a in spec.algorithms)
            gap = means[(n, "near_optimal")] / means[(n, "exhaustive")] - 1
            print(f"{n:>4} {cells}   {100 * gap:8.3f}%")


if __name__ == "__main__":
    main()
