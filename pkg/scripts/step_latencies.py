"""Per-round step latencies for N=20, K=4 with the derived MNIST profile.

Usage: python scripts/step_latencies.py [--out results/step_latencies.csv]
"""

import argparse
from pathlib import Path

import numpy as np

from splitmac.harness import emit_csv, load_spec, run_sweep

CONFIG = Path(__file__).resolve().parent.parent / "configs" / "step_latencies.json"


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="results/step_latencies.csv")
    args = ap.parse_args()
    spec = load_spec(CONFIG)
    result = run_sweep(spec)
    Path(args.out).parent.mkdir(parents=True, exist_ok=True)
    emit_csv(result, args.out)

    print(f"B = {spec.model.smashed_bits_per_batch:.0f} bits, B_d = {spec.model.device_model_bits:.0f} bits")
    print(f"{'step':>5} {'mean (s)':>10} {'std (s)':>10}")
    for step in ("md", "dme", "sdt", "smp", "igt", "dmp", "dmt"):
        v = np.array([r.steps[step] for r in result.rows])
        print(f"{step.upper():>5} {v.mean():>10.4f} {v.std(ddof=1):>10.4f}")
    viol = np.array([r.violations for r in result.rows])
    print(f"rounds with a pipeline violation: {(viol > 0).sum()}/{len(viol)}")


if __name__ == "__main__":
    main()
