"""Total round latency of SplitMAC, cluster FDMA and vanilla split learning vs. N.

Usage: python scripts/protocols.py [--out results/protocols.csv]
"""

import argparse
from pathlib import Path

from splitmac.harness import emit_csv, load_spec, run_sweep, summarize

CONFIG = Path(__file__).resolve().parent.parent / "configs" / "protocols.json"


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="results/protocols.csv")
    args = ap.parse_args()
    spec = load_spec(CONFIG)
    result = run_sweep(spec)
    Path(args.out).parent.mkdir(parents=True, exist_ok=True)
    emit_csv(result, args.out)

    means = {(r["sweep_point"], r["protocol"]): r["total_mean"] for r in summarize(result)}
    print(f"{'N':>4} " + " ".join(f"{p:>13}" for p in spec.protocols))
    for n in spec.n_devices:
        print(f"{n:>4} " + " ".join(f"{means[(n, p)]:>13.3f}" for p in spec.protocols))


if __name__ == "__main__":
    main()
