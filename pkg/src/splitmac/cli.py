"""Command line entry point: ``splitmac {simulate,sweep,pair,check}``.

Exit codes: 0 success, 1 validation failure, 2 runtime error.
"""

from __future__ import annotations

import argparse
import sys

from splitmac.harness import ConfigError, check_spec, emit_csv, emit_summary, load_spec, run_sweep
from splitmac.pairing import CapacityError, GroupingPlan, pair_devices
from splitmac.rates import min_latency_group

EXIT_OK, EXIT_INVALID, EXIT_RUNTIME = 0, 1, 2


def _parse_snrs(text: str) -> list[float]:
    try:
        vals = [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {text!r}") from None
    if not vals:
        raise argparse.ArgumentTypeError("no SNRs given")
    return vals


def format_plan(plan: GroupingPlan, payload_bits: float, bandwidth_hz: float) -> str:
    lines = []
    total = 0.0
    for g in plan.groups:
        tau = min_latency_group(g, payload_bits)[1] / bandwidth_hz
        total += tau
        lines.append(f"pair: {','.join(str(i) for i in g.member_ids)} tau_s={tau!r}")
    lines.append(f"total_s={total!r}")
    return "\n".join(lines) + "\n"


def cmd_pair(args) -> int:
    snrs = args.snrs
    if any(s <= 0 for s in snrs):
        print("error: SNRs must be positive (linear scale)", file=sys.stderr)
        return EXIT_INVALID
    if len(snrs) % 2:
        print(f"error: need an even number of devices, got {len(snrs)}", file=sys.stderr)
        return EXIT_INVALID
    # ids are positions in the input list
    order = sorted(range(len(snrs)), key=lambda i: (snrs[i], i))
    plan = pair_devices(args.algorithm, [snrs[i] for i in order], order, seed=args.seed,
                        payload_bits=args.payload_bits)
    sys.stdout.write(format_plan(plan, args.payload_bits, args.bandwidth_hz))
    return EXIT_OK


def cmd_simulate(args) -> int:
    spec = load_spec(args.config)
    if args.seed is not None:
        spec = spec.with_seed(args.seed)
    result = run_sweep(spec)
    if args.out:
        emit_csv(result, args.out)
    sys.stdout.write(f"spec_hash={result.spec_hash}\n")
    sys.stdout.write(emit_summary(result))
    return EXIT_OK


def cmd_sweep(args) -> int:
    spec = load_spec(args.config)
    if args.seed is not None:
        spec = spec.with_seed(args.seed)
    result = run_sweep(spec)
    emit_csv(result, args.out)
    sys.stdout.write(f"wrote {len(result.rows)} rows to {args.out} (spec_hash={result.spec_hash})\n")
    return EXIT_OK


def cmd_check(args) -> int:
    spec = load_spec(args.config)
    report = check_spec(spec)
    sys.stdout.write(f"config OK (spec_hash={spec.spec_hash})\n")
    for line in report:
        sys.stdout.write(f"violation: {line}\n")
    if report:
        sys.stdout.write(f"{len(report)} pipeline violation(s)\n")
        return EXIT_INVALID
    sys.stdout.write("pipeline assumption holds in every scenario\n")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="splitmac", description="SplitMAC latency simulator and device pairing")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="run a config and print a summary")
    s.add_argument("--config", required=True)
    s.add_argument("--seed", type=int)
    s.add_argument("--out", help="also write the per-row CSV here")
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("sweep", help="run a config and write the per-row CSV")
    s.add_argument("--config", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--seed", type=int)
    s.set_defaults(func=cmd_sweep)

    s = sub.add_parser("pair", help="pair devices given their linear uplink SNRs")
    s.add_argument("--snrs", required=True, type=_parse_snrs, help="comma-separated linear SNRs")
    s.add_argument("--algorithm", default="near_optimal",
                   choices=["balanced", "ordered", "near_optimal", "exhaustive", "random"])
    s.add_argument("--payload-bits", type=float, default=1.0)
    s.add_argument("--bandwidth-hz", type=float, default=1.0)
    s.add_argument("--seed", type=int, default=0, help="seed for --algorithm random")
    s.set_defaults(func=cmd_pair)

    s = sub.add_parser("check", help="validate a config and test the pipeline-overlap assumption")
    s.add_argument("--config", required=True)
    s.set_defaults(func=cmd_check)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_INVALID if e.code else EXIT_OK
    try:
        return args.func(args)
    except (ConfigError, CapacityError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INVALID
    except Exception as e:
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
