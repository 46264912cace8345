"""Experiment configuration, seeded sweeps and CSV/summary output.

Every (sweep point, replication) pair gets its own seed,
``derive_seed(seed, n_devices, replication)``: the first 8 bytes
(little-endian) of ``sha256(f"{seed}:{n_devices}:{replication}")``. Random
pairing uses ``derive_seed(seed, n_devices, replication, "random")``. Adding
sweep points or replications therefore never changes existing rows.
"""

from __future__ import annotations

import csv
import dataclasses
import hashlib
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from splitmac.channel import (
    DeviceChannel,
    RadioParams,
    devices_from_snrs,
    place_devices,
    place_devices_with_snr_range,
)
from splitmac.latency import (
    ClusterPlan,
    LatencyBreakdown,
    cluster_fdma_round_latency,
    pipeline_violations,
    splitmac_round_latency,
    vanilla_sl_round_latency,
)
from splitmac.model import ComputeProfile, LayerSpecError, ModelProfile, derive_model_profile
from splitmac.pairing import EXHAUSTIVE_MAX_N, pair_devices

ALGORITHM_NAMES = ("balanced", "ordered", "near_optimal", "exhaustive", "random")
PROTOCOL_NAMES = ("splitmac", "vanilla", "cluster_fdma")
CSV_HEADER = ["sweep_point", "replication", "algorithm", "protocol",
              "uplink_latency_s", "total_latency_s", "violations"]


class ConfigError(ValueError):
    """Invalid experiment configuration; ``problems`` lists every issue found."""

    def __init__(self, problems: list[str]):
        self.problems = list(problems)
        super().__init__("invalid configuration:\n  " + "\n  ".join(self.problems))


@dataclass(frozen=True)
class SnrOverride:
    range_db: tuple[float, float] | None = None
    values: tuple[float, ...] | None = None

    def to_dict(self) -> dict:
        if self.range_db is not None:
            return {"range_db": list(self.range_db)}
        return {"values": list(self.values)}


@dataclass(frozen=True)
class ExperimentSpec:
    radio: RadioParams = field(default_factory=RadioParams)
    model: ModelProfile = field(default_factory=derive_model_profile)
    compute: ComputeProfile = field(default_factory=ComputeProfile)
    n_devices: tuple[int, ...] = (20,)
    group_size: int = 2
    cluster_size_k: int | None = 4
    q: int = 1
    algorithms: tuple[str, ...] = ("near_optimal",)
    protocols: tuple[str, ...] = ("splitmac",)
    replications: int = 100
    seed: int = 0
    snr_override: SnrOverride | None = None
    md_scope: str = "cluster"

    def to_dict(self) -> dict:
        """Fully resolved configuration; loading it back gives the same spec."""
        return {
            "radio": dataclasses.asdict(self.radio),
            "model": dataclasses.asdict(self.model),
            "compute": dataclasses.asdict(self.compute),
            "n_devices": list(self.n_devices),
            "group_size": self.group_size,
            "cluster_size_k": self.cluster_size_k,
            "q": self.q,
            "algorithm": list(self.algorithms),
            "protocol": list(self.protocols),
            "replications": self.replications,
            "seed": self.seed,
            "snr_override": None if self.snr_override is None else self.snr_override.to_dict(),
            "md_scope": self.md_scope,
        }

    @property
    def spec_hash(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()

    def with_seed(self, seed: int) -> "ExperimentSpec":
        return dataclasses.replace(self, seed=int(seed))


TOP_KEYS = {f.name for f in dataclasses.fields(ExperimentSpec)} - {"algorithms", "protocols"} | {"algorithm", "protocol"}
MODEL_LAYER_KEYS = {"layers", "cut_layer", "batch_size", "bits_per_value", "input_shape"}


def _sub(cls, raw, key: str, problems: list[str]):
    if raw is None:
        return cls()
    if not isinstance(raw, dict):
        problems.append(f"{key}: expected an object")
        return None
    known = {f.name for f in dataclasses.fields(cls)}
    unknown = sorted(set(raw) - known)
    if unknown:
        problems.append(f"{key}: unknown key(s) {unknown}")
        return None
    try:
        return cls(**raw)
    except (TypeError, ValueError) as e:
        problems.append(f"{key}: {e}")
        return None


def _model(raw, problems: list[str]) -> ModelProfile | None:
    if raw is None:
        return derive_model_profile()
    if not isinstance(raw, dict):
        problems.append("model: expected an object")
        return None
    if set(raw) & (MODEL_LAYER_KEYS - {"batch_size"}) or not set(raw) - {"batch_size"}:
        unknown = sorted(set(raw) - MODEL_LAYER_KEYS)
        if unknown:
            problems.append(f"model: unknown key(s) {unknown}")
            return None
        try:
            return derive_model_profile(
                raw.get("layers", "mnist_lenet"),
                cut_layer=int(raw.get("cut_layer", 3)),
                batch=int(raw.get("batch_size", 256)),
                bits_per_value=int(raw.get("bits_per_value", 32)),
                input_shape=raw.get("input_shape"),
            )
        except (LayerSpecError, TypeError, ValueError) as e:
            problems.append(f"model: {e}")
            return None
    return _sub(ModelProfile, raw, "model", problems)


def _names(raw, key: str, allowed, default, problems) -> tuple[str, ...]:
    if raw is None:
        return default
    vals = [raw] if isinstance(raw, str) else raw
    if not isinstance(vals, list) or not vals:
        problems.append(f"{key}: expected a name or a nonempty list of names")
        return default
    bad = [v for v in vals if v not in allowed]
    if bad:
        problems.append(f"{key}: unknown value(s) {bad}; choose from {list(allowed)}")
    return tuple(dict.fromkeys(vals))


def _int(raw, key, default, problems, minimum=None):
    if raw is None:
        return default
    if isinstance(raw, bool) or not isinstance(raw, int):
        problems.append(f"{key}: expected an integer, got {raw!r}")
        return default
    if minimum is not None and raw < minimum:
        problems.append(f"{key}: must be >= {minimum}, got {raw}")
    return raw


def spec_from_dict(data: Any) -> ExperimentSpec:
    """Validate a parsed config object; omitted fields take their defaults."""
    if not isinstance(data, dict):
        raise ConfigError(["top level: expected a JSON object"])
    problems: list[str] = []
    unknown = sorted(set(data) - TOP_KEYS)
    if unknown:
        problems.append(f"unknown key(s) {unknown}")

    radio = _sub(RadioParams, data.get("radio"), "radio", problems)
    compute = _sub(ComputeProfile, data.get("compute"), "compute", problems)
    model = _model(data.get("model"), problems)

    n_raw = data.get("n_devices", 20)
    n_list = [n_raw] if not isinstance(n_raw, list) else n_raw
    if not n_list or not all(isinstance(n, int) and not isinstance(n, bool) and n >= 1 for n in n_list):
        problems.append(f"n_devices: expected a positive integer or nonempty list of them, got {n_raw!r}")
        n_list = [20]
    n_devices = tuple(dict.fromkeys(n_list))

    group_size = _int(data.get("group_size"), "group_size", 2, problems)
    if group_size != 2:
        problems.append(f"group_size: only pairing (2) is supported, got {group_size}")
    k = data.get("cluster_size_k", 4)
    if k is not None:
        k = _int(k, "cluster_size_k", 4, problems, minimum=1)
    q = _int(data.get("q"), "q", 1, problems, minimum=1)
    reps = _int(data.get("replications"), "replications", 100, problems, minimum=1)
    seed = _int(data.get("seed"), "seed", 0, problems)
    algorithms = _names(data.get("algorithm"), "algorithm", ALGORITHM_NAMES, ("near_optimal",), problems)
    protocols = _names(data.get("protocol"), "protocol", PROTOCOL_NAMES, ("splitmac",), problems)
    md_scope = data.get("md_scope", "cluster")
    if md_scope not in ("cluster", "all"):
        problems.append(f"md_scope: expected 'cluster' or 'all', got {md_scope!r}")

    override = None
    raw_ov = data.get("snr_override")
    if raw_ov is not None:
        if not isinstance(raw_ov, dict) or len(raw_ov) != 1 or not set(raw_ov) <= {"range_db", "values"}:
            problems.append("snr_override: expected {\"range_db\": [lo, hi]} or {\"values\": [...]}")
        elif "range_db" in raw_ov:
            r = raw_ov["range_db"]
            if not (isinstance(r, list) and len(r) == 2 and all(isinstance(x, (int, float)) for x in r) and r[0] <= r[1]):
                problems.append(f"snr_override.range_db: expected [lo, hi] with lo <= hi, got {r!r}")
            else:
                override = SnrOverride(range_db=(float(r[0]), float(r[1])))
        else:
            v = raw_ov["values"]
            if not (isinstance(v, list) and v and all(isinstance(x, (int, float)) and x > 0 for x in v)):
                problems.append("snr_override.values: expected a nonempty list of positive linear SNRs")
            else:
                override = SnrOverride(values=tuple(float(x) for x in v))
                if any(n != len(v) for n in n_devices):
                    problems.append("snr_override.values: length must equal every n_devices sweep point")

    for n in n_devices:
        if n % group_size:
            problems.append(f"n_devices={n} is not a multiple of group_size={group_size}")
        elif k is not None and (k % group_size or n % k):
            problems.append(f"n_devices={n} cannot be split into clusters of K={k} (K must divide N and be a multiple of L)")
    if k is not None and k >= group_size and not k % group_size and q > k // group_size:
        problems.append(f"q={q} exceeds groups per cluster C={k // group_size}")
    if "exhaustive" in algorithms and max(n_devices) > EXHAUSTIVE_MAX_N:
        problems.append(f"algorithm 'exhaustive' allowed only for n_devices <= {EXHAUSTIVE_MAX_N}")

    if problems:
        raise ConfigError(problems)
    return ExperimentSpec(radio=radio, model=model, compute=compute, n_devices=n_devices,
                          group_size=group_size, cluster_size_k=k, q=q, algorithms=algorithms,
                          protocols=protocols, replications=reps, seed=seed, snr_override=override,
                          md_scope=md_scope)


def load_spec(path) -> ExperimentSpec:
    text = Path(path).read_text(encoding="utf-8")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError([f"{path}:{e.lineno}:{e.colno}: {e.msg}"]) from None
    return spec_from_dict(data)


def dump_spec(spec: ExperimentSpec, path) -> None:
    Path(path).write_text(json.dumps(spec.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8")


def derive_seed(seed: int, *parts) -> int:
    key = ":".join(str(p) for p in (seed, *parts))
    return int.from_bytes(hashlib.sha256(key.encode()).digest()[:8], "little")


def make_devices(spec: ExperimentSpec, n: int, seed: int) -> list[DeviceChannel]:
    ov = spec.snr_override
    if ov is None:
        return place_devices(n, spec.radio, seed)
    if ov.range_db is not None:
        return place_devices_with_snr_range(n, spec.radio, seed, ov.range_db)
    geo = place_devices(n, spec.radio, seed)
    return devices_from_snrs(ov.values, [d.snr_dl_linear for d in geo], spec.radio.device_cpu_hz)


@dataclass(frozen=True)
class Row:
    sweep_point: int
    replication: int
    algorithm: str
    protocol: str
    uplink_latency_s: float
    total_latency_s: float
    violations: int
    steps: dict = field(default_factory=dict, compare=False)
    error: str | None = field(default=None, compare=False)

    @property
    def key(self):
        return (self.sweep_point, self.replication, self.algorithm, self.protocol)


@dataclass(frozen=True)
class RunResult:
    spec_hash: str
    rows: tuple[Row, ...]


def evaluate(spec: ExperimentSpec, devices: list[DeviceChannel], algorithm: str, protocol: str,
             pairing_seed: int = 0) -> LatencyBreakdown:
    """Pair the devices with ``algorithm`` and time one round under ``protocol``."""
    snrs = [d.snr_ul_linear for d in devices]
    ids = [d.device_id for d in devices]
    payload = spec.model.smashed_bits_per_batch + spec.model.device_model_bits
    plan = pair_devices(algorithm, snrs, ids, seed=pairing_seed, payload_bits=payload)
    if protocol == "vanilla":
        return vanilla_sl_round_latency(devices, spec.model, spec.compute, spec.radio)
    cplan = ClusterPlan.from_grouping(plan, spec.cluster_size_k, spec.q)
    if protocol == "splitmac":
        return splitmac_round_latency(cplan, devices, spec.model, spec.compute, spec.radio, spec.md_scope)
    if protocol == "cluster_fdma":
        return cluster_fdma_round_latency(cplan, devices, spec.model, spec.compute, spec.radio)
    raise ValueError(f"unknown protocol {protocol!r}")


def run_sweep(spec: ExperimentSpec) -> RunResult:
    rows = []
    for n in spec.n_devices:
        for r in range(spec.replications):
            devices = make_devices(spec, n, derive_seed(spec.seed, n, r))
            pseed = derive_seed(spec.seed, n, r, "random")
            for alg in spec.algorithms:
                for proto in spec.protocols:
                    try:
                        bd = evaluate(spec, devices, alg, proto, pseed)
                    except Exception as e:  # recorded on the row, sweep continues
                        rows.append(Row(n, r, alg, proto, math.nan, math.nan, -1, {}, f"{type(e).__name__}: {e}"))
                        continue
                    viol = len(pipeline_violations(bd, spec.q, spec.group_size)) if proto == "splitmac" else 0
                    rows.append(Row(n, r, alg, proto, bd.uplink_s, bd.total_s, viol, bd.step_totals()))
    rows.sort(key=lambda row: row.key)
    return RunResult(spec.spec_hash, tuple(rows))


def _fmt(x) -> str:
    return repr(float(x)) if isinstance(x, float) else str(x)


def csv_text(result: RunResult) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for row in sorted(result.rows, key=lambda r: r.key):
        w.writerow([_fmt(getattr(row, c)) for c in CSV_HEADER])
    return buf.getvalue()


def emit_csv(result: RunResult, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(csv_text(result))


def read_csv(path) -> list[dict]:
    with open(path, encoding="utf-8", newline="") as fh:
        out = []
        for rec in csv.DictReader(fh):
            out.append({
                "sweep_point": int(rec["sweep_point"]),
                "replication": int(rec["replication"]),
                "algorithm": rec["algorithm"],
                "protocol": rec["protocol"],
                "uplink_latency_s": float(rec["uplink_latency_s"]),
                "total_latency_s": float(rec["total_latency_s"]),
                "violations": int(rec["violations"]),
            })
        return out


def summarize(result: RunResult) -> list[dict]:
    """Mean/std per (sweep_point, algorithm, protocol) over successful rows."""
    buckets: dict[tuple, list[Row]] = {}
    for row in result.rows:
        buckets.setdefault((row.sweep_point, row.algorithm, row.protocol), []).append(row)
    out = []
    for (n, alg, proto), rows in sorted(buckets.items()):
        ok = [r for r in rows if r.error is None]
        up = np.array([r.uplink_latency_s for r in ok])
        tot = np.array([r.total_latency_s for r in ok])
        rec = {
            "sweep_point": n, "algorithm": alg, "protocol": proto,
            "count": len(ok), "errors": len(rows) - len(ok),
            "uplink_mean": float(up.mean()) if ok else math.nan,
            "uplink_std": float(up.std(ddof=1)) if len(ok) > 1 else 0.0,
            "total_mean": float(tot.mean()) if ok else math.nan,
            "total_std": float(tot.std(ddof=1)) if len(ok) > 1 else 0.0,
            "violations_mean": float(np.mean([r.violations for r in ok])) if ok else math.nan,
        }
        for step in ("sdt", "smp", "igt", "dmt"):
            rec[f"{step}_mean"] = float(np.mean([r.steps[step] for r in ok])) if ok else math.nan
        out.append(rec)
    return out


def emit_summary(result: RunResult) -> str:
    cols = ["sweep_point", "algorithm", "protocol", "count", "uplink_mean", "uplink_std",
            "total_mean", "total_std", "sdt_mean", "smp_mean", "igt_mean", "dmt_mean", "violations_mean"]
    lines = [" ".join(f"{c:>14}" for c in cols)]
    for rec in summarize(result):
        cells = []
        for c in cols:
            v = rec[c]
            cells.append(f"{v:>14.6g}" if isinstance(v, float) else f"{v!s:>14}")
        lines.append(" ".join(cells))
    return "\n".join(lines) + "\n"


def check_spec(spec: ExperimentSpec) -> list[str]:
    """Pipeline-overlap report for every SplitMAC scenario in the experiment."""
    report = []
    for n in spec.n_devices:
        for r in range(spec.replications):
            devices = make_devices(spec, n, derive_seed(spec.seed, n, r))
            for alg in spec.algorithms:
                bd = evaluate(spec, devices, alg, "splitmac", derive_seed(spec.seed, n, r, "random"))
                for v in pipeline_violations(bd, spec.q, spec.group_size):
                    report.append(f"n={n} rep={r} alg={alg} cluster={v.cluster} group={v.group}: "
                                  f"SMP*QL+IGT={v.smp_plus_igt!r} > next SDT={v.next_sdt!r}")
    return report
