import dataclasses
import json
import math

import numpy as np
import pytest

from splitmac.channel import RadioParams
from splitmac.harness import (
    CSV_HEADER,
    ConfigError,
    ExperimentSpec,
    RunResult,
    csv_text,
    derive_seed,
    dump_spec,
    emit_csv,
    emit_summary,
    load_spec,
    make_devices,
    read_csv,
    run_sweep,
    spec_from_dict,
    summarize,
)
from splitmac.model import derive_model_profile


def write(tmp_path, obj, name="cfg.json"):
    p = tmp_path / name
    p.write_text(obj if isinstance(obj, str) else json.dumps(obj), encoding="utf-8")
    return p


def test_minimal_config_takes_defaults(tmp_path):
    spec = load_spec(write(tmp_path, {"n_devices": 20}))
    assert spec == ExperimentSpec()
    assert spec.radio.bandwidth_ul_hz == 20e6
    assert spec.radio.uplink_tx_power_dbm == 30 and spec.radio.downlink_tx_power_dbm == 42
    assert spec.model.smashed_bits_per_batch == 51_380_224
    assert spec.compute.server_cpu_hz == 100e9


def test_exhaustive_cap_rejected():
    with pytest.raises(ConfigError) as e:
        spec_from_dict({"algorithm": "exhaustive", "n_devices": 20})
    assert any("exhaustive" in p for p in e.value.problems)
    spec_from_dict({"algorithm": "exhaustive", "n_devices": 12})


def test_round_trip_hash(tmp_path):
    spec = spec_from_dict({"n_devices": [4, 8], "algorithm": ["balanced", "random"],
                           "protocol": ["splitmac", "vanilla"], "seed": 3,
                           "snr_override": {"range_db": [0, 10]}, "cluster_size_k": None})
    path = tmp_path / "resolved.json"
    dump_spec(spec, path)
    again = load_spec(path)
    assert again == spec
    assert again.spec_hash == spec.spec_hash


def test_layer_form_model():
    spec = spec_from_dict({"model": {"layers": "mnist_lenet", "cut_layer": 3, "batch_size": 128}})
    assert spec.model == derive_model_profile(cut_layer=3, batch=128)
    assert spec_from_dict({"model": {"batch_size": 64}}).model == derive_model_profile(batch=64)


def test_unknown_keys_and_collected_problems():
    with pytest.raises(ConfigError) as e:
        spec_from_dict({"n_devices": 6, "cluster_size_k": 4, "replications": 0, "colour": 1,
                        "radio": {"bandwith_ul_hz": 1}})
    text = "\n".join(e.value.problems)
    assert "colour" in text and "bandwith_ul_hz" in text and "replications" in text
    assert "cluster" in text
    assert len(e.value.problems) >= 4


@pytest.mark.parametrize("bad", [
    {"n_devices": []},
    {"n_devices": 5, "cluster_size_k": None},
    {"algorithm": "greedy"},
    {"protocol": "tdma"},
    {"group_size": 3},
    {"q": 3, "cluster_size_k": 4},
    {"md_scope": "some"},
    {"snr_override": {"range_db": [10, 0]}},
    {"snr_override": {"values": [1, 2, 3]}, "n_devices": 4, "cluster_size_k": None},
    {"radio": {"bandwidth_ul_hz": -1}},
    {"model": {"cut_layer": 99}},
    [1, 2],
])
def test_invalid_configs(bad):
    with pytest.raises(ConfigError):
        spec_from_dict(bad)


def test_parse_error_has_line_and_column(tmp_path):
    p = write(tmp_path, '{\n  "n_devices": 4,\n  "seed": ,\n}\n')
    with pytest.raises(ConfigError) as e:
        load_spec(p)
    assert f"{p}:3:" in e.value.problems[0]


def small_spec(**kw):
    base = dict(n_devices=(4, 8), cluster_size_k=4, algorithms=("near_optimal", "random"),
                protocols=("splitmac", "vanilla", "cluster_fdma"), replications=3, seed=11)
    base.update(kw)
    return ExperimentSpec(**base)


def test_run_is_deterministic():
    spec = small_spec()
    assert run_sweep(spec) == run_sweep(spec)
    assert csv_text(run_sweep(spec)) == csv_text(run_sweep(spec))


def test_row_count_formula():
    spec = small_spec()
    res = run_sweep(spec)
    assert len(res.rows) == len(spec.n_devices) * spec.replications * len(spec.algorithms) * len(spec.protocols)
    assert [r.key for r in res.rows] == sorted(r.key for r in res.rows)
    assert res.spec_hash == spec.spec_hash


def test_header_only_csv_for_empty_result(tmp_path):
    assert csv_text(RunResult("x", ())) == ",".join(CSV_HEADER) + "\n"
    emit_csv(RunResult("x", ()), tmp_path / "e.csv")
    assert read_csv(tmp_path / "e.csv") == []


def test_csv_reload_matches_summary(tmp_path):
    res = run_sweep(small_spec())
    path = tmp_path / "out.csv"
    emit_csv(res, path)
    text = path.read_text()
    assert text.splitlines()[0] == "sweep_point,replication,algorithm,protocol,uplink_latency_s,total_latency_s,violations"
    rows = read_csv(path)
    assert len(rows) == len(res.rows)
    for rec in summarize(res):
        sel = [r for r in rows if (r["sweep_point"], r["algorithm"], r["protocol"])
               == (rec["sweep_point"], rec["algorithm"], rec["protocol"])]
        assert np.mean([r["uplink_latency_s"] for r in sel]) == pytest.approx(rec["uplink_mean"], rel=1e-9)
        assert np.mean([r["total_latency_s"] for r in sel]) == pytest.approx(rec["total_mean"], rel=1e-9)
        assert np.std([r["total_latency_s"] for r in sel], ddof=1) == pytest.approx(rec["total_std"], rel=1e-9)
    # full round-trip precision
    for row, rec in zip(res.rows, rows):
        assert rec["total_latency_s"] == row.total_latency_s


def test_summary_lists_step_means():
    spec = ExperimentSpec(n_devices=(8,), replications=2)
    out = emit_summary(run_sweep(spec))
    for col in ("sdt_mean", "smp_mean", "igt_mean", "dmt_mean"):
        assert col in out.splitlines()[0]


def test_spec_hash_tracks_resolved_fields():
    base = ExperimentSpec()
    seen = {base.spec_hash}
    variants = [
        dataclasses.replace(base, seed=1),
        dataclasses.replace(base, q=2),
        dataclasses.replace(base, radio=RadioParams(shadowing_sigma_db=2.0)),
        dataclasses.replace(base, algorithms=("balanced",)),
        dataclasses.replace(base, md_scope="all"),
    ]
    for v in variants:
        assert v.spec_hash not in seen
        seen.add(v.spec_hash)
    assert dataclasses.replace(base, seed=0).spec_hash == base.spec_hash


def test_adding_sweep_points_keeps_existing_rows():
    a = run_sweep(small_spec(n_devices=(4,)))
    b = run_sweep(small_spec(n_devices=(4, 8, 12)))
    assert set(a.rows) <= set(b.rows)
    c = run_sweep(small_spec(n_devices=(4,), replications=5))
    assert set(a.rows) <= set(c.rows)


def test_derive_seed_documented_hash():
    import hashlib

    expected = int.from_bytes(hashlib.sha256(b"11:4:2").digest()[:8], "little")
    assert derive_seed(11, 4, 2) == expected
    assert derive_seed(11, 4, 2) != derive_seed(11, 4, 3)


def test_snr_override_range():
    spec = spec_from_dict({"n_devices": 10, "snr_override": {"range_db": [10, 20]}, "cluster_size_k": None})
    devs = make_devices(spec, 10, 5)
    db = [10 * math.log10(d.snr_ul_linear) for d in devs]
    assert 10 <= min(db) and max(db) <= 20


def test_snr_override_values():
    spec = spec_from_dict({"n_devices": 4, "snr_override": {"values": [7, 1, 5, 3]}})
    assert [d.snr_ul_linear for d in make_devices(spec, 4, 0)] == [1, 3, 5, 7]


def test_balanced_beats_ordered_in_high_snr_band():
    spec = spec_from_dict({"n_devices": [4, 6, 8, 10], "snr_override": {"range_db": [10, 20]},
                           "cluster_size_k": None, "algorithm": ["balanced", "ordered"],
                           "replications": 20, "seed": 4})
    rows = {r.key: r for r in run_sweep(spec).rows}
    for (n, rep, alg, proto), row in rows.items():
        if alg == "balanced":
            other = rows[(n, rep, "ordered", proto)]
            assert row.uplink_latency_s <= other.uplink_latency_s * (1 + 1e-12)


def test_component_error_recorded_on_row(monkeypatch):
    import splitmac.harness as h

    real = h.evaluate

    def flaky(spec, devices, alg, proto, pseed=0):
        if alg == "random":
            raise RuntimeError("boom")
        return real(spec, devices, alg, proto, pseed)

    monkeypatch.setattr(h, "evaluate", flaky)
    res = run_sweep(small_spec(protocols=("splitmac",)))
    bad = [r for r in res.rows if r.algorithm == "random"]
    assert bad and all(r.error and math.isnan(r.total_latency_s) and r.violations == -1 for r in bad)
    assert all(r.error is None for r in res.rows if r.algorithm != "random")
    summary = {(s["sweep_point"], s["algorithm"]): s for s in summarize(res)}
    assert summary[(4, "random")]["errors"] == 3
