"""Per-step and per-round latency of SplitMAC and its two baselines.

Steps per cluster: model distribution (MD), device-side execution (DME);
per group: smashed-data upload (SDT), intermediate-gradient download (IGT),
device-side backprop (DMP), device-model upload (DMT); per device on the
server: server-side processing (SMP).

Two composition rules exist. With more than one group per cluster the
server work and gradient downloads overlap the next group's upload (FDD),
so only MD, DME, SDT and DMT add up ("pipelined"). With one group per
cluster nothing overlaps and every step adds up ("sequential"), plus
``N * SMP``. Vanilla SL and FDMA Cluster SL always use the sequential rule.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Literal, Sequence

from splitmac.channel import DeviceChannel, RadioParams, rate_bps
from splitmac.model import ComputeProfile, ModelProfile
from splitmac.pairing import GroupingPlan
from splitmac.rates import DeviceGroup, min_latency_group

Protocol = Literal["splitmac", "vanilla", "cluster_fdma"]
MdScope = Literal["cluster", "all"]


def _positive(values: Iterable[float], what: str) -> list[float]:
    values = [float(v) for v in values]
    if not values:
        raise ValueError(f"no {what} given")
    if not all(v > 0 for v in values):
        raise ValueError(f"{what} must be > 0, got {values}")
    return values


def tau_md(model: ModelProfile, dl_rates_bps: Sequence[float]) -> float:
    return max(model.device_model_bits / r for r in _positive(dl_rates_bps, "downlink rates"))


def tau_dme(model: ModelProfile, compute: ComputeProfile, cpu_hz: Sequence[float]) -> float:
    work = model.batch_size * model.fwd_device_flops_per_sample
    return max(work / (f * compute.device_intensity_flops_per_cycle) for f in _positive(cpu_hz, "CPU rates"))


def tau_dmp(model: ModelProfile, compute: ComputeProfile, cpu_hz: Sequence[float]) -> float:
    work = model.batch_size * model.bwd_device_flops_per_sample
    return max(work / (f * compute.device_intensity_flops_per_cycle) for f in _positive(cpu_hz, "CPU rates"))


def tau_sdt(model: ModelProfile, ul_rates_bps: Sequence[float]) -> float:
    return max(model.smashed_bits_per_batch / r for r in _positive(ul_rates_bps, "uplink rates"))


def tau_dmt(model: ModelProfile, ul_rates_bps: Sequence[float]) -> float:
    return max(model.device_model_bits / r for r in _positive(ul_rates_bps, "uplink rates"))


def tau_smp(model: ModelProfile, compute: ComputeProfile) -> float:
    work = model.batch_size * (model.fwd_server_flops_per_sample + model.bwd_server_flops_per_sample)
    return work / (compute.server_cpu_hz * compute.server_intensity_flops_per_cycle)


def tau_igt(model: ModelProfile, dl_rates_bps: Sequence[float]) -> float:
    # summed over the group's members as printed, despite the broadcast wording
    return sum(model.grad_bits_per_batch / r for r in _positive(dl_rates_bps, "downlink rates"))


def noma_uplink_rates_bps(group: DeviceGroup, bandwidth_hz: float) -> list[float]:
    """Equal-latency NOMA rates of a group, scaled to bits/s."""
    alloc, _ = min_latency_group(group)
    return [bandwidth_hz * r for r in alloc.rates_bits_per_hz]


@dataclass(frozen=True)
class ClusterPlan:
    """Groups in transmission order, chopped into clusters of C consecutive groups."""

    groups_in_order: tuple[DeviceGroup, ...]
    groups_per_cluster: int
    group_size: int
    local_update_period_groups: int = 1

    def __post_init__(self):
        object.__setattr__(self, "groups_in_order", tuple(self.groups_in_order))
        problems = self.problems()
        if problems:
            raise ValueError("; ".join(problems))

    def problems(self) -> list[str]:
        out = []
        g, c, q = len(self.groups_in_order), self.groups_per_cluster, self.local_update_period_groups
        if g == 0:
            out.append("no groups")
        if any(len(grp) != self.group_size for grp in self.groups_in_order):
            out.append(f"every group must have {self.group_size} devices")
        if c < 1 or (g and g % c):
            out.append(f"{g} groups cannot be split into clusters of {c} groups")
        if not 1 <= q <= max(c, 1):
            out.append(f"local update period Q={q} must be in [1, C={c}]")
        ids = [i for grp in self.groups_in_order for i in grp.member_ids]
        if len(ids) != len(set(ids)):
            out.append("groups overlap")
        return out

    @classmethod
    def from_grouping(cls, plan: GroupingPlan, cluster_size_k: int | None = None, q: int = 1) -> "ClusterPlan":
        """``cluster_size_k=None`` puts every group in a single cluster."""
        sizes = {len(g) for g in plan.groups}
        if len(sizes) != 1:
            raise ValueError("all groups must have the same size")
        (size,) = sizes
        k = cluster_size_k if cluster_size_k is not None else size * len(plan.groups)
        if k % size:
            raise ValueError(f"cluster size K={k} is not a multiple of group size L={size}")
        return cls(plan.groups, k // size, size, q)

    @property
    def n_devices(self) -> int:
        return len(self.groups_in_order) * self.group_size

    @property
    def cluster_size(self) -> int:
        return self.groups_per_cluster * self.group_size

    @property
    def pipelined(self) -> bool:
        return self.cluster_size > self.group_size

    def clusters(self) -> list[tuple[DeviceGroup, ...]]:
        c = self.groups_per_cluster
        g = self.groups_in_order
        return [g[i:i + c] for i in range(0, len(g), c)]


@dataclass(frozen=True)
class GroupLatency:
    sdt: float
    igt: float
    dmp: float
    dmt: float


@dataclass(frozen=True)
class ClusterLatency:
    md: float
    dme: float
    groups: tuple[GroupLatency, ...]


def compose_total(per_cluster: Sequence[ClusterLatency], smp_per_device: float, n_devices: int,
                  pipelined: bool) -> float:
    total = 0.0
    for cl in per_cluster:
        if pipelined:
            inner = sum(g.sdt + g.dmt for g in cl.groups)
        else:
            inner = sum(g.sdt + g.igt + g.dmp + g.dmt for g in cl.groups)
        total += cl.md + cl.dme + inner
    if not pipelined:
        total += n_devices * smp_per_device
    return total


@dataclass(frozen=True)
class LatencyBreakdown:
    protocol: str
    per_cluster: tuple[ClusterLatency, ...]
    smp_per_device: float
    n_devices: int
    pipelined: bool
    total_s: float

    def recompute_total(self) -> float:
        return compose_total(self.per_cluster, self.smp_per_device, self.n_devices, self.pipelined)

    def _sum(self, field: str) -> float:
        return sum(getattr(g, field) for cl in self.per_cluster for g in cl.groups)

    @property
    def uplink_s(self) -> float:
        """SDT + DMT summed over every group of the round."""
        return sum(g.sdt + g.dmt for cl in self.per_cluster for g in cl.groups)

    def step_totals(self) -> dict[str, float]:
        return {
            "md": sum(cl.md for cl in self.per_cluster),
            "dme": sum(cl.dme for cl in self.per_cluster),
            "sdt": self._sum("sdt"),
            "smp": self.smp_per_device,
            "igt": self._sum("igt"),
            "dmp": self._sum("dmp"),
            "dmt": self._sum("dmt"),
        }


def _build(protocol, per_cluster, smp, n, pipelined) -> LatencyBreakdown:
    per_cluster = tuple(per_cluster)
    return LatencyBreakdown(protocol, per_cluster, smp, n, pipelined,
                            compose_total(per_cluster, smp, n, pipelined))


def _index(devices: Iterable[DeviceChannel]) -> dict[int, DeviceChannel]:
    out = {}
    for d in devices:
        if d.device_id in out:
            raise ValueError(f"duplicate device id {d.device_id}")
        out[d.device_id] = d
    return out


def _lookup(by_id, ids) -> list[DeviceChannel]:
    try:
        return [by_id[i] for i in ids]
    except KeyError as e:
        raise ValueError(f"no channel for device {e.args[0]}") from None


def _dl_rates(devs, radio: RadioParams) -> list[float]:
    return [rate_bps(d.snr_dl_linear, radio.bandwidth_dl_hz) for d in devs]


def _group_latency(group: DeviceGroup, devs, model, compute, radio) -> GroupLatency:
    ul = noma_uplink_rates_bps(group, radio.bandwidth_ul_hz)
    return GroupLatency(
        sdt=tau_sdt(model, ul),
        igt=tau_igt(model, _dl_rates(devs, radio)),
        dmp=tau_dmp(model, compute, [d.cpu_hz for d in devs]),
        dmt=tau_dmt(model, ul),
    )


def splitmac_round_latency(
    plan: ClusterPlan,
    devices: Iterable[DeviceChannel],
    model: ModelProfile,
    compute: ComputeProfile,
    radio: RadioParams,
    md_scope: MdScope = "cluster",
) -> LatencyBreakdown:
    """One SplitMAC training round with NOMA groups and clustered training.

    ``md_scope="all"`` takes the model-distribution maximum over every device
    instead of only the current cluster.
    """
    by_id = _index(devices)
    every = _lookup(by_id, [i for g in plan.groups_in_order for i in g.member_ids])
    per_cluster = []
    for cluster in plan.clusters():
        members = _lookup(by_id, [i for g in cluster for i in g.member_ids])
        md_set = members if md_scope == "cluster" else every
        groups = tuple(_group_latency(g, _lookup(by_id, g.member_ids), model, compute, radio) for g in cluster)
        per_cluster.append(ClusterLatency(
            md=tau_md(model, _dl_rates(md_set, radio)),
            dme=tau_dme(model, compute, [d.cpu_hz for d in members]),
            groups=groups,
        ))
    return _build("splitmac", per_cluster, tau_smp(model, compute), plan.n_devices, plan.pipelined)


def vanilla_sl_round_latency(
    devices: Sequence[DeviceChannel],
    model: ModelProfile,
    compute: ComputeProfile,
    radio: RadioParams,
) -> LatencyBreakdown:
    """Sequential SL: each device alone on the full band, one after another."""
    devices = list(devices)
    per_cluster = []
    for d in devices:
        group = DeviceGroup((d.device_id,), (d.snr_ul_linear,))
        per_cluster.append(ClusterLatency(
            md=tau_md(model, _dl_rates([d], radio)),
            dme=tau_dme(model, compute, [d.cpu_hz]),
            groups=(_group_latency(group, [d], model, compute, radio),),
        ))
    return _build("vanilla", per_cluster, tau_smp(model, compute), len(devices), False)


def cluster_fdma_round_latency(
    plan: ClusterPlan,
    devices: Iterable[DeviceChannel],
    model: ModelProfile,
    compute: ComputeProfile,
    radio: RadioParams,
) -> LatencyBreakdown:
    """Cluster SL with FDMA uplink.

    Devices of a cluster upload simultaneously on disjoint subbands split so
    that they all finish together; the resulting upload time is the sum of
    each device's full-band time. The cluster then behaves like one group
    under the sequential composition rule.
    """
    by_id = _index(devices)
    per_cluster = []
    for cluster in plan.clusters():
        members = _lookup(by_id, [i for g in cluster for i in g.member_ids])
        solo = [noma_uplink_rates_bps(DeviceGroup((d.device_id,), (d.snr_ul_linear,)), radio.bandwidth_ul_hz)[0]
                for d in members]
        cpu = [d.cpu_hz for d in members]
        upload = GroupLatency(
            sdt=sum(model.smashed_bits_per_batch / r for r in solo),
            igt=tau_igt(model, _dl_rates(members, radio)),
            dmp=tau_dmp(model, compute, cpu),
            dmt=sum(model.device_model_bits / r for r in solo),
        )
        per_cluster.append(ClusterLatency(
            md=tau_md(model, _dl_rates(members, radio)),
            dme=tau_dme(model, compute, cpu),
            groups=(upload,),
        ))
    return _build("cluster_fdma", per_cluster, tau_smp(model, compute), plan.n_devices, False)


@dataclass(frozen=True)
class PipelineViolation:
    cluster: int
    group: int  # index within the cluster of the group whose IGT overruns
    smp_plus_igt: float
    next_sdt: float


def pipeline_violations(breakdown: LatencyBreakdown, q: int, group_size: int) -> list[PipelineViolation]:
    """Groups whose server work plus gradient download outlast the next upload."""
    out = []
    smp = breakdown.smp_per_device * q * group_size
    for j, cl in enumerate(breakdown.per_cluster):
        for i in range(len(cl.groups) - 1):
            lhs = smp + cl.groups[i].igt
            rhs = cl.groups[i + 1].sdt
            if not lhs <= rhs:
                out.append(PipelineViolation(j, i, lhs, rhs))
    return out


def pipeline_assumption_check(
    plan: ClusterPlan,
    devices: Iterable[DeviceChannel],
    model: ModelProfile,
    compute: ComputeProfile,
    radio: RadioParams,
) -> list[PipelineViolation]:
    """Empty list means the overlap assumption behind the pipelined total holds."""
    bd = splitmac_round_latency(plan, devices, model, compute, radio)
    return pipeline_violations(bd, plan.local_update_period_groups, plan.group_size)
