"""Latency model and NOMA device pairing for split learning over multiple access channels."""

from splitmac.channel import (
    DeviceChannel,
    RadioParams,
    path_loss_db,
    place_devices,
    rate_bps,
    snr_from_link_budget,
)
from splitmac.latency import (
    ClusterPlan,
    LatencyBreakdown,
    cluster_fdma_round_latency,
    pipeline_assumption_check,
    splitmac_round_latency,
    vanilla_sl_round_latency,
)
from splitmac.model import ComputeProfile, ModelProfile, derive_model_profile
from splitmac.pairing import (
    GroupingPlan,
    exhaustive_pairing,
    near_optimal_pairing,
    random_pairing,
    snr_balanced_pairing,
    snr_ordered_pairing,
    total_uplink_latency,
)
from splitmac.rates import DeviceGroup, RateAllocation, min_latency_group, min_latency_pair

__version__ = "0.1.0"
