"""Coded caching over a MISO broadcast channel.

Delivery schedules that pair caching gains with spatial multicasting,
max-min beamformer optimization for the resulting multigroup multicast
slots, and Monte Carlo evaluation of the end-to-end symmetric rate.
"""

from .beamforming import (
    ScaOptions,
    ScaResult,
    build_subproblem,
    linearize,
    maxmin_snr_multicast,
    sca_maxmin_mac,
    unicast_maxmin,
    zf_beamformers,
    zf_gains,
    zf_power_opt,
)
from .combinatorics import (
    FreshTracker,
    OmegaSets,
    SchedulingParams,
    build_omega,
    enumerate_partitions,
    enumerate_schedule,
    enumerate_subsets,
    fresh_index,
    gamma_count,
    partition_count,
)
from .content import (
    DeliverySchedule,
    Library,
    build_coded_message,
    decode_and_verify,
    default_file_bits,
    place_cache,
    run_delivery,
)
from .experiments import SimConfig, audit_schedule, emit_csv, run_scheme, validate
from .phy import (
    BeamformerSet,
    ChannelMatrix,
    RateCurve,
    dof_estimate,
    mac_rate,
    sample_channel,
    sinr,
    snr_at_level,
    symmetric_rate,
    transmission_time,
)

__all__ = [name for name in dir() if not name.startswith("_")]
