"""Runtime-aware OTA update simulator for energy-harvesting task graphs.

The heavy lifting lives in the compiled `_aero` extension; this package
re-exports its surface.
"""

from aero._aero import (  # noqa: F401
    BundleError,
    CodecError,
    Dag,
    DagError,
    EnergyError,
    EnergyState,
    HarvestTrace,
    UpdateError,
    __version__,
    acquire_for_task,
    capacity_from_capacitor,
    compute_affected_block,
    decode_packet,
    encode_packet,
    harvest,
    run_experiment,
    simulate_events_csv,
)

__all__ = [
    "BundleError",
    "CodecError",
    "Dag",
    "DagError",
    "EnergyError",
    "EnergyState",
    "HarvestTrace",
    "UpdateError",
    "acquire_for_task",
    "capacity_from_capacitor",
    "compute_affected_block",
    "decode_packet",
    "encode_packet",
    "harvest",
    "run_experiment",
    "simulate_events_csv",
    "__version__",
]
