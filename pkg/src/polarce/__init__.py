"""Exact Bhattacharyya parameters of polar bit-channels for discrete symmetric channels."""

from ._numeric import Backend
from .density import (
    AbsDDensity,
    Atom,
    ChannelSpec,
    DensityError,
    bec_density,
    bhattacharyya,
    bsc_density,
    density_from_atoms,
    density_from_channel,
    load_channel_spec,
    merge_atoms,
)
from .engine import (
    AtomOverflowError,
    CheckState,
    CrossState,
    EngineConfig,
    VarState,
    all_bhattacharyya,
    bhattacharyya_var,
    check_to_var,
    check_update,
    cross_update,
    evolve,
    init_states,
    polarize,
    select_info_set,
    var_to_check,
    var_update,
)
from .patterns import CHECK, VAR, BitPattern, all_patterns

__version__ = "0.1.0"

__all__ = [
    "AbsDDensity",
    "all_bhattacharyya",
    "all_patterns",
    "Atom",
    "AtomOverflowError",
    "Backend",
    "bec_density",
    "bhattacharyya",
    "bhattacharyya_var",
    "BitPattern",
    "bsc_density",
    "ChannelSpec",
    "CHECK",
    "check_to_var",
    "check_update",
    "CheckState",
    "cross_update",
    "CrossState",
    "density_from_atoms",
    "density_from_channel",
    "DensityError",
    "EngineConfig",
    "evolve",
    "init_states",
    "load_channel_spec",
    "merge_atoms",
    "polarize",
    "select_info_set",
    "VAR",
    "var_to_check",
    "var_update",
    "VarState",
]
