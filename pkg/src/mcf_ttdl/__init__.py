"""Group-index-variable true-time-delay lines in multicore fiber."""

__version__ = "0.1.0"

from .errors import TTDLError
from .fbg_device import (
    GratingSpec,
    MulticavityLayout,
    canonical_paper_layout,
    tap_amplitudes,
    tap_delays,
    uniform_grating_response,
)
from .hetero_design import (
    CoreDesign,
    HeteroMCF,
    bend_threshold_radius,
    design_core,
    design_hetero_mcf,
    differential_delay,
    link_delays,
    taylor_group_delay,
)
from .mwp_filter import TapSet, filter_metrics, fsr, transfer_function
from .waveguide import FUSED_SILICA, MaterialModel, RadialProfile, effective_index, modal_parameters
