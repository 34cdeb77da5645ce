"""Switched erasure/PPT-pbit channels and coherent-information numerics."""

from .channels import (
    QuantumChannel,
    apply,
    choi_state,
    erasure_channel,
    flagged_channel,
    identity_channel,
    switched_channel,
    total_erasure_channel,
)
from .coherent import coherent_information, maximize_coherent_information
from .construction import ChannelParams, build_M, feasibility_scan, pick_parameters
from .errors import DimensionCapError, LayoutError, PreconditionError
from .linalg import DensityMatrix, Operator, SystemLayout
from .pbit import ZetaParams, zeta_state

__version__ = "0.1.0"
