"""Line-of-sight MIMO toolkit: channels, capacity bounds, ULA planning and transceivers."""

from .bound import BoundCurve, optimal_snr_constant, rho_of_snr, upper_bound, upper_bound_relaxed, zeta_threshold
from .capacity import channel_capacity, db_to_linear, equal_gain_rate, linear_to_db, waterfill
from .channel import (
    ArrayLinkGeometry,
    LinkBudget,
    UlaChannelSpec,
    approx_channel,
    effective_eta,
    exact_channel,
    rayleigh_geometry,
    vandermonde_channel,
)
from .planner import RadialPlan, continuous_eta, geometric_plan, rotation_angle, select_configuration
from .transceiver import (
    TransceiverMatrices,
    build_transceiver,
    diagonal_power_ratio,
    fast_receive,
    mrc_spectral_efficiency,
)

__version__ = "0.1.0"
