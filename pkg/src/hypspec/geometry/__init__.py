"""Hyperbolic trigonometry, surface descriptions and closed-form bounds."""

from .bounds import (
    BoundReport,
    Verdict,
    analytic_systole_interval,
    bound_report,
    buser_rayleigh_bound,
    cheeger_lower_bound,
    collar_width,
    euler_characteristic,
    gauss_bonnet_area,
    mondal_delta,
    nonsep_length_bound,
    randol_cover_order,
    randol_cover_raw,
    randol_genus_order,
    randol_ksuf_bound,
    small_count_bound,
    sys_upper_bound,
    systole_width,
)
from .hyperbolic import Hexagon, hexagon_from_alternate, hexagons_from_pants, trace_hexagon
from .surface import (
    BlockKind,
    FNSurface,
    Gluing,
    PantsBlock,
    SurfaceError,
    UnsupportedTopology,
    chain_surface,
    theta_genus2,
)
