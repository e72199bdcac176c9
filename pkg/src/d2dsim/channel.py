"""Path-loss models, channel gains, and unit conversions.

Two-branch path loss: 40*log10(d_km) + 30*log10(fc_MHz) + 49 up to and
including d0, 148.1 + 37.6*log10(d_km) beyond it. The branches are
discontinuous at d0; that is accepted rather than blended. All simulator
internals work in linear units; dB/dBm appear only at config and report
boundaries.
"""

import math

from d2dsim import kernels
from d2dsim.config import RadioConfig
from d2dsim.scenario import UserLocation, distance


def path_loss_db(dist_m: float, cfg: RadioConfig, shadow_db: float = 0.0) -> float:
    """Path loss in dB at dist_m. shadow_db is an optional additive term
    (callers wanting log-normal shadowing draw it themselves)."""
    if dist_m <= 0:
        raise ValueError(f"path loss undefined for non-positive distance {dist_m}")
    pl = kernels.path_loss_db(dist_m, cfg.d0_m, cfg.fc_mhz)
    if shadow_db != 0.0:
        pl += shadow_db
    return pl


def gain_from_path_loss(pl_db: float) -> float:
    return 10.0 ** (-pl_db / 10.0)


def dbm_to_watt(p_dbm: float) -> float:
    return 10.0 ** (p_dbm / 10.0) / 1000.0


def watt_to_dbm(p_w: float) -> float:
    return 10.0 * math.log10(p_w * 1000.0)


def link_gain(a: UserLocation, b: UserLocation, cfg: RadioConfig) -> float:
    """Linear channel gain between two points; symmetric in (a, b)."""
    d = distance(a, b)
    if d == 0.0:
        raise ValueError("link gain undefined for coincident points")
    return kernels.gain(d, cfg.d0_m, cfg.fc_mhz)
