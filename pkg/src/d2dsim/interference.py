"""Per-RB interference terms and SINR at a D2D receiver.

Three downlink interference sources: the BS itself, the sharing cellular
partner's transmissions on its remaining (unshared) RBs, and co-tier D2D
pairs within dmax of the victim pair (midpoint to midpoint), optionally
filtered to the victim's tri-sector wedge.
"""

from dataclasses import dataclass

import numpy as np

from d2dsim import kernels
from d2dsim.channel import dbm_to_watt, link_gain
from d2dsim.config import RadioConfig
from d2dsim.scenario import D2DPair, SectorGeometry, UserLocation


@dataclass(frozen=True)
class InterferenceBreakdown:
    from_bs_w: float
    from_cellular_residual_w: float
    from_cotier_w: float

    @property
    def total_w(self) -> float:
        return self.from_bs_w + self.from_cellular_residual_w + self.from_cotier_w


def bs_interference(pair: D2DPair, cfg: RadioConfig, bs_location: UserLocation) -> float:
    """BS transmit power seen at the pair's receiver.

    bs_power_division='literal' uses the full BS power; 'per_rb' divides it
    across the n_rb grant for sensitivity studies.
    """
    p_bs_w = dbm_to_watt(cfg.p_bs_dbm)
    if cfg.bs_power_division == "per_rb":
        p_bs_w = p_bs_w / cfg.n_rb
    return p_bs_w * link_gain(bs_location, pair.rx, cfg)


def residual_cellular_interference(
    pair: D2DPair,
    partner_location: UserLocation,
    holdings: int,
    k_shared: int,
    cfg: RadioConfig,
) -> float:
    """Interference from the partner's remaining (holdings - k_shared) RBs.

    Cellular per-RB power is max power / n_rb, independent of current
    holdings, so the term is linear in the residual count.
    """
    if not 0 <= k_shared <= holdings:
        raise ValueError(f"k_shared={k_shared} outside [0, holdings={holdings}]")
    residual = holdings - k_shared
    if residual == 0:
        return 0.0
    p_per_rb_w = dbm_to_watt(cfg.p_cell_max_dbm) / cfg.n_rb
    return residual * p_per_rb_w * link_gain(partner_location, pair.rx, cfg)


def cotier_interference(
    pair: D2DPair,
    others: list[tuple[D2DPair, int]],
    cfg: RadioConfig,
    sectored: bool,
    sector: SectorGeometry,
) -> float:
    """Co-tier interference from other transmitting pairs (Dmax-gated)."""
    n = len(others) + 1
    mid_x = np.empty(n, dtype=np.float64)
    mid_y = np.empty(n, dtype=np.float64)
    tx_x = np.empty(n, dtype=np.float64)
    tx_y = np.empty(n, dtype=np.float64)
    rx_x = np.empty(n, dtype=np.float64)
    rx_y = np.empty(n, dtype=np.float64)
    k_rb = np.empty(n, dtype=np.int64)
    for idx, (p, k) in enumerate([(pair, 1)] + list(others)):
        if idx > 0 and p.id == pair.id and (p.tx, p.rx) == (pair.tx, pair.rx):
            raise ValueError("victim pair listed among interferers")
        mid_x[idx], mid_y[idx] = p.midpoint
        tx_x[idx], tx_y[idx] = p.tx.x, p.tx.y
        rx_x[idx], rx_y[idx] = p.rx.x, p.rx.y
        k_rb[idx] = k
    wedge = np.empty(n, dtype=np.int64)
    kernels.sector_wedges(mid_x, mid_y, sector.apex[0], sector.apex[1], sector.start_rad, wedge)
    return kernels.cotier_sum(
        0, rx_x, rx_y, mid_x, mid_y, tx_x, tx_y, k_rb, wedge,
        cfg.dmax_m, dbm_to_watt(cfg.p_d2d_max_dbm), cfg.d0_m, cfg.fc_mhz, sectored,
    )


def sinr_per_rb(pair: D2DPair, k_alloc: int, breakdown: InterferenceBreakdown, cfg: RadioConfig) -> float:
    """Per-RB SINR: D2D power split evenly over the k allocated RBs, flat
    channel, so every allocated RB sees the same value."""
    if k_alloc < 1:
        raise ValueError("k_alloc must be >= 1")
    p_d2d_w = dbm_to_watt(cfg.p_d2d_max_dbm)
    signal_w = (p_d2d_w / k_alloc) * link_gain(pair.tx, pair.rx, cfg)
    return signal_w / (dbm_to_watt(cfg.noise_dbm) + breakdown.total_w)
