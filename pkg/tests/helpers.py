import math

import numpy as np

from d2dsim.channel import dbm_to_watt
from d2dsim.metrics import mos
from d2dsim.scenario import CellularUser, D2DPair, Deployment, SectorGeometry, UserLocation


def rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def make_deployment(pair_coords, cu_coords, sector=None) -> Deployment:
    """Hand-built deployment: pair_coords is [((txx, txy), (rxx, rxy)), ...],
    cu_coords is [(x, y), ...]."""
    if sector is None:
        sector = SectorGeometry(500.0)
    pairs = tuple(
        D2DPair(i, UserLocation(*tx), UserLocation(*rx))
        for i, (tx, rx) in enumerate(pair_coords)
    )
    cellular = tuple(CellularUser(i, UserLocation(*xy)) for i, xy in enumerate(cu_coords))
    return Deployment(sector, pairs, cellular, 2 * len(pairs) + len(cellular))


def replay_scenario(report, cfg, plan):
    """Independent reuse-carry replay from the raw per-decision logs: rebuild
    holdings, replenishment, and carry chains, then recheck every reported
    cumulative throughput bit-exactly (plus the grant/power/MOS constraints).
    Returns (#served, #reused)."""
    holdings: dict = {}
    prev: dict = {}
    served = reused = 0
    sinr_floor = 10.0 ** (cfg.sinr_threshold_db / 10.0)
    p_d2d_w = dbm_to_watt(cfg.p_d2d_max_dbm)
    for it in report.iterations:
        d = len(it.results)
        c = plan.n_users - 2 * d
        for slot in range(c):
            holdings.setdefault(slot, cfg.n_rb)
            if holdings[slot] < cfg.n_rb / 2:
                holdings[slot] += cfg.n_rb
        nxt: dict = {}
        for j, pr in enumerate(it.results):
            if pr.decision is None:
                assert j in it.unserved
                assert pr.throughput_bps == 0.0 and pr.mos is None
                continue
            dc = pr.decision
            assert j not in it.unserved
            pre = holdings[dc.partner_id]
            # constraint 11(c): at least one RB stays with the owner
            assert 1 <= dc.k <= pre - 1
            holdings[dc.partner_id] = pre - dc.k
            # constraint 11(b): even split saturates the power budget
            assert abs((p_d2d_w / dc.k) * dc.k - p_d2d_w) <= 1e-15 * p_d2d_w
            assert dc.feasible == (dc.sinr_per_rb >= sinr_floor)
            base = cfg.rb_bandwidth_hz * dc.k * math.log2(1.0 + dc.sinr_per_rb)
            linked = (
                j in prev
                and prev[j][0] == dc.partner_id
                and pre >= cfg.n_rb / 2
            )
            expected = base + prev[j][1] if linked else base
            assert dc.reused_partner == linked  # 11(d) reuse eligibility
            assert pr.throughput_bps == expected  # cumulative replay, bit-exact
            assert pr.mos == mos(expected / 1000.0)
            assert 0.85 < pr.mos < 5.0
            nxt[j] = (dc.partner_id, expected)
            served += 1
            reused += int(linked)
        prev = nxt
    return served, reused
