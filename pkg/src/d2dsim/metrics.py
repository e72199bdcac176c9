"""Throughput, MOS, and the interference-power complexity metric.

Throughput uses Shannon capacity per RB; the flat-channel, even-power-split
model makes every allocated RB identical, so the per-RB sum collapses to
multiplication by k (a frequency-selective model would reinstate the sum).
MOS maps kbps to a (0.85, 5) score with asymptote 5.
"""

import math
from dataclasses import dataclass

from d2dsim.config import SimulationPlan


def pair_throughput(sinr_linear: float, k: int, beta_hz: float) -> float:
    """bps over k RBs at the given per-RB SINR."""
    if sinr_linear < 0:
        raise ValueError("sinr_linear must be >= 0")
    if k < 1:
        raise ValueError("k must be >= 1")
    return beta_hz * k * math.log2(1.0 + sinr_linear)


def mos(throughput_kbps: float) -> float:
    """Mean opinion score for a throughput in kbps (note: kbps, not bps)."""
    if throughput_kbps < 0:
        raise ValueError("throughput_kbps must be >= 0")
    x = (throughput_kbps + 541.1) / 45.98
    return 5.0 - 578.0 / (1.0 + x * x)


@dataclass(frozen=True)
class ShareEvent:
    """One RB-sharing event as recorded in the ledger, for replay."""

    iteration: int
    partner_id: int
    k: int
    sinr_per_rb: float
    partner_pre_share_holdings: int


def aggregate_throughput(events: list[ShareEvent], beta_hz: float, n_rb: int) -> float:
    """Cumulative throughput of a pair slot after its chronological share
    events, with the reuse carry.

    The carry continues only while consecutive events hit the same partner
    in consecutive iterations with pre-share holdings >= n_rb/2; any break
    resets the chain to the current event alone.
    """
    carry = 0.0
    prev = None
    for ev in events:
        base = pair_throughput(ev.sinr_per_rb, ev.k, beta_hz)
        if (
            prev is not None
            and ev.partner_id == prev.partner_id
            and ev.iteration == prev.iteration + 1
            and ev.partner_pre_share_holdings >= n_rb / 2
        ):
            carry = base + carry
        else:
            carry = base
        prev = ev
    return carry


def complexity_metric(breakdowns) -> float:
    """Aggregate interference power (watts) over served pairs."""
    acc = 0.0
    for b in breakdowns:
        acc += b.total_w
    return acc


@dataclass(frozen=True)
class IterationResult:
    n: int
    results: tuple  # PairResult per pair slot
    iteration_total_bps: float
    unserved: tuple[int, ...]
    complexity_w: float


@dataclass(frozen=True)
class ScenarioReport:
    plan: SimulationPlan
    iterations: tuple[IterationResult, ...]
    t_system_bps: float
    mean_sinr_db: float | None
    mean_mos: float | None
    pair_counts: tuple[int, ...]
