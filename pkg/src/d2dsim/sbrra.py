"""The sector-based RB allocation engine.

Each iteration: replenish RB-deficient cellular users (+r when holdings drop
below r/2), serve pairs in id order (each takes k RBs, set by its demanded
application, from the best-gain cellular user that can spare them while
keeping one), then score every served pair: interference breakdown, per-RB
SINR, Shannon throughput, MOS. A pair that lands on the same partner as in
the previous iteration (and found it holding >= r/2 pre-share) carries its
previous reported throughput forward, so consecutive reuses accumulate.

Cross-iteration identity is by slot: cellular slot i and pair slot j persist
across the per-iteration redeployments.
"""

import math
from dataclasses import dataclass, replace
from enum import Enum

import numpy as np

from d2dsim import kernels
from d2dsim.channel import dbm_to_watt
from d2dsim.config import ConfigError, RadioConfig, SimulationPlan
from d2dsim.interference import (
    InterferenceBreakdown,
    bs_interference,
    residual_cellular_interference,
)
from d2dsim.metrics import IterationResult, ScenarioReport, complexity_metric, mos, pair_throughput
from d2dsim.scenario import Deployment, SectorGeometry, UserLocation, deploy_users, form_pairs


class Application(Enum):
    """Demand classes in decreasing priority: A1 > A2 > A3."""

    A1 = "A1"
    A2 = "A2"
    A3 = "A3"


def rb_demand(app: Application, a2_rb: int = 3) -> int:
    """RBs demanded per application: A1 -> 5, A3 -> 1, A2 configurable."""
    if app is Application.A1:
        return 5
    if app is Application.A2:
        return a2_rb
    return 1


@dataclass(frozen=True)
class ShareRecord:
    """One share event; throughput_bps is the event's own Shannon value,
    before any reuse carry."""

    iteration: int
    pair_id: int
    k: int
    throughput_bps: float


@dataclass
class CellularLedgerEntry:
    holdings: int
    created_iteration: int
    last_grant_iteration: int
    grant_history: list
    sharing_history: list

    def clone(self) -> "CellularLedgerEntry":
        return CellularLedgerEntry(
            self.holdings,
            self.created_iteration,
            self.last_grant_iteration,
            list(self.grant_history),
            list(self.sharing_history),
        )


class RbLedger:
    """Per-cellular-slot RB inventory with full grant/share history."""

    def __init__(self, entries=None):
        self.entries = list(entries) if entries else []

    def clone(self) -> "RbLedger":
        return RbLedger([e.clone() for e in self.entries])

    def ensure_slots(self, count: int, n_rb: int, iteration: int) -> None:
        while len(self.entries) < count:
            self.entries.append(CellularLedgerEntry(n_rb, iteration, iteration, [], []))

    def holdings(self, slot: int) -> int:
        return self.entries[slot].holdings

    def replenish(self, active_count: int, n_rb: int, iteration: int) -> list[int]:
        """Top up every active slot below the r/2 threshold by +r."""
        topped = []
        for slot in range(active_count):
            e = self.entries[slot]
            if e.holdings < n_rb / 2:
                e.holdings += n_rb
                e.last_grant_iteration = iteration
                e.grant_history.append((iteration, n_rb))
                topped.append(slot)
        return topped

    def share(self, slot: int, iteration: int, pair_id: int, k: int) -> int:
        """Deduct k RBs from the slot; returns pre-share holdings."""
        e = self.entries[slot]
        if not 1 <= k <= e.holdings - 1:
            raise ValueError(f"share of k={k} violates 1 <= k <= holdings-1={e.holdings - 1}")
        pre = e.holdings
        e.holdings -= k
        e.sharing_history.append(ShareRecord(iteration, pair_id, k, 0.0))
        return pre

    def record_throughput(self, slot: int, pair_id: int, iteration: int, throughput_bps: float) -> None:
        hist = self.entries[slot].sharing_history
        for idx in range(len(hist) - 1, -1, -1):
            rec = hist[idx]
            if rec.iteration == iteration and rec.pair_id == pair_id:
                hist[idx] = ShareRecord(rec.iteration, rec.pair_id, rec.k, throughput_bps)
                return
        raise ValueError("no share record to attach throughput to")

    def check_conservation(self, n_rb: int) -> None:
        for slot, e in enumerate(self.entries):
            expected = n_rb + sum(a for _, a in e.grant_history) - sum(r.k for r in e.sharing_history)
            if e.holdings != expected or e.holdings < 0:
                raise AssertionError(f"ledger slot {slot} broke conservation: {e.holdings} != {expected}")


@dataclass(frozen=True)
class AllocationDecision:
    pair_id: int
    partner_id: int
    k: int
    application: Application
    reused_partner: bool
    sinr_per_rb: float
    feasible: bool


@dataclass(frozen=True)
class PairResult:
    decision: AllocationDecision | None
    breakdown: InterferenceBreakdown | None
    throughput_bps: float
    mos: float | None


@dataclass(frozen=True)
class PairCarry:
    partner_id: int
    value_bps: float


@dataclass(frozen=True)
class ScenarioState:
    iteration: int
    deployment: Deployment | None
    ledger: RbLedger
    carries: tuple


def initial_state() -> ScenarioState:
    return ScenarioState(0, None, RbLedger(), ())


def with_deployment(state: ScenarioState, deployment: Deployment) -> ScenarioState:
    return replace(state, deployment=deployment)


def _ranked_slots(gains_row: np.ndarray) -> np.ndarray:
    # descending gain; the stable sort breaks ties toward the lower id
    return np.argsort(-gains_row, kind="stable")


def rank_partners(pair, cellular, cfg: RadioConfig) -> list[int]:
    """Cellular ids ordered by link gain to the pair's receiver, descending;
    ties break toward the lower id."""
    if not cellular:
        raise ValueError(f"pair {pair.id} has no cellular candidates")
    gains = _gain_matrix_to_rx([pair.rx], cellular, cfg)[0]
    return [int(i) for i in _ranked_slots(gains)]


def _gain_matrix_to_rx(receivers, cellular, cfg: RadioConfig) -> np.ndarray:
    c = len(cellular)
    n = len(receivers)
    src_x = np.fromiter((u.location.x for u in cellular), dtype=np.float64, count=c)
    src_y = np.fromiter((u.location.y for u in cellular), dtype=np.float64, count=c)
    dst_x = np.fromiter((r.x for r in receivers), dtype=np.float64, count=n)
    dst_y = np.fromiter((r.y for r in receivers), dtype=np.float64, count=n)
    out = np.empty((n, c), dtype=np.float64)
    kernels.gain_matrix(src_x, src_y, dst_x, dst_y, cfg.d0_m, cfg.fc_mhz, out)
    return out


def allocate_iteration(
    state: ScenarioState,
    demands: dict,
    cfg: RadioConfig,
    sectored: bool = True,
) -> tuple[IterationResult, ScenarioState]:
    """Run one allocation iteration; returns the result and the advanced state."""
    dep = state.deployment
    if dep is None:
        raise ValueError("state has no deployment")
    for pair in dep.pairs:
        if pair.id not in demands:
            raise ValueError(f"demands missing pair {pair.id}")
    n_iter = state.iteration + 1
    ledger = state.ledger.clone()
    ledger.ensure_slots(dep.c, cfg.n_rb, n_iter)
    ledger.replenish(dep.c, cfg.n_rb, n_iter)

    # Phase A: partner selection and RB deduction, in pair-id order.
    selections: list = [None] * dep.d
    if dep.c > 0 and dep.d > 0:
        gains = _gain_matrix_to_rx([p.rx for p in dep.pairs], dep.cellular, cfg)
        for j, pair in enumerate(dep.pairs):
            k = rb_demand(demands[pair.id], cfg.a2_rb_demand)
            for i in _ranked_slots(gains[j]):
                slot = int(i)
                if k <= ledger.holdings(slot) - 1:
                    pre = ledger.share(slot, n_iter, pair.id, k)
                    selections[j] = (slot, k, pre)
                    break

    # Phase B: interference, SINR, throughput, carry, MOS.
    bs_loc = UserLocation(dep.sector.apex[0], dep.sector.apex[1])
    sinr_floor = 10.0 ** (cfg.sinr_threshold_db / 10.0)
    p_d2d_w = dbm_to_watt(cfg.p_d2d_max_dbm)
    noise_w = dbm_to_watt(cfg.noise_dbm)

    d = dep.d
    mid_x = np.empty(d, dtype=np.float64)
    mid_y = np.empty(d, dtype=np.float64)
    tx_x = np.empty(d, dtype=np.float64)
    tx_y = np.empty(d, dtype=np.float64)
    rx_x = np.empty(d, dtype=np.float64)
    rx_y = np.empty(d, dtype=np.float64)
    k_arr = np.zeros(d, dtype=np.int64)
    for j, pair in enumerate(dep.pairs):
        mid_x[j], mid_y[j] = pair.midpoint
        tx_x[j], tx_y[j] = pair.tx.x, pair.tx.y
        rx_x[j], rx_y[j] = pair.rx.x, pair.rx.y
        if selections[j] is not None:
            k_arr[j] = selections[j][1]
    wedge = np.empty(d, dtype=np.int64)
    if d > 0:
        kernels.sector_wedges(
            mid_x, mid_y, dep.sector.apex[0], dep.sector.apex[1], dep.sector.start_rad, wedge
        )

    results = []
    unserved = []
    new_carries: list = [None] * d
    total = 0.0
    breakdowns = []
    for j, pair in enumerate(dep.pairs):
        if selections[j] is None:
            unserved.append(pair.id)
            results.append(PairResult(None, None, 0.0, None))
            continue
        slot, k, pre_share = selections[j]
        partner = dep.cellular[slot]
        bs_w = bs_interference(pair, cfg, bs_loc)
        res_w = residual_cellular_interference(pair, partner.location, pre_share, k, cfg)
        cot_w = kernels.cotier_sum(
            j, rx_x, rx_y, mid_x, mid_y, tx_x, tx_y, k_arr, wedge,
            cfg.dmax_m, p_d2d_w, cfg.d0_m, cfg.fc_mhz, sectored,
        )
        breakdown = InterferenceBreakdown(bs_w, res_w, cot_w)
        signal_w = (p_d2d_w / k) * kernels.gain(_dist(pair.tx, pair.rx), cfg.d0_m, cfg.fc_mhz)
        sinr = signal_w / (noise_w + breakdown.total_w)
        base = pair_throughput(sinr, k, cfg.rb_bandwidth_hz)

        prev = state.carries[j] if j < len(state.carries) else None
        reused = (
            prev is not None
            and prev.partner_id == slot
            and pre_share >= cfg.n_rb / 2
        )
        reported = base + prev.value_bps if reused else base

        decision = AllocationDecision(
            pair.id, slot, k, demands[pair.id], reused, sinr, sinr >= sinr_floor
        )
        ledger.record_throughput(slot, pair.id, n_iter, base)
        score = mos(reported / 1000.0)  # the single bps -> kbps conversion
        results.append(PairResult(decision, breakdown, reported, score))
        breakdowns.append(breakdown)
        new_carries[j] = PairCarry(slot, reported)
        total += reported

    ledger.check_conservation(cfg.n_rb)
    result = IterationResult(
        n=n_iter,
        results=tuple(results),
        iteration_total_bps=total,
        unserved=tuple(unserved),
        complexity_w=complexity_metric(breakdowns),
    )
    new_state = ScenarioState(n_iter, dep, ledger, tuple(new_carries))
    return result, new_state


def _dist(a: UserLocation, b: UserLocation) -> float:
    dx = a.x - b.x
    dy = a.y - b.y
    return math.sqrt(dx * dx + dy * dy)


_APP_BY_DRAW = (Application.A1, Application.A2, Application.A3)


def sample_demands(deployment: Deployment, rng: np.random.Generator) -> dict:
    draws = rng.integers(0, 3, size=deployment.d)
    return {pair.id: _APP_BY_DRAW[draws[j]] for j, pair in enumerate(deployment.pairs)}


def parse_demand_script(text: str) -> list[list[Application]]:
    """One line per iteration, comma-separated tags, position = pair slot."""
    lines = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tags = []
        for tok in line.split(","):
            tok = tok.strip()
            try:
                tags.append(Application(tok))
            except ValueError:
                raise ConfigError(f"demand script line {lineno}: unknown application {tok!r}") from None
        if not tags:
            raise ConfigError(f"demand script line {lineno}: empty tag list")
        lines.append(tags)
    if not lines:
        raise ConfigError("demand script is empty")
    return lines


def script_demands(script_line: list[Application], deployment: Deployment) -> dict:
    # slots beyond the scripted tags wrap around the line
    return {pair.id: script_line[j % len(script_line)] for j, pair in enumerate(deployment.pairs)}


def run_scenario(cfg: RadioConfig, plan: SimulationPlan, model=None) -> ScenarioReport:
    """Run a full q-iteration scenario, redeploying users every iteration
    while the ledger and reuse carries persist by slot index."""
    ss = np.random.SeedSequence(plan.seed)
    deploy_ss, demand_ss, alloc_ss, train_ss = ss.spawn(4)
    deploy_rng = np.random.Generator(np.random.PCG64(deploy_ss))
    demand_rng = np.random.Generator(np.random.PCG64(demand_ss))

    script = None
    if plan.demand_script is not None:
        with open(plan.demand_script, encoding="utf-8") as fh:
            script = parse_demand_script(fh.read())
        if len(script) < plan.q:
            raise ConfigError(f"demand script has {len(script)} lines, plan needs q={plan.q}")

    hmm_allocate = None
    if plan.mode == "hmm":
        from d2dsim.hmm import hmm_allocate, train_default_model

        alloc_rng = np.random.Generator(np.random.PCG64(alloc_ss))
        if model is None:
            model = train_default_model(
                cfg, radius_m=plan.radius_m, seed_seq=train_ss, n_users=plan.n_users
            )

    sector = SectorGeometry(plan.radius_m)
    state = initial_state()
    iterations = []
    for n in range(1, plan.q + 1):
        users = deploy_users(sector, plan.n_users, deploy_rng)
        dep = form_pairs(users, cfg.d0_m, sector)
        if script is not None:
            demands = script_demands(script[n - 1], dep)
        else:
            demands = sample_demands(dep, demand_rng)
        state = with_deployment(state, dep)
        if plan.mode == "sbrra":
            result, state = allocate_iteration(state, demands, cfg, plan.sectored)
        else:
            result, state = hmm_allocate(state, demands, cfg, model, alloc_rng)
        iterations.append(result)

    total = 0.0
    for it in iterations:
        total += it.iteration_total_bps
    t_system = total / plan.q

    sinr_dbs = []
    mos_vals = []
    for it in iterations:
        for pr in it.results:
            if pr.decision is not None:
                sinr_dbs.append(10.0 * math.log10(pr.decision.sinr_per_rb))
                mos_vals.append(pr.mos)
    report = ScenarioReport(
        plan=plan,
        iterations=tuple(iterations),
        t_system_bps=t_system,
        mean_sinr_db=(sum(sinr_dbs) / len(sinr_dbs)) if sinr_dbs else None,
        mean_mos=(sum(mos_vals) / len(mos_vals)) if mos_vals else None,
        pair_counts=tuple(len(it.results) for it in iterations),
    )
    return report
