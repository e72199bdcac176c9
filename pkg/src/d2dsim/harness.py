"""Experiment presets and CSV emission.

Every output file starts with a comment header carrying the fully resolved
config and seed, so any report is reproducible from its own header. Data is
long-format (one row per pair per iteration per replication) so the usual
tables and figures pivot out of a single artifact. Replications may run on a
thread pool; rows are assembled in (replication, iteration, pair) order
before writing, so parallel runs are byte-identical to sequential ones.
"""

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace

import numpy as np

from d2dsim import kernels
from d2dsim.channel import dbm_to_watt
from d2dsim.config import RadioConfig, SimulationPlan, serialize_config
from d2dsim.metrics import ScenarioReport
from d2dsim.sbrra import (
    Application,
    allocate_iteration,
    initial_state,
    run_scenario,
    with_deployment,
)
from d2dsim.scenario import SectorGeometry, deploy_users, form_pairs

PRESETS = (
    "pairs-vs-radius",
    "throughput-vs-iterations",
    "mode-comparison",
    "complexity-vs-pairs",
    "mos-table",
)

EXPERIMENT_COLUMNS = (
    "replication",
    "iteration",
    "pair_id",
    "application",
    "partner_id",
    "k_rb",
    "reused",
    "sinr_db",
    "throughput_bps",
    "mos",
    "served",
    "sectored",
    "mode",
)

PAIRS_COLUMNS = ("replication", "radius_m", "iteration", "n_pairs", "n_cellular")

COMPLEXITY_COLUMNS = (
    "replication",
    "iteration",
    "n_pairs",
    "complexity_sectored_w",
    "complexity_unsectored_w",
)


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _write_csv(path, header_lines, columns, rows):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for line in header_lines:
            fh.write(f"# {line}\n")
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _header(preset: str, cfg: RadioConfig, plan: SimulationPlan) -> list[str]:
    lines = [f"preset = {preset}"]
    lines.extend(serialize_config(cfg, plan).splitlines())
    return lines


def _deploy_rng(seed: int) -> np.random.Generator:
    # same stream layout as run_scenario: deploy is the first spawn
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed).spawn(4)[0]))


def _mean_ci(values) -> tuple[float, float, float]:
    n = len(values)
    m = 0.0
    for v in values:
        m += v
    m /= n
    if n < 2:
        return m, m, m
    var = 0.0
    for v in values:
        var += (v - m) * (v - m)
    half = 1.96 * math.sqrt(var / (n - 1)) / math.sqrt(n)
    return m, m - half, m + half


def scenario_rows(report: ScenarioReport, replication: int) -> list[tuple]:
    """Flatten a scenario report into experiment-schema rows."""
    plan = report.plan
    rows = []
    for it in report.iterations:
        for pr in it.results:
            if pr.decision is None:
                continue
            d = pr.decision
            rows.append(
                (
                    replication,
                    it.n,
                    d.pair_id,
                    d.application.value,
                    d.partner_id,
                    d.k,
                    int(d.reused_partner),
                    10.0 * math.log10(d.sinr_per_rb),
                    pr.throughput_bps,
                    pr.mos,
                    1,
                    int(plan.sectored),
                    plan.mode,
                )
            )
        for pid in it.unserved:
            rows.append(
                (replication, it.n, pid, "", -1, 0, 0, "", "", "", 0, int(plan.sectored), plan.mode)
            )
    return rows


def _map_replications(fn, count: int, jobs: int):
    if jobs <= 1:
        return [fn(rep) for rep in range(count)]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, range(count)))


def _preset_pairs_vs_radius(cfg, plan, jobs):
    radii = (500.0, 1000.0, 2000.0)

    def one(rep):
        out = []
        for radius in radii:
            sector = SectorGeometry(radius)
            rng = _deploy_rng(plan.seed + rep)
            for n in range(1, plan.q + 1):
                dep = form_pairs(deploy_users(sector, plan.n_users, rng), cfg.d0_m, sector)
                out.append((rep, radius, n, dep.d, dep.c))
        return out

    rows = [r for chunk in _map_replications(one, plan.replications, jobs) for r in chunk]
    rows.sort(key=lambda r: (r[1], r[0], r[2]))
    summary = []
    for radius in radii:
        counts = [r[3] for r in rows if r[1] == radius]
        m, lo, hi = _mean_ci(counts)
        summary.append((radius, m, lo, hi, max(counts)))
    return (
        rows,
        PAIRS_COLUMNS,
        summary,
        ("radius_m", "mean_pairs", "ci95_low", "ci95_high", "max_pairs"),
    )


def _preset_scenarios(cfg, plan, jobs, modes):
    def one(rep):
        out = []
        for mode in modes:
            rep_plan = replace(plan, seed=plan.seed + rep, mode=mode, replications=1)
            out.extend(scenario_rows(run_scenario(cfg, rep_plan), rep))
        return out

    return [r for chunk in _map_replications(one, plan.replications, jobs) for r in chunk]


def _preset_throughput(cfg, plan, jobs):
    rows = _preset_scenarios(cfg, plan, jobs, (plan.mode,))
    summary = []
    for n in range(1, plan.q + 1):
        totals = _iteration_totals(rows, n, plan.mode, plan.replications)
        m, lo, hi = _mean_ci(totals)
        summary.append((n, m, lo, hi))
    return rows, EXPERIMENT_COLUMNS, summary, ("iteration", "mean_total_bps", "ci95_low", "ci95_high")


def _iteration_totals(rows, n, mode, replications):
    # a replication whose deployment formed no pairs still counts as zero
    per_rep = {rep: 0.0 for rep in range(replications)}
    for r in rows:
        if r[1] == n and r[12] == mode and r[10] == 1:
            per_rep[r[0]] += r[8]
    return [per_rep[k] for k in sorted(per_rep)]


def _preset_mode_comparison(cfg, plan, jobs):
    rows = _preset_scenarios(cfg, plan, jobs, ("sbrra", "hmm"))
    summary = []
    for mode in ("sbrra", "hmm"):
        t_systems = _t_systems(rows, mode, plan)
        m, lo, hi = _mean_ci(t_systems)
        summary.append((mode, m, lo, hi))
    return rows, EXPERIMENT_COLUMNS, summary, ("mode", "mean_t_system_bps", "ci95_low", "ci95_high")


def _t_systems(rows, mode, plan):
    per_rep = {rep: 0.0 for rep in range(plan.replications)}
    for r in rows:
        if r[12] == mode and r[10] == 1:
            per_rep[r[0]] += r[8]
    return [per_rep[k] / plan.q for k in sorted(per_rep)]


def _preset_mos_table(cfg, plan, jobs):
    rows = _preset_scenarios(cfg, plan, jobs, ("sbrra", "hmm"))
    summary = []
    for mode in ("sbrra", "hmm"):
        for n in range(1, plan.q + 1):
            vals = [r[9] for r in rows if r[12] == mode and r[1] == n and r[10] == 1]
            if not vals:
                summary.append((mode, n, "", "", ""))
                continue
            m, lo, hi = _mean_ci(vals)
            summary.append((mode, n, m, lo, hi))
    return rows, EXPERIMENT_COLUMNS, summary, ("mode", "iteration", "mean_mos", "ci95_low", "ci95_high")


def recompute_complexity(dep, result, cfg, sectored: bool) -> float:
    """Aggregate interference of an allocation outcome under either sector
    flag; bs and partner-residual terms are flag-independent, only the
    co-tier term is refiltered."""
    d = dep.d
    if d == 0:
        return 0.0
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
        pr = result.results[j]
        if pr.decision is not None:
            k_arr[j] = pr.decision.k
    wedge = np.empty(d, dtype=np.int64)
    sector = dep.sector
    kernels.sector_wedges(mid_x, mid_y, sector.apex[0], sector.apex[1], sector.start_rad, wedge)
    p_d2d_w = dbm_to_watt(cfg.p_d2d_max_dbm)
    acc = 0.0
    for j in range(d):
        pr = result.results[j]
        if pr.decision is None:
            continue
        cot = kernels.cotier_sum(
            j, rx_x, rx_y, mid_x, mid_y, tx_x, tx_y, k_arr, wedge,
            cfg.dmax_m, p_d2d_w, cfg.d0_m, cfg.fc_mhz, sectored,
        )
        acc += pr.breakdown.from_bs_w + pr.breakdown.from_cellular_residual_w + cot
    return acc


def _preset_complexity(cfg, plan, jobs):
    def one(rep):
        # full-cell deployment so out-of-sector pairs exist; all pairs demand A3
        sector = SectorGeometry(plan.radius_m, arc_deg=360.0, orientation_deg=180.0)
        rng = _deploy_rng(plan.seed + rep)
        state = initial_state()
        out = []
        for n in range(1, plan.q + 1):
            dep = form_pairs(deploy_users(sector, plan.n_users, rng), cfg.d0_m, sector)
            demands = {p.id: Application.A3 for p in dep.pairs}
            state = with_deployment(state, dep)
            result, state = allocate_iteration(state, demands, cfg, sectored=True)
            sect_w = recompute_complexity(dep, result, cfg, True)
            unsect_w = recompute_complexity(dep, result, cfg, False)
            out.append((rep, n, dep.d, sect_w, unsect_w))
        return out

    rows = [r for chunk in _map_replications(one, plan.replications, jobs) for r in chunk]
    by_pairs = {}
    for r in rows:
        by_pairs.setdefault(r[2], []).append(r)
    summary = []
    for n_pairs in sorted(by_pairs):
        group = by_pairs[n_pairs]
        ms, _, _ = _mean_ci([g[3] for g in group])
        mu, _, _ = _mean_ci([g[4] for g in group])
        summary.append((n_pairs, len(group), ms, mu))
    return (
        rows,
        COMPLEXITY_COLUMNS,
        summary,
        ("n_pairs", "n_samples", "mean_sectored_w", "mean_unsectored_w"),
    )


_PRESET_FNS = {
    "pairs-vs-radius": _preset_pairs_vs_radius,
    "throughput-vs-iterations": _preset_throughput,
    "mode-comparison": _preset_mode_comparison,
    "complexity-vs-pairs": _preset_complexity,
    "mos-table": _preset_mos_table,
}


def run_preset(name: str, cfg: RadioConfig, plan: SimulationPlan, out_dir: str, jobs: int = 1) -> list[str]:
    """Run a named preset; writes <name>.csv and <name>_summary.csv."""
    if name not in _PRESET_FNS:
        raise ValueError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}")
    os.makedirs(out_dir, exist_ok=True)
    rows, columns, summary, summary_columns = _PRESET_FNS[name](cfg, plan, jobs)
    header = _header(name, cfg, plan)
    data_path = os.path.join(out_dir, f"{name}.csv")
    summary_path = os.path.join(out_dir, f"{name}_summary.csv")
    _write_csv(data_path, header, columns, rows)
    _write_csv(summary_path, header, summary_columns, summary)
    return [data_path, summary_path]
