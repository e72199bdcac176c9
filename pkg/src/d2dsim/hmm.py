"""HMM-based RB allocation baseline.

States are {base_station, cellular_user, pair}; the default transition
matrix is the fixed demand/response table (rows sum to 1). Observations are
"APP:BUCKET" symbols, where BUCKET quantizes SINR into 10 dB steps over
-10..+30 dB (the usual reporting range, clamped at both ends). Emissions are
trained by empirical frequency with add-one smoothing over a corpus recorded
from the geometric simulator under random partner assignment.

Allocation walks the state chain from the base station; a cellular-state
visit picks a uniformly random RB-capable cellular user, and the pair's SINR
is sampled from the trained bucket distribution for its application instead
of being computed from geometry. There is no reuse carry.
"""

import math
from dataclasses import dataclass

import numpy as np

from d2dsim.config import RadioConfig
from d2dsim.interference import (
    InterferenceBreakdown,
    bs_interference,
    cotier_interference,
    residual_cellular_interference,
    sinr_per_rb,
)
from d2dsim.metrics import IterationResult, mos, pair_throughput
from d2dsim.scenario import SectorGeometry, UserLocation, deploy_users, form_pairs
from d2dsim.sbrra import (
    AllocationDecision,
    Application,
    PairResult,
    ScenarioState,
    rb_demand,
)

STATE_BASE_STATION = "base_station"
STATE_CELLULAR = "cellular_user"
STATE_PAIR = "pair"
STATES = (STATE_BASE_STATION, STATE_CELLULAR, STATE_PAIR)

# demand/response transition table; every row sums to 1
DEFAULT_TRANSITION = (
    (0.02, 0.80, 0.18),
    (0.19, 0.01, 0.80),
    (0.18, 0.80, 0.02),
)
# the BS initiates every grant
DEFAULT_PRIOR = (1.0, 0.0, 0.0)

N_BUCKETS = 4
BUCKET_LOW_DB = -10.0
BUCKET_STEP_DB = 10.0

APP_TAGS = ("A1", "A2", "A3")
APP_BUCKET_ALPHABET = tuple(f"{a}:{b}" for a in APP_TAGS for b in range(N_BUCKETS))


def sinr_bucket(sinr_db: float) -> int:
    b = int(math.floor((sinr_db - BUCKET_LOW_DB) / BUCKET_STEP_DB))
    if b < 0:
        return 0
    if b >= N_BUCKETS:
        return N_BUCKETS - 1
    return b


def bucket_representative_db(bucket: int) -> float:
    return BUCKET_LOW_DB + BUCKET_STEP_DB * (bucket + 0.5)


def observation_symbol(app: Application, sinr_db: float) -> str:
    return f"{app.value}:{sinr_bucket(sinr_db)}"


@dataclass(frozen=True)
class HmmModel:
    states: tuple
    alphabet: tuple
    prior: tuple
    transition: tuple
    emission: tuple

    def __post_init__(self):
        n = len(self.states)
        if len(self.prior) != n or len(self.transition) != n or len(self.emission) != n:
            raise ValueError("prior/transition/emission must have one row per state")
        _check_stochastic("prior", self.prior)
        for s, row in zip(self.states, self.transition):
            if len(row) != n:
                raise ValueError(f"transition row for {s} has wrong length")
            _check_stochastic(f"transition[{s}]", row)
        for s, row in zip(self.states, self.emission):
            if len(row) != len(self.alphabet):
                raise ValueError(f"emission row for {s} has wrong length")
            _check_stochastic(f"emission[{s}]", row)

    def state_index(self, state: str) -> int:
        try:
            return self.states.index(state)
        except ValueError:
            raise ValueError(f"unknown state {state!r}") from None

    def symbol_index(self, symbol: str) -> int:
        try:
            return self.alphabet.index(symbol)
        except ValueError:
            raise ValueError(f"unknown observation symbol {symbol!r}") from None


def _check_stochastic(name, row):
    total = 0.0
    for p in row:
        if p < 0:
            raise ValueError(f"{name} has a negative probability")
        total += p
    if abs(total - 1.0) > 1e-9:
        raise ValueError(f"{name} sums to {total!r}, expected 1")


def default_model(alphabet: tuple = APP_BUCKET_ALPHABET) -> HmmModel:
    uniform = tuple(1.0 / len(alphabet) for _ in alphabet)
    return HmmModel(
        states=STATES,
        alphabet=tuple(alphabet),
        prior=DEFAULT_PRIOR,
        transition=DEFAULT_TRANSITION,
        emission=(uniform, uniform, uniform),
    )


def path_probability(model: HmmModel, path) -> float:
    """Prior times the product of transition probabilities along the path."""
    if not path:
        raise ValueError("path must be non-empty")
    idx = [model.state_index(s) for s in path]
    p = model.prior[idx[0]]
    for a, b in zip(idx, idx[1:]):
        p *= model.transition[a][b]
    return p


def path_observation_likelihood(model: HmmModel, path, observations) -> float:
    """Product of emission probabilities of the observations along the path."""
    if len(path) != len(observations):
        raise ValueError("path and observations must have equal length")
    p = 1.0
    for state, obs in zip(path, observations):
        p *= model.emission[model.state_index(state)][model.symbol_index(obs)]
    return p


def sequence_likelihood(model: HmmModel, observations) -> float:
    """Total probability of the observation sequence (forward recursion)."""
    if not observations:
        raise ValueError("observations must be non-empty")
    n = len(model.states)
    obs_idx = [model.symbol_index(o) for o in observations]
    alpha = [model.prior[s] * model.emission[s][obs_idx[0]] for s in range(n)]
    for t in range(1, len(obs_idx)):
        nxt = []
        for j in range(n):
            acc = 0.0
            for i in range(n):
                acc += alpha[i] * model.transition[i][j]
            nxt.append(acc * model.emission[j][obs_idx[t]])
        alpha = nxt
    return sum(alpha)


def train(model: HmmModel, sequences, reestimate_transitions: bool = False) -> HmmModel:
    """Re-estimate emissions by empirical frequency with add-one smoothing.

    sequences are lists of (state, symbol) pairs. Prior and transition keep
    their current values unless reestimate_transitions is set.
    """
    if not sequences:
        raise ValueError("training requires at least one labeled sequence")
    n = len(model.states)
    m = len(model.alphabet)
    emit_counts = [[0] * m for _ in range(n)]
    prior_counts = [0] * n
    trans_counts = [[0] * n for _ in range(n)]
    for seq in sequences:
        if not seq:
            raise ValueError("training sequences must be non-empty")
        prev = None
        for pos, (state, symbol) in enumerate(seq):
            s = model.state_index(state)
            x = model.symbol_index(symbol)
            emit_counts[s][x] += 1
            if pos == 0:
                prior_counts[s] += 1
            if prev is not None:
                trans_counts[prev][s] += 1
            prev = s

    emission = tuple(
        tuple((emit_counts[s][x] + 1) / (sum(emit_counts[s]) + m) for x in range(m))
        for s in range(n)
    )
    prior = model.prior
    transition = model.transition
    if reestimate_transitions:
        total_first = sum(prior_counts)
        prior = tuple((prior_counts[s] + 1) / (total_first + n) for s in range(n))
        transition = tuple(
            tuple((trans_counts[i][j] + 1) / (sum(trans_counts[i]) + n) for j in range(n))
            for i in range(n)
        )
    return HmmModel(model.states, model.alphabet, prior, transition, emission)


def save_model(model: HmmModel) -> str:
    """Flat text format; floats use repr so the round trip is lossless."""
    lines = ["states " + " ".join(model.states)]
    lines.append("alphabet " + " ".join(model.alphabet))
    lines.append("prior " + " ".join(repr(p) for p in model.prior))
    for s, row in zip(model.states, model.transition):
        lines.append(f"transition {s} " + " ".join(repr(p) for p in row))
    for s, row in zip(model.states, model.emission):
        lines.append(f"emission {s} " + " ".join(repr(p) for p in row))
    return "\n".join(lines) + "\n"


def load_model(text: str) -> HmmModel:
    states = None
    alphabet = None
    prior = None
    transition = {}
    emission = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        parts = line.split()
        kind = parts[0]
        if kind == "states":
            states = tuple(parts[1:])
        elif kind == "alphabet":
            alphabet = tuple(parts[1:])
        elif kind == "prior":
            prior = tuple(float(p) for p in parts[1:])
        elif kind == "transition":
            transition[parts[1]] = tuple(float(p) for p in parts[2:])
        elif kind == "emission":
            emission[parts[1]] = tuple(float(p) for p in parts[2:])
        else:
            raise ValueError(f"model line {lineno}: unknown record {kind!r}")
    if states is None or alphabet is None or prior is None:
        raise ValueError("model text missing states/alphabet/prior")
    return HmmModel(
        states=states,
        alphabet=alphabet,
        prior=prior,
        transition=tuple(transition[s] for s in states),
        emission=tuple(emission[s] for s in states),
    )


def sample_transition(model: HmmModel, state_idx: int, rng: np.random.Generator) -> int:
    u = rng.random()
    row = model.transition[state_idx]
    acc = 0.0
    for idx, p in enumerate(row):
        acc += p
        if u < acc:
            return idx
    return len(row) - 1


def sinr_bucket_distribution(model: HmmModel, app: Application) -> list[float]:
    """P(bucket | application) from the pair state's trained emissions."""
    pair_row = model.emission[model.state_index(STATE_PAIR)]
    weights = [pair_row[model.symbol_index(f"{app.value}:{b}")] for b in range(N_BUCKETS)]
    total = sum(weights)
    return [w / total for w in weights]


def _sample_bucket(dist, rng: np.random.Generator) -> int:
    u = rng.random()
    acc = 0.0
    for b, p in enumerate(dist):
        acc += p
        if u < acc:
            return b
    return len(dist) - 1


_MAX_WALK = 256


def hmm_allocate(
    state: ScenarioState,
    demands: dict,
    cfg: RadioConfig,
    model: HmmModel,
    rng: np.random.Generator,
) -> tuple[IterationResult, ScenarioState]:
    """One iteration of probabilistic allocation; geometry is never read."""
    dep = state.deployment
    if dep is None:
        raise ValueError("state has no deployment")
    n_iter = state.iteration + 1
    ledger = state.ledger.clone()
    ledger.ensure_slots(dep.c, cfg.n_rb, n_iter)
    ledger.replenish(dep.c, cfg.n_rb, n_iter)

    sinr_floor = 10.0 ** (cfg.sinr_threshold_db / 10.0)
    bs_idx = model.state_index(STATE_BASE_STATION)
    cu_idx = model.state_index(STATE_CELLULAR)

    results = []
    unserved = []
    total = 0.0
    for pair in dep.pairs:
        app = demands[pair.id]
        k = rb_demand(app, cfg.a2_rb_demand)
        capable = [slot for slot in range(dep.c) if k <= ledger.holdings(slot) - 1]
        slot = None
        if capable:
            cur = bs_idx
            for _ in range(_MAX_WALK):
                cur = sample_transition(model, cur, rng)
                if cur == cu_idx:
                    slot = capable[int(rng.integers(len(capable)))]
                    break
        if slot is None:
            unserved.append(pair.id)
            results.append(PairResult(None, None, 0.0, None))
            continue
        ledger.share(slot, n_iter, pair.id, k)
        bucket = _sample_bucket(sinr_bucket_distribution(model, app), rng)
        sinr_db = bucket_representative_db(bucket)
        sinr = 10.0 ** (sinr_db / 10.0)
        throughput = pair_throughput(sinr, k, cfg.rb_bandwidth_hz)
        ledger.record_throughput(slot, pair.id, n_iter, throughput)
        decision = AllocationDecision(pair.id, slot, k, app, False, sinr, sinr >= sinr_floor)
        results.append(PairResult(decision, None, throughput, mos(throughput / 1000.0)))
        total += throughput

    ledger.check_conservation(cfg.n_rb)
    result = IterationResult(
        n=n_iter,
        results=tuple(results),
        iteration_total_bps=total,
        unserved=tuple(unserved),
        complexity_w=0.0,
    )
    return result, ScenarioState(n_iter, dep, ledger, ())


def build_training_corpus(
    cfg: RadioConfig,
    radius_m: float,
    n_scenarios: int,
    rng: np.random.Generator,
    n_users: int = 30,
) -> list:
    """Labeled sequences from the geometric simulator under random partner
    assignment: one (bs, cellular, pair) sequence per served pair, all three
    states emitting the pair's (application, SINR bucket) symbol."""
    if n_scenarios < 1:
        raise ValueError("n_scenarios must be >= 1")
    sector = SectorGeometry(radius_m)
    bs_loc = UserLocation(sector.apex[0], sector.apex[1])
    apps = (Application.A1, Application.A2, Application.A3)
    sequences = []
    for _ in range(n_scenarios):
        users = deploy_users(sector, n_users, rng)
        dep = form_pairs(users, cfg.d0_m, sector)
        if dep.d == 0 or dep.c == 0:
            continue
        holdings = [cfg.n_rb] * dep.c
        assigned = []
        for pair in dep.pairs:
            app = apps[int(rng.integers(3))]
            k = rb_demand(app, cfg.a2_rb_demand)
            capable = [s for s in range(dep.c) if k <= holdings[s] - 1]
            if not capable:
                continue
            slot = capable[int(rng.integers(len(capable)))]
            pre = holdings[slot]
            holdings[slot] -= k
            assigned.append((pair, app, k, slot, pre))
        served = [(pair, k) for pair, _, k, _, _ in assigned]
        for pair, app, k, slot, pre in assigned:
            others = [(p, kk) for p, kk in served if p.id != pair.id]
            breakdown = InterferenceBreakdown(
                bs_interference(pair, cfg, bs_loc),
                residual_cellular_interference(pair, dep.cellular[slot].location, pre, k, cfg),
                cotier_interference(pair, others, cfg, True, sector),
            )
            sinr = sinr_per_rb(pair, k, breakdown, cfg)
            sym = observation_symbol(app, 10.0 * math.log10(sinr))
            sequences.append(
                [(STATE_BASE_STATION, sym), (STATE_CELLULAR, sym), (STATE_PAIR, sym)]
            )
    return sequences


def train_default_model(
    cfg: RadioConfig,
    radius_m: float,
    seed_seq,
    n_scenarios: int = 60,
    n_users: int = 30,
) -> HmmModel:
    rng = np.random.Generator(np.random.PCG64(seed_seq))
    corpus = build_training_corpus(cfg, radius_m, n_scenarios, rng, n_users)
    if not corpus:
        return default_model()
    return train(default_model(), corpus)
