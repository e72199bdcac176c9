import itertools

import pytest

from d2dsim.config import RadioConfig
from d2dsim.hmm import (
    APP_BUCKET_ALPHABET,
    DEFAULT_TRANSITION,
    N_BUCKETS,
    STATE_BASE_STATION,
    STATE_CELLULAR,
    STATE_PAIR,
    STATES,
    HmmModel,
    bucket_representative_db,
    build_training_corpus,
    default_model,
    hmm_allocate,
    load_model,
    path_observation_likelihood,
    path_probability,
    sample_transition,
    save_model,
    sequence_likelihood,
    sinr_bucket,
    sinr_bucket_distribution,
    train,
    train_default_model,
)
from d2dsim.metrics import pair_throughput
from d2dsim.sbrra import Application, initial_state, with_deployment

from helpers import make_deployment, rng

CFG = RadioConfig()

ABC = ("a", "b", "c")


def _model(prior, transition, emission, alphabet=ABC):
    return HmmModel(STATES, tuple(alphabet), tuple(prior), transition, emission)


def _random_model(r, alphabet=ABC):
    def row(n):
        v = r.random(n) + 1e-3
        v = v / v.sum()
        return tuple(float(x) for x in v)

    return _model(
        row(3),
        (row(3), row(3), row(3)),
        (row(len(alphabet)), row(len(alphabet)), row(len(alphabet))),
        alphabet=alphabet,
    )


def test_default_transition_rows_sum_to_exactly_one():
    for r in DEFAULT_TRANSITION:
        assert sum(r) == 1.0


def test_model_validation_rejects_bad_rows():
    with pytest.raises(ValueError):
        _model((0.5, 0.5, 0.1), DEFAULT_TRANSITION, default_model(ABC).emission)
    with pytest.raises(ValueError):
        _model((1.0, 0.0, 0.0), ((1.1, -0.1, 0.0),) + DEFAULT_TRANSITION[1:], default_model(ABC).emission)


def test_path_probability_single_state_is_prior():
    m = default_model()
    assert path_probability(m, [STATE_BASE_STATION]) == 1.0
    assert path_probability(m, [STATE_CELLULAR]) == 0.0


def test_path_probability_chain_product():
    m = default_model()
    got = path_probability(m, [STATE_BASE_STATION, STATE_CELLULAR, STATE_PAIR])
    assert got == 1.0 * 0.8 * 0.8
    assert got == pytest.approx(0.64, abs=1e-12)


def test_path_probability_annihilates_on_zero_prior():
    m = default_model()
    assert path_probability(m, [STATE_PAIR, STATE_CELLULAR]) == 0.0


def test_path_probability_unknown_state():
    with pytest.raises(ValueError):
        path_probability(default_model(), ["nonsense"])
    with pytest.raises(ValueError):
        path_probability(default_model(), [])


def test_observation_likelihood_one_hot():
    one_hot = ((1.0, 0.0, 0.0), (0.0, 1.0, 0.0), (0.0, 0.0, 1.0))
    m = _model((1.0, 0.0, 0.0), DEFAULT_TRANSITION, one_hot)
    path = [STATE_BASE_STATION, STATE_CELLULAR, STATE_PAIR]
    assert path_observation_likelihood(m, path, ["a", "b", "c"]) == 1.0
    assert path_observation_likelihood(m, path, ["a", "c", "c"]) == 0.0


def test_observation_likelihood_uniform_length_four():
    uniform = tuple(tuple(1.0 / 3 for _ in ABC) for _ in STATES)
    m = _model((1.0, 0.0, 0.0), DEFAULT_TRANSITION, uniform)
    path = [STATE_BASE_STATION] * 4
    got = path_observation_likelihood(m, path, ["a", "b", "a", "c"])
    assert got == pytest.approx((1 / 3) ** 4, rel=1e-12)


def test_observation_likelihood_length_mismatch():
    with pytest.raises(ValueError):
        path_observation_likelihood(default_model(), [STATE_PAIR], [])


def _brute_force_likelihood(model, observations):
    total = 0.0
    for path in itertools.product(model.states, repeat=len(observations)):
        total += path_probability(model, path) * path_observation_likelihood(model, path, observations)
    return total


def test_sequence_likelihood_single_column():
    m = _random_model(rng(3))
    for sym in ABC:
        expected = sum(m.prior[s] * m.emission[s][m.symbol_index(sym)] for s in range(3))
        assert sequence_likelihood(m, [sym]) == pytest.approx(expected, rel=1e-15)


def test_sequence_likelihood_matches_bruteforce():
    r = rng(17)
    for _ in range(25):
        m = _random_model(r)
        for length in (1, 2, 3):
            for obs in itertools.product(ABC, repeat=length):
                assert sequence_likelihood(m, list(obs)) == pytest.approx(
                    _brute_force_likelihood(m, list(obs)), abs=1e-12
                )


def test_sequence_likelihood_normalizes_over_length_two():
    m = _random_model(rng(5))
    total = sum(sequence_likelihood(m, list(obs)) for obs in itertools.product(ABC, repeat=2))
    assert total == pytest.approx(1.0, abs=1e-12)


def test_train_requires_data():
    with pytest.raises(ValueError):
        train(default_model(ABC), [])


def test_train_degenerate_corpus():
    m = default_model(ABC)
    seqs = [[(STATE_PAIR, "a")]] * 500
    trained = train(m, seqs)
    s = trained.state_index(STATE_PAIR)
    assert trained.emission[s][0] == (500 + 1) / (500 + 3)
    assert trained.emission[s][0] > 0.99
    # unseen states keep the smoothed uniform (0+1)/(0+3)
    assert trained.emission[0] == (1 / 3, 1 / 3, 1 / 3)


def test_train_symmetric_corpus():
    m = default_model(ABC)
    seqs = [[(STATE_PAIR, "a")], [(STATE_PAIR, "b")]] * 100
    trained = train(m, seqs)
    s = trained.state_index(STATE_PAIR)
    assert trained.emission[s][0] == trained.emission[s][1]


def test_train_rows_remain_stochastic():
    r = rng(8)
    symbols = [ABC[int(r.integers(3))] for _ in range(200)]
    states = [STATES[int(r.integers(3))] for _ in range(200)]
    trained = train(default_model(ABC), [list(zip(states, symbols))])
    for row in trained.emission:
        assert abs(sum(row) - 1.0) <= 1e-12
    for row in trained.transition:
        assert abs(sum(row) - 1.0) <= 1e-12


def test_train_recovers_generating_table():
    # law of large numbers: empirical emissions approach the generator
    r = rng(23)
    true_b = {
        STATE_BASE_STATION: (0.6, 0.3, 0.1),
        STATE_CELLULAR: (0.2, 0.2, 0.6),
        STATE_PAIR: (0.05, 0.9, 0.05),
    }
    seqs = []
    for state, probs in true_b.items():
        draws = r.choice(3, size=100_000, p=probs)
        seqs.append([(state, ABC[int(d)]) for d in draws])
    trained = train(default_model(ABC), seqs)
    for state, probs in true_b.items():
        row = trained.emission[trained.state_index(state)]
        for got, want in zip(row, probs):
            assert abs(got - want) < 0.02


def test_train_reestimates_transitions_on_request():
    # a deterministic bs -> cellular -> pair -> bs ... cycle
    cycle = [STATE_BASE_STATION, STATE_CELLULAR, STATE_PAIR] * 400
    seq = [(s, "a") for s in cycle]
    trained = train(default_model(ABC), [seq], reestimate_transitions=True)
    i_bs = trained.state_index(STATE_BASE_STATION)
    i_cu = trained.state_index(STATE_CELLULAR)
    assert trained.transition[i_bs][i_cu] > 0.99
    untouched = train(default_model(ABC), [seq])
    assert untouched.transition == DEFAULT_TRANSITION


def test_serialization_round_trip_lossless():
    r = rng(31)
    m = _random_model(r, alphabet=APP_BUCKET_ALPHABET)
    text = save_model(m)
    back = load_model(text)
    assert back == m
    trained = train_default_model(CFG, radius_m=500.0, seed_seq=11, n_scenarios=10)
    assert load_model(save_model(trained)) == trained


def test_load_model_rejects_garbage():
    with pytest.raises(ValueError):
        load_model("bogus 1 2 3\n")
    with pytest.raises(ValueError):
        load_model("")


def test_sinr_buckets_clamp_and_center():
    assert sinr_bucket(-40.0) == 0
    assert sinr_bucket(-10.0) == 0
    assert sinr_bucket(-0.001) == 0
    assert sinr_bucket(0.0) == 1
    assert sinr_bucket(15.0) == 2
    assert sinr_bucket(29.9) == 3
    assert sinr_bucket(70.0) == N_BUCKETS - 1
    assert bucket_representative_db(0) == -5.0
    assert bucket_representative_db(3) == 25.0


def test_sample_transition_frequencies_match_table():
    m = default_model()
    r = rng(2)
    cu = m.state_index(STATE_CELLULAR)
    counts = [0, 0, 0]
    n = 100_000
    for _ in range(n):
        counts[sample_transition(m, cu, r)] += 1
    assert counts[m.state_index(STATE_PAIR)] / n == pytest.approx(0.8, abs=0.01)


def _degenerate_bucket_model(bucket: int) -> HmmModel:
    # pair state always emits the given bucket, any application
    emission = []
    for state in STATES:
        row = [0.0] * len(APP_BUCKET_ALPHABET)
        for a in ("A1", "A2", "A3"):
            row[APP_BUCKET_ALPHABET.index(f"{a}:{bucket}")] = 1.0 / 3
        emission.append(tuple(row))
    return HmmModel(STATES, APP_BUCKET_ALPHABET, (1.0, 0.0, 0.0), DEFAULT_TRANSITION, tuple(emission))


def test_hmm_allocate_degenerate_distribution_reports_bucket_center():
    model = _degenerate_bucket_model(2)
    dep = make_deployment(
        [((100.0, 100.0), (100.0, 110.0)), ((300.0, 100.0), (300.0, 110.0))],
        [(200.0, 200.0), (250.0, 250.0)],
    )
    state = with_deployment(initial_state(), dep)
    result, state2 = hmm_allocate(state, {0: Application.A1, 1: Application.A3}, CFG, model, rng(4))
    for pr in result.results:
        assert pr.decision is not None
        assert pr.decision.sinr_per_rb == 10.0 ** (15.0 / 10.0)
        assert not pr.decision.reused_partner
        assert pr.breakdown is None
    assert result.complexity_w == 0.0


def test_hmm_allocate_deterministic_and_geometry_blind():
    model = train_default_model(CFG, radius_m=500.0, seed_seq=3, n_scenarios=15)
    dep_a = make_deployment(
        [((100.0, 100.0), (100.0, 110.0)), ((300.0, 100.0), (300.0, 110.0))],
        [(200.0, 200.0), (250.0, 250.0), (50.0, 80.0)],
    )
    # same pair/cellular counts, completely different positions
    dep_b = make_deployment(
        [((40.0, 60.0), (40.0, 48.0)), ((120.0, 260.0), (126.0, 260.0))],
        [(90.0, 120.0), (300.0, 390.0), (10.0, 14.0)],
    )
    demands = {0: Application.A2, 1: Application.A3}
    ra, _ = hmm_allocate(with_deployment(initial_state(), dep_a), demands, CFG, model, rng(9))
    rb, _ = hmm_allocate(with_deployment(initial_state(), dep_b), demands, CFG, model, rng(9))
    assert ra == rb  # probabilistic allocation never reads the geometry
    ra2, _ = hmm_allocate(with_deployment(initial_state(), dep_a), demands, CFG, model, rng(9))
    assert ra == ra2


def test_hmm_allocate_throughput_follows_sampled_sinr():
    model = _degenerate_bucket_model(3)
    dep = make_deployment([((100.0, 100.0), (100.0, 110.0))], [(200.0, 200.0)])
    result, _ = hmm_allocate(with_deployment(initial_state(), dep), {0: Application.A1}, CFG, model, rng(1))
    d = result.results[0].decision
    assert result.results[0].throughput_bps == pair_throughput(d.sinr_per_rb, 5, CFG.rb_bandwidth_hz)
    assert result.results[0].throughput_bps == result.iteration_total_bps


def test_hmm_allocate_unserved_without_capable_user():
    model = _degenerate_bucket_model(1)
    dep = make_deployment([((100.0, 100.0), (100.0, 110.0))], [])
    result, _ = hmm_allocate(with_deployment(initial_state(), dep), {0: Application.A1}, CFG, model, rng(1))
    assert result.unserved == (0,)


def test_hmm_allocate_respects_ledger_capacity():
    model = _degenerate_bucket_model(1)
    dep = make_deployment(
        [((100.0, 100.0), (100.0, 110.0)), ((300.0, 100.0), (300.0, 110.0))],
        [(200.0, 200.0)],
    )
    demands = {0: Application.A1, 1: Application.A1}
    result, state = hmm_allocate(with_deployment(initial_state(), dep), demands, CFG, model, rng(2))
    served = [pr for pr in result.results if pr.decision is not None]
    assert len(served) == 1
    assert result.unserved == (1,)
    assert state.ledger.holdings(0) == 1


def test_sinr_bucket_distribution_conditions_on_application():
    r = rng(12)
    m = _random_model(r, alphabet=APP_BUCKET_ALPHABET)
    for app in Application:
        dist = sinr_bucket_distribution(m, app)
        assert len(dist) == N_BUCKETS
        assert sum(dist) == pytest.approx(1.0, abs=1e-12)


def test_build_training_corpus_shapes():
    corpus = build_training_corpus(CFG, 500.0, 12, rng(6))
    assert corpus
    for seq in corpus:
        states = [s for s, _ in seq]
        assert states == [STATE_BASE_STATION, STATE_CELLULAR, STATE_PAIR]
        syms = {x for _, x in seq}
        assert len(syms) == 1
        assert syms.pop() in APP_BUCKET_ALPHABET
    again = build_training_corpus(CFG, 500.0, 12, rng(6))
    assert corpus == again
