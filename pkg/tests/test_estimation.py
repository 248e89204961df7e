import math
import random

import pytest

from pfim.diffusion import (PartialRealization, SeedSchedule, empty_partial,
                            observe, sample_full_realization)
from pfim.estimation import (EpsilonEstimator, ExactEstimator, InstanceTooLarge,
                             MonteCarloEstimator, epsilon_wrap,
                             exact_conditional_activation, marginal_gain,
                             mc_conditional_activation, zero_probability_set)
from pfim.graph import generate_graph, load_graph

from bruteforce import naive_activation_probability

CHAIN = load_graph("0 1 0.5\n1 2 0.5\n")
DIAMOND = load_graph("0 1 0.5\n0 2 0.5\n1 3 0.5\n2 3 0.5\n")


def observed_instance(seed):
    """Random small graph plus a partial state actually produced by observe."""
    rng = random.Random(seed)
    n = rng.randrange(3, 7)
    m = min(rng.randrange(1, 2 * n), n * (n - 1))
    g = generate_graph(n, m, "erdos-renyi", 60, seed)
    realization = sample_full_realization(g, rng.randrange(1 << 30))
    k = rng.randrange(1, min(3, n) + 1)
    nodes = rng.sample(range(n), k)
    schedule = SeedSchedule(tuple((v, i) for i, v in enumerate(nodes)))
    t = (k - 1) + rng.randrange(0, n + 1)
    psi = observe(g, realization, schedule, t)
    return g, sorted(schedule.nodes), psi


class TestExactActivation:
    def test_chain_from_empty_state(self):
        est = exact_conditional_activation(CHAIN, [0], empty_partial(CHAIN))
        assert est.probability == {0: 1.0, 1: 0.5, 2: 0.25}
        assert est.expected_cascade == pytest.approx(1.75, abs=1e-12)

    def test_diamond_join_probability(self):
        est = exact_conditional_activation(DIAMOND, [0], empty_partial(DIAMOND))
        assert est.probability[3] == pytest.approx(0.4375, abs=1e-12)
        assert est.expected_cascade == pytest.approx(2.4375, abs=1e-12)

    def test_conditioning_on_live_edge(self):
        psi = PartialRealization(bytes([1, 2]))  # 0->1 live, 1->2 unknown
        est = exact_conditional_activation(CHAIN, [0], psi)
        assert est.probability == {0: 1.0, 1: 1.0, 2: 0.5}

    def test_conditioning_on_blocked_edge(self):
        psi = PartialRealization(bytes([0, 2]))
        est = exact_conditional_activation(CHAIN, [0], psi)
        assert est.probability == {0: 1.0, 1: 0.0, 2: 0.0}
        assert est.zero_set == {1, 2}

    def test_matches_enumeration_reference(self):
        for seed in range(60):
            g, seeds, psi = observed_instance(seed)
            got = exact_conditional_activation(g, seeds, psi)
            want = naive_activation_probability(g, seeds, psi)
            for v in range(g.node_count):
                assert got.probability[v] == pytest.approx(want[v], abs=1e-9), \
                    (seed, v)
            assert got.expected_cascade == pytest.approx(
                math.fsum(want.values()), abs=1e-9)

    def test_guard_rejects_wide_instances(self):
        g = generate_graph(12, 40, "erdos-renyi", 50, 3)
        with pytest.raises(InstanceTooLarge):
            exact_conditional_activation(g, [0, 1, 2], empty_partial(g))

    def test_guard_counts_relevant_edges_only(self):
        # 40 edges but all observed: nothing left to enumerate
        g = generate_graph(12, 40, "erdos-renyi", 50, 3)
        realization = sample_full_realization(g, 1)
        codes = bytes(1 if live else 0 for live in realization.live)
        est = exact_conditional_activation(g, [0], PartialRealization(codes))
        assert est.expected_cascade == sum(
            1.0 for v, p in est.probability.items() if p == 1.0)


class TestZeroProbabilitySet:
    def test_matches_exact_zeros(self):
        for seed in range(80):
            g, seeds, psi = observed_instance(seed)
            zero = zero_probability_set(g, seeds, psi)
            exact = exact_conditional_activation(g, seeds, psi)
            truly_zero = {v for v, p in exact.probability.items() if p == 0.0}
            assert zero == truly_zero, seed

    def test_zero_probability_edge_blocks(self):
        g = load_graph("0 1 0\n1 2 1\n")
        zero = zero_probability_set(g, [0], empty_partial(g))
        assert zero == {1, 2}

    def test_observed_live_zero_probability_edge_conducts(self):
        # an impossible edge that was nevertheless observed live counts;
        # only unobserved edges get filtered by probability
        g = load_graph("0 1 0.5\n1 2 1\n")
        psi = PartialRealization(bytes([1, 2]))
        assert zero_probability_set(g, [0], psi) == set()


class TestMonteCarlo:
    def test_agrees_with_exact_within_three_sigma(self):
        k = 6000
        bad = 0
        for seed in range(25):
            g, seeds, psi = observed_instance(seed)
            exact = exact_conditional_activation(g, seeds, psi)
            mc = mc_conditional_activation(g, seeds, psi, k, seed)
            for v in range(g.node_count):
                p = exact.probability[v]
                sigma = math.sqrt(p * (1 - p) / k)
                if abs(mc.probability[v] - p) > 3 * sigma + 1e-12:
                    bad += 1
        assert bad == 0

    def test_zero_set_is_exact_not_sampled(self):
        for seed in range(40):
            g, seeds, psi = observed_instance(seed)
            mc = mc_conditional_activation(g, seeds, psi, 50, seed)
            assert mc.zero_set == zero_probability_set(g, seeds, psi)
            for v in mc.zero_set:
                assert mc.probability[v] == 0.0

    def test_deterministic_in_seed(self):
        a = mc_conditional_activation(DIAMOND, [0], empty_partial(DIAMOND), 500, 9)
        b = mc_conditional_activation(DIAMOND, [0], empty_partial(DIAMOND), 500, 9)
        assert a.probability == b.probability

    def test_gain_never_negative_via_common_completions(self):
        est = MonteCarloEstimator(400, 17)
        for seed in range(30):
            g, seeds, psi = observed_instance(seed)
            for v in range(g.node_count):
                if v in seeds:
                    continue
                assert est.gain(g, seeds, psi, v) >= 0.0

    def test_query_order_does_not_change_answers(self):
        g, seeds, psi = observed_instance(4)
        others = [v for v in range(g.node_count) if v not in seeds]
        forward = {v: MonteCarloEstimator(300, 5).gain(g, seeds, psi, v)
                   for v in others}
        backward = {}
        est = MonteCarloEstimator(300, 5)
        for v in reversed(others):
            backward[v] = est.gain(g, seeds, psi, v)
        assert forward == backward

    def test_backend_tag(self):
        mc = mc_conditional_activation(DIAMOND, [0], empty_partial(DIAMOND), 128, 0)
        assert mc.backend == "mc(128)"


class TestGain:
    def test_chain_marginal(self):
        est = ExactEstimator()
        gain = est.gain(CHAIN, [0], empty_partial(CHAIN), 2)
        assert gain == pytest.approx(0.75, abs=1e-12)

    def test_matches_activation_difference(self):
        est = ExactEstimator()
        for seed in range(30):
            g, seeds, psi = observed_instance(seed)
            base = est.activation(g, seeds, psi).expected_cascade
            for v in range(g.node_count):
                if v in seeds:
                    continue
                with_v = est.activation(g, seeds + [v], psi).expected_cascade
                assert est.gain(g, seeds, psi, v) == pytest.approx(
                    with_v - base, abs=1e-9)

    def test_marginal_gain_rejects_seeded_candidate(self):
        with pytest.raises(ValueError):
            marginal_gain(ExactEstimator(), CHAIN, [0], empty_partial(CHAIN), 0)

    def test_marginal_gain_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            marginal_gain(ExactEstimator(), CHAIN, [0], empty_partial(CHAIN), 9)


class TestEpsilonWrapper:
    def test_adversarial_high_scales_up(self):
        inner = ExactEstimator()
        wrapped = epsilon_wrap(inner, 0.2, "adversarial-high", 0)
        base = inner.activation(DIAMOND, [0], empty_partial(DIAMOND))
        high = wrapped.activation(DIAMOND, [0], empty_partial(DIAMOND))
        assert high.expected_cascade == pytest.approx(
            1.2 * base.expected_cascade, rel=1e-12)

    def test_adversarial_low_scales_down(self):
        wrapped = epsilon_wrap(ExactEstimator(), 0.3, "adversarial-low", 0)
        est = wrapped.activation(DIAMOND, [0], empty_partial(DIAMOND))
        assert est.expected_cascade == pytest.approx(0.7 * 2.4375, rel=1e-12)

    def test_random_mode_stays_inside_band(self):
        wrapped = epsilon_wrap(ExactEstimator(), 0.25, "random", 3)
        for _ in range(50):
            est = wrapped.activation(DIAMOND, [0], empty_partial(DIAMOND))
            ratio = est.expected_cascade / 2.4375
            assert 0.75 - 1e-12 <= ratio <= 1.25 + 1e-12

    def test_random_mode_deterministic_per_seed(self):
        a = epsilon_wrap(ExactEstimator(), 0.25, "random", 3)
        b = epsilon_wrap(ExactEstimator(), 0.25, "random", 3)
        seq_a = [a.activation(DIAMOND, [0], empty_partial(DIAMOND)).expected_cascade
                 for _ in range(10)]
        seq_b = [b.activation(DIAMOND, [0], empty_partial(DIAMOND)).expected_cascade
                 for _ in range(10)]
        assert seq_a == seq_b

    def test_gain_may_go_negative(self):
        wrapped = epsilon_wrap(ExactEstimator(), 0.9, "random", 11)
        gains = [wrapped.gain(CHAIN, [0], empty_partial(CHAIN), 2)
                 for _ in range(200)]
        assert any(g < 0 for g in gains)
        assert any(g > 0 for g in gains)

    def test_zero_set_untouched(self):
        g = load_graph("0 1 0\n1 2 1\n")
        wrapped = epsilon_wrap(ExactEstimator(), 0.5, "adversarial-high", 0)
        est = wrapped.activation(g, [0], empty_partial(g))
        assert est.zero_set == {1, 2}

    def test_mode_validation(self):
        with pytest.raises(ValueError):
            epsilon_wrap(ExactEstimator(), 0.5, "sideways", 0)

    def test_epsilon_validation(self):
        with pytest.raises(ValueError):
            epsilon_wrap(ExactEstimator(), 1.5, "random", 0)
