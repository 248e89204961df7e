"""Ground-truth evaluation: exact policy values and brute-force optima.

Exact policy evaluation conceptually runs the policy on every full
realization and weights the realized cascade by the realization's
probability. Implemented by grouping: realizations that have produced
identical observations so far are indistinguishable to the policy, so
the run tree branches only where observations actually differ. The
decision logic is the same _GreedyCore the live runners use, which keeps
the two routes transcript-identical.

The non-adaptive optimum scores every affordable seed set; the
full-feedback adaptive optimum does backward induction over observation
states on deliberately tiny instances. Both are meant as referees for
the policies, not as scalable solvers.
"""

import math
from dataclasses import dataclass
from fractions import Fraction

from ._util import derive_seed
from .diffusion import (FullRealization, PartialRealization, SeedSchedule,
                        cascade_size, empty_partial, observe)
from .estimation import (EXACT_EDGE_LIMIT, Estimator, ExactEstimator,
                         InstanceTooLarge, exact_conditional_activation)
from .graph import DirectedGraph, _as_fraction
from .policies import (PolicyConfig, _GreedyCore, best_single_node, run_policy)

ENUMERATION_EDGE_LIMIT = 22          # 2^|E| realizations
NONADAPTIVE_WORK_LIMIT = 1 << 24     # C(n, floor(B)) * 2^|E|


@dataclass(frozen=True)
class ExactEvaluation:
    value: float
    realization_count: int


@dataclass(frozen=True)
class SampledEvaluation:
    mean_spread: float
    std_error: float
    mean_slots: float
    mean_seeds: float
    sample_count: int


def _enumerate_worlds(graph: DirectedGraph):
    """All full realizations with nonzero probability, as (live flags,
    weight) pairs; edge index is the bit position."""
    m = graph.edge_count
    probs = [e.probability for e in graph.edges]
    worlds = []
    for bits in range(1 << m):
        w = 1.0
        for k, p in enumerate(probs):
            w *= p if bits >> k & 1 else 1.0 - p
            if w == 0.0:
                break
        if w == 0.0:
            continue
        live = tuple(bool(bits >> k & 1) for k in range(m))
        worlds.append((FullRealization(live), w))
    return worlds


def _grouped_policy_value(graph: DirectedGraph, core: _GreedyCore,
                          worlds: list, selection_hook=None) -> float:
    """Expected realized cascade of the greedy policy, exact.

    Recurses over groups of worlds sharing the observation trajectory;
    a wait splits the group by what the next slot reveals.
    """
    total = 0.0

    def finish(seeds, indices):
        part = 0.0
        for i in indices:
            realization, weight = worlds[i]
            part += weight * cascade_size(graph, realization, seeds)
        return part

    def step(seeds, entries, slot, last_select, remaining, partial, indices):
        nonlocal total
        while True:
            if core.seeds_complete(seeds):
                total += finish(seeds, indices)
                return
            d = core.decide(seeds, partial, slot, last_select, remaining)
            if d.action == "stop":
                total += finish(seeds, indices)
                return
            if d.action == "select":
                if selection_hook is not None:
                    selection_hook(list(seeds), partial)
                seeds = seeds + [d.node]
                entries = entries + [(d.node, slot)]
                remaining = remaining - graph.costs[d.node]
                last_select = slot
                continue
            # wait: observations may now differ between worlds
            slot += 1
            schedule = SeedSchedule(tuple(entries))
            parts: dict[bytes, list[int]] = {}
            for i in indices:
                psi = observe(graph, worlds[i][0], schedule, slot)
                parts.setdefault(psi.codes, []).append(i)
            for codes, sub in sorted(parts.items()):
                step(list(seeds), list(entries), slot, last_select, remaining,
                     PartialRealization(codes), sub)
            return

    step([], [], 0, 0, core.budget, empty_partial(graph), list(range(len(worlds))))
    return total


def evaluate_policy_exact(graph: DirectedGraph, config: PolicyConfig,
                          selection_hook=None) -> ExactEvaluation:
    """Exact expected spread of a policy run with the exact estimator.

    For the enhanced policy the coin is marginalized analytically: the
    value is the average of the single-best-node arm and the greedy arm.
    """
    if graph.edge_count > ENUMERATION_EDGE_LIMIT:
        raise InstanceTooLarge(
            f"realization enumeration over {graph.edge_count} edges exceeds "
            f"the {ENUMERATION_EDGE_LIMIT}-edge guard")
    worlds = _enumerate_worlds(graph)
    estimator = ExactEstimator()
    if config.kind == "enhanced":
        star, _ = best_single_node(graph, estimator)
        if graph.costs[star] > config.budget:
            raise ValueError(f"best single node {star} is unaffordable")
        single = sum(w * cascade_size(graph, r, [star]) for r, w in worlds)
        core = _GreedyCore(graph, config.alpha, config.budget, estimator,
                           uniform=False)
        greedy = _grouped_policy_value(graph, core, worlds, selection_hook)
        return ExactEvaluation(0.5 * (single + greedy), len(worlds))
    core = _GreedyCore(graph, config.alpha, config.budget, estimator,
                       uniform=config.kind == "uniform")
    value = _grouped_policy_value(graph, core, worlds, selection_hook)
    return ExactEvaluation(value, len(worlds))


def _world_outcome(args):
    graph, config, estimator, rng_seed, index = args
    from .diffusion import sample_full_realization
    world_seed = rng_seed + index
    realization = sample_full_realization(graph, derive_seed(world_seed, "realization"))
    run = run_policy(graph, config, realization, estimator,
                     derive_seed(world_seed, "policy"))
    return run.realized_cascade, run.slots_elapsed, len(run.schedule)


def evaluate_policy_sampled(graph: DirectedGraph, config: PolicyConfig,
                            realizations: int, rng_seed: int,
                            estimator: Estimator, threads: int = 1) -> SampledEvaluation:
    """Mean and standard error of the realized cascade over sampled
    worlds. World index w uses the stream rng_seed + w, so results do not
    depend on scheduling; integer totals are summed before any division."""
    if realizations < 1:
        raise ValueError("need at least one realization")
    jobs = [(graph, config, estimator, rng_seed, w) for w in range(realizations)]
    if threads > 1:
        from concurrent.futures import ProcessPoolExecutor
        with ProcessPoolExecutor(max_workers=threads) as pool:
            outcomes = list(pool.map(_world_outcome, jobs, chunksize=16))
    else:
        outcomes = [_world_outcome(j) for j in jobs]
    spread_sum = sum(o[0] for o in outcomes)
    spread_sq = sum(o[0] * o[0] for o in outcomes)
    slot_sum = sum(o[1] for o in outcomes)
    seed_sum = sum(o[2] for o in outcomes)
    k = realizations
    mean = spread_sum / k
    if k > 1:
        variance = max(0.0, (spread_sq - spread_sum * spread_sum / k) / (k - 1))
        stderr = math.sqrt(variance / k)
    else:
        stderr = 0.0
    return SampledEvaluation(mean, stderr, slot_sum / k, seed_sum / k, k)


def optimal_nonadaptive(graph: DirectedGraph, budget) -> tuple[frozenset[int], float]:
    """Best fixed seed set by exhaustive search, ties to the
    lexicographically smallest set."""
    from itertools import combinations

    frac_budget = _as_fraction(budget)
    if frac_budget <= 0:
        raise ValueError("budget must be positive")
    n = graph.node_count
    cap = min(n, int(frac_budget // min(graph.costs)) if n else 0)
    work = math.comb(n, min(n, max(1, int(frac_budget)))) * (1 << graph.edge_count)
    if work > NONADAPTIVE_WORK_LIMIT:
        raise InstanceTooLarge("non-adaptive search space exceeds the work guard")

    empty = empty_partial(graph)
    best_set: tuple[int, ...] = ()
    best_value = 0.0
    for size in range(1, cap + 1):
        for combo in combinations(range(n), size):
            if sum(graph.costs[v] for v in combo) > frac_budget:
                continue
            value = exact_conditional_activation(graph, combo, empty).expected_cascade
            if value > best_value or (value == best_value and combo < best_set):
                best_set, best_value = combo, value
    return frozenset(best_set), best_value


def _settled_observation(graph: DirectedGraph, live_adj, out_edges,
                         realization: FullRealization, seeds) -> bytes:
    """Full-feedback view: status of every edge leaving a node the
    cascade from these seeds reaches."""
    from .reach import node_mask, reachable_mask

    reached = reachable_mask(live_adj, node_mask(seeds))
    codes = bytearray([2]) * graph.edge_count
    v = 0
    m = reached
    while m:
        low = m & -m
        v = low.bit_length() - 1
        m ^= low
        for idx in out_edges[v]:
            codes[idx] = 1 if realization.live[idx] else 0
    return bytes(codes)


def optimal_full_feedback_adaptive(graph: DirectedGraph, budget) -> float:
    """Optimal adaptive value when each selection sees the previous
    cascade completely. Backward induction over observation states;
    guarded to very small instances (n <= 6, |E| <= 12, B <= 3) and
    uniform unit costs."""
    frac_budget = _as_fraction(budget)
    if frac_budget < 1:
        raise ValueError("budget must allow at least one selection")
    if frac_budget > 3 or graph.node_count > 6 or graph.edge_count > 12:
        raise InstanceTooLarge("adaptive optimum guard: needs n <= 6, "
                               "|E| <= 12, B <= 3")
    if not graph.has_uniform_unit_costs():
        raise ValueError("adaptive optimum supports uniform unit costs only")

    n = graph.node_count
    picks = min(n, int(frac_budget))
    worlds = _enumerate_worlds(graph)
    live_adjs = []
    for realization, _ in worlds:
        adj: list[list[int]] = [[] for _ in range(n)]
        for k, e in enumerate(graph.edges):
            if realization.live[k]:
                adj[e.source].append(e.target)
        live_adjs.append(adj)
    out_edges = graph.out_edges
    memo: dict = {}

    def value(seed_mask: int, indices: tuple[int, ...]) -> float:
        # unnormalized: sum over these worlds of weight * eventual cascade
        if bin(seed_mask).count("1") == picks:
            total = 0.0
            for i in indices:
                realization, w = worlds[i]
                total += w * reach_size(i, seed_mask)
            return total
        key = (seed_mask, indices)
        hit = memo.get(key)
        if hit is not None:
            return hit
        best = None
        for v in range(n):
            bit = 1 << v
            if seed_mask & bit:
                continue
            new_mask = seed_mask | bit
            parts: dict[bytes, list[int]] = {}
            for i in indices:
                psi = _settled_observation(graph, live_adjs[i], out_edges,
                                           worlds[i][0], _mask_list(new_mask))
                parts.setdefault(psi, []).append(i)
            candidate = sum(value(new_mask, tuple(sub)) for sub in parts.values())
            if best is None or candidate > best:
                best = candidate
        memo[key] = best
        return best

    def _mask_list(mask: int) -> list[int]:
        out = []
        while mask:
            low = mask & -mask
            out.append(low.bit_length() - 1)
            mask ^= low
        return out

    def reach_size(index: int, seed_mask: int) -> int:
        from .reach import reachable_mask
        return reachable_mask(live_adjs[index], seed_mask).bit_count()

    return value(0, tuple(range(len(worlds))))
