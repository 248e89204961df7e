"""Alpha-greedy seeding policies under partial feedback.

The common loop: pick a first seed unconditionally, then repeatedly check
whether the estimated cascade per still-activatable node clears the
threshold alpha. If it does, seed the best candidate in the current slot
(several selections may share a slot); if not, let one slot of diffusion
pass and fold the new observations in. alpha = 0 never waits and
degenerates to non-adaptive greedy; alpha = 1 waits until every node is
certainly active or certainly unreachable, which is full feedback.

Three selection rules: uniform cost (argmax gain, exactly B seeds),
non-uniform cost (argmax gain per cost; terminates early if the argmax
is unaffordable), and the enhanced variant that flips a fair coin
between the best single node and the non-uniform greedy run.

Termination under estimators that can hold the condition below alpha
forever (an adversarial low perturbation at alpha = 1): once the newest
seed has been active for node_count slots every observation has settled,
so further waiting cannot change anything; the loop then selects anyway
rather than spin. With the exact backend the condition is already true
at that point and the guard never fires.
"""

import random
from dataclasses import dataclass
from fractions import Fraction

from ._util import derive_seed, fmt_g
from .diffusion import (FullRealization, PartialRealization, SeedSchedule,
                        cascade_size, empty_partial, observe)
from .estimation import ActivationEstimate, Estimator
from .graph import DirectedGraph, _as_fraction


@dataclass(frozen=True)
class RoundLog:
    """One policy-loop iteration: either a selection or a waited slot."""

    round_index: int
    slot_index: int
    action: str                      # "select" | "wait"
    node: int | None
    gain: float | None
    remaining_budget: Fraction | None
    condition_value: float | None    # None before the first seed exists
    zero_set_size: int


@dataclass(frozen=True)
class PolicyRun:
    schedule: SeedSchedule
    rounds: tuple[RoundLog, ...]
    realized_cascade: int
    total_cost: Fraction
    slots_elapsed: int
    arm: str | None = None           # enhanced only: "single" or "greedy"


@dataclass(frozen=True)
class PolicyConfig:
    kind: str
    alpha: float
    budget: Fraction

    def __post_init__(self):
        if self.kind not in ("uniform", "nonuniform", "enhanced"):
            raise ValueError(f"unknown policy kind {self.kind!r}")
        if not (0.0 <= self.alpha <= 1.0):
            raise ValueError("alpha must lie in [0, 1]")
        if self.budget <= 0:
            raise ValueError("budget must be positive")


def condition_satisfied(estimate: ActivationEstimate, alpha: float,
                        node_count: int) -> bool:
    """The adaptivity gate: estimated cascade per still-activatable node
    reaches alpha. Vacuously true at alpha = 0; false when every node is
    in the zero set (no seeds yet)."""
    if alpha == 0.0:
        return True
    live_nodes = node_count - len(estimate.zero_set)
    return live_nodes > 0 and estimate.expected_cascade / live_nodes >= alpha


def transcript_lines(run: PolicyRun) -> list[str]:
    """Render round logs in the stable transcript format."""
    lines = []
    for rl in run.rounds:
        cond = "na" if rl.condition_value is None else fmt_g(rl.condition_value)
        if rl.action == "select":
            act = f"select:{rl.node},{fmt_g(rl.gain)},{rl.remaining_budget}"
        else:
            act = "wait"
        lines.append(f"r={rl.round_index} slot={rl.slot_index} action={act} "
                     f"cond={cond} |O|={rl.zero_set_size}")
    return lines


@dataclass(frozen=True)
class _Decision:
    action: str                  # "select" | "wait" | "stop"
    node: int | None = None
    gain: float | None = None
    condition_value: float | None = None
    zero_set_size: int = 0


class _GreedyCore:
    """Per-round decision logic shared by the live runners and the exact
    policy evaluator. Holds no world state; the caller owns seeds, slot,
    and observations."""

    def __init__(self, graph: DirectedGraph, alpha: float, budget,
                 estimator: Estimator, uniform: bool):
        if not (0.0 <= alpha <= 1.0):
            raise ValueError("alpha must lie in [0, 1]")
        self.graph = graph
        self.alpha = alpha
        self.estimator = estimator
        self.uniform = uniform
        self.stall_bound = max(graph.node_count, 1)
        if uniform:
            frac = _as_fraction(budget)
            if frac.denominator != 1 or frac < 1:
                raise ValueError("uniform-cost policy needs an integer budget >= 1")
            if not graph.has_uniform_unit_costs():
                raise ValueError("uniform-cost policy requires all node costs equal 1")
            self.budget = frac
        else:
            self.budget = _as_fraction(budget)
            if self.budget <= 0:
                raise ValueError("budget must be positive")
            if graph.node_count == 0 or min(graph.costs) > self.budget:
                raise ValueError("no affordable first node")

    def seeds_complete(self, seeds: list[int]) -> bool:
        if len(seeds) == self.graph.node_count:
            return True
        return self.uniform and len(seeds) == int(self.budget)

    def decide(self, seeds: list[int], partial: PartialRealization, slot: int,
               last_select_slot: int, remaining: Fraction) -> _Decision:
        graph = self.graph
        estimate = self.estimator.activation(graph, seeds, partial)
        zero_size = len(estimate.zero_set)
        first = not seeds
        if first:
            cond_value = None
            proceed = True
        else:
            live_nodes = graph.node_count - zero_size
            # a selected seed always sits outside the zero set
            assert live_nodes > 0, "zero set swallowed a seeded node"
            cond_value = estimate.expected_cascade / live_nodes
            proceed = condition_satisfied(estimate, self.alpha, graph.node_count)
        if not proceed and slot - last_select_slot < self.stall_bound:
            return _Decision("wait", condition_value=cond_value,
                             zero_set_size=zero_size)

        seeded = set(seeds)
        best = None
        best_score = best_gain = 0.0
        for v in range(graph.node_count):
            if v in seeded:
                continue
            if first and not self.uniform and graph.costs[v] > remaining:
                continue
            g = self.estimator.gain(graph, seeds, partial, v)
            score = g if self.uniform else g / float(graph.costs[v])
            if best is None or score > best_score:
                best, best_score, best_gain = v, score, g
        if best is None:
            return _Decision("stop", condition_value=cond_value,
                             zero_set_size=zero_size)
        if not self.uniform and not first and remaining - graph.costs[best] < 0:
            # the ratio argmax is unaffordable: terminate, no substitution
            return _Decision("stop", condition_value=cond_value,
                             zero_set_size=zero_size)
        return _Decision("select", node=best, gain=best_gain,
                         condition_value=cond_value, zero_set_size=zero_size)


def _run_greedy(graph: DirectedGraph, alpha: float, budget,
                realization: FullRealization, estimator: Estimator,
                rng_seed: int, uniform: bool) -> PolicyRun:
    core = _GreedyCore(graph, alpha, budget,
                       estimator.reseeded(derive_seed(rng_seed, "estimation")),
                       uniform)
    partial = empty_partial(graph)
    entries: list[tuple[int, int]] = []
    seeds: list[int] = []
    rounds: list[RoundLog] = []
    slot = 0
    last_select_slot = 0
    remaining = core.budget
    round_index = 0
    while not core.seeds_complete(seeds):
        d = core.decide(seeds, partial, slot, last_select_slot, remaining)
        if d.action == "stop":
            break
        if d.action == "select":
            seeds.append(d.node)
            entries.append((d.node, slot))
            remaining -= graph.costs[d.node]
            last_select_slot = slot
            rounds.append(RoundLog(round_index, slot, "select", d.node, d.gain,
                                   remaining, d.condition_value, d.zero_set_size))
        else:
            rounds.append(RoundLog(round_index, slot, "wait", None, None, None,
                                   d.condition_value, d.zero_set_size))
            slot += 1
            partial = observe(graph, realization, SeedSchedule(tuple(entries)), slot)
        round_index += 1
    schedule = SeedSchedule(tuple(entries))
    return PolicyRun(schedule, tuple(rounds),
                     cascade_size(graph, realization, seeds),
                     core.budget - remaining, slot)


def run_alpha_greedy_uniform(graph: DirectedGraph, alpha: float, budget,
                             realization: FullRealization, estimator: Estimator,
                             rng_seed: int) -> PolicyRun:
    """Uniform-cost alpha-greedy: argmax marginal gain, exactly B seeds
    (fewer only if the graph runs out of nodes)."""
    return _run_greedy(graph, alpha, budget, realization, estimator, rng_seed,
                       uniform=True)


def run_alpha_greedy_nonuniform(graph: DirectedGraph, alpha: float, budget,
                                realization: FullRealization, estimator: Estimator,
                                rng_seed: int) -> PolicyRun:
    """Cost-sensitive alpha-greedy: argmax gain per unit cost.

    The first selection considers only affordable nodes; afterwards, if
    the global ratio argmax does not fit the remaining budget the run
    terminates without substituting a cheaper node.
    """
    return _run_greedy(graph, alpha, budget, realization, estimator, rng_seed,
                       uniform=False)


def best_single_node(graph: DirectedGraph, estimator: Estimator) -> tuple[int, float]:
    """The node with the largest unconditional expected cascade, smallest
    id on ties, together with that value."""
    if graph.node_count == 0:
        raise ValueError("empty graph has no best node")
    partial = empty_partial(graph)
    best, best_value = 0, None
    for v in range(graph.node_count):
        value = estimator.expected_cascade(graph, frozenset([v]), partial)
        if best_value is None or value > best_value:
            best, best_value = v, value
    return best, best_value


def run_enhanced(graph: DirectedGraph, alpha: float, budget,
                 realization: FullRealization, estimator: Estimator,
                 rng_seed: int) -> PolicyRun:
    """Fair coin between seeding only the best single node and the full
    non-uniform greedy run. The greedy arm reproduces
    run_alpha_greedy_nonuniform with the same seeds exactly."""
    frac_budget = _as_fraction(budget)
    est_single = estimator.reseeded(derive_seed(rng_seed, "estimation", "single"))
    star, star_value = best_single_node(graph, est_single)
    star_cost = graph.costs[star]
    if star_cost > frac_budget:
        raise ValueError(f"best single node {star} is unaffordable "
                         f"(cost {star_cost} exceeds budget {frac_budget})")
    coin = random.Random(derive_seed(rng_seed, "arm-coin")).random() < 0.5
    if coin:
        schedule = SeedSchedule(((star, 0),))
        rounds = (RoundLog(0, 0, "select", star, star_value,
                           frac_budget - star_cost, None, graph.node_count),)
        return PolicyRun(schedule, rounds,
                         cascade_size(graph, realization, [star]),
                         star_cost, 0, arm="single")
    run = run_alpha_greedy_nonuniform(graph, alpha, budget, realization,
                                      estimator, rng_seed)
    return PolicyRun(run.schedule, run.rounds, run.realized_cascade,
                     run.total_cost, run.slots_elapsed, arm="greedy")


def run_policy(graph: DirectedGraph, config: PolicyConfig,
               realization: FullRealization, estimator: Estimator,
               rng_seed: int) -> PolicyRun:
    """Dispatch a configured policy against one realization."""
    if config.kind == "uniform":
        return run_alpha_greedy_uniform(graph, config.alpha, config.budget,
                                        realization, estimator, rng_seed)
    if config.kind == "nonuniform":
        return run_alpha_greedy_nonuniform(graph, config.alpha, config.budget,
                                           realization, estimator, rng_seed)
    return run_enhanced(graph, config.alpha, config.budget, realization,
                        estimator, rng_seed)
