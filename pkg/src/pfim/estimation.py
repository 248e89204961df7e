"""Conditional activation estimators.

Given seeds S and a partial realization, the quantity of interest is the
conditional expected cascade: for each node the probability it ends up
active once every unobserved edge is resolved by its own coin, and the
sum of those probabilities. Three backends:

* exact: enumerates assignments of the unobserved edges that can still
  matter (source possibly active, target not already certainly active)
  and accumulates exact probability weight per node. Guarded to 22
  relevant edges.
* monte carlo: redraws the unobserved edges; completions are derived
  from (rng seed, observation) only, so every query against the same
  observation state reuses the same worlds. That makes marginal gains
  differences of pointwise-coupled estimates, hence non-negative.
* epsilon wrapper: multiplies each cascade value produced by an inner
  backend by a factor in [1-eps, 1+eps], either drawn uniformly per
  query or pinned to an end of the interval.

Nodes that cannot be activated at all (cut off once observed-blocked
edges and zero-probability edges are removed) form the zero set; both
backends pin them to exactly 0, and certainly-active nodes to exactly 1.
"""

import math
import random
from collections import OrderedDict
from dataclasses import dataclass, replace

from ._util import derive_seed
from .diffusion import EdgeState, PartialRealization
from .graph import DirectedGraph
from .reach import closure_masks, mask_nodes, node_mask, reachable_mask

EXACT_EDGE_LIMIT = 22


class InstanceTooLarge(RuntimeError):
    """Raised when an enumeration guard would be exceeded."""


@dataclass(frozen=True)
class ActivationEstimate:
    """Per-node activation probabilities under one backend.

    expected_cascade is the backend's value for the summed probabilities;
    for the exact and monte carlo backends it equals sum(probability
    .values()) up to float rounding, while the epsilon wrapper perturbs
    only the total.
    """

    probability: dict[int, float]
    expected_cascade: float
    zero_set: frozenset[int]
    backend: str


def _check_state(graph: DirectedGraph, seeds, partial: PartialRealization) -> frozenset[int]:
    if len(partial.codes) != graph.edge_count:
        raise ValueError("partial realization does not match graph edge count")
    seed_set = frozenset(seeds)
    for v in seed_set:
        if not (0 <= v < graph.node_count):
            raise ValueError(f"seed node {v} out of range")
    return seed_set


def zero_probability_set(graph: DirectedGraph, seeds,
                         partial: PartialRealization) -> frozenset[int]:
    """Nodes with conditional activation probability exactly zero.

    Deterministic reachability: a node is outside the set iff some path
    from the seeds avoids observed-blocked edges and zero-probability
    unobserved edges. With no seeds every node qualifies.
    """
    seed_set = _check_state(graph, seeds, partial)
    adj: list[list[int]] = [[] for _ in range(graph.node_count)]
    for k, e in enumerate(graph.edges):
        c = partial.codes[k]
        if c == EdgeState.LIVE or (c == EdgeState.UNOBSERVED and e.probability > 0.0):
            adj[e.source].append(e.target)
    reached = reachable_mask(adj, node_mask(seed_set))
    return frozenset(v for v in range(graph.node_count) if not reached >> v & 1)


def _split_edges(graph: DirectedGraph, partial: PartialRealization, seed_set):
    """Classify edges for exact enumeration.

    Returns (certain adjacency, certainly-active mask, zero set, relevant
    unobserved edges). Certain adjacency holds observed-live edges plus
    unobserved probability-1 edges; relevant edges are the unobserved
    0 < p < 1 edges whose source can possibly activate and whose target
    is not already certain.
    """
    certain_adj: list[list[int]] = [[] for _ in range(graph.node_count)]
    for k, e in enumerate(graph.edges):
        c = partial.codes[k]
        if c == EdgeState.LIVE or (c == EdgeState.UNOBSERVED and e.probability == 1.0):
            certain_adj[e.source].append(e.target)
    certain_mask = reachable_mask(certain_adj, node_mask(seed_set))
    zero = zero_probability_set(graph, seed_set, partial)
    relevant = []
    for k, e in enumerate(graph.edges):
        if partial.codes[k] != EdgeState.UNOBSERVED:
            continue
        if not 0.0 < e.probability < 1.0:
            continue
        if e.source in zero or certain_mask >> e.target & 1:
            continue
        relevant.append((k, e))
    return certain_adj, certain_mask, zero, relevant


def exact_conditional_activation(graph: DirectedGraph, seeds,
                                 partial: PartialRealization) -> ActivationEstimate:
    """Exact conditional activation probabilities by edge enumeration."""
    seed_set = _check_state(graph, seeds, partial)
    certain_adj, certain_mask, zero, relevant = _split_edges(graph, partial, seed_set)
    if len(relevant) > EXACT_EDGE_LIMIT:
        raise InstanceTooLarge(
            f"instance too large for exact backend: {len(relevant)} relevant "
            f"unobserved edges exceed the limit of {EXACT_EDGE_LIMIT}")

    n = graph.node_count
    # extra edges grouped by source so each assignment avoids rebuilding adjacency
    extra: list[list[tuple[int, int]]] = [[] for _ in range(n)]
    probs = []
    for bit_pos, (_, e) in enumerate(relevant):
        extra[e.source].append((1 << bit_pos, e.target))
        probs.append(e.probability)

    acc = [0.0] * n
    start_mask = node_mask(seed_set)
    for bits in range(1 << len(relevant)):
        w = 1.0
        for b, p in enumerate(probs):
            w *= p if bits >> b & 1 else 1.0 - p
        seen = start_mask
        stack = list(seed_set)
        while stack:
            u = stack.pop()
            for v in certain_adj[u]:
                bit = 1 << v
                if not seen & bit:
                    seen |= bit
                    stack.append(v)
            for ebit, v in extra[u]:
                if bits & ebit:
                    bit = 1 << v
                    if not seen & bit:
                        seen |= bit
                        stack.append(v)
        for v in mask_nodes(seen):
            acc[v] += w

    for v in mask_nodes(certain_mask):
        acc[v] = 1.0
    for v in zero:
        acc[v] = 0.0
    probability = {v: acc[v] for v in range(n)}
    return ActivationEstimate(probability, math.fsum(acc), zero, "exact")


class Estimator:
    """Backend interface: activation detail, cascade values, gains."""

    def activation(self, graph: DirectedGraph, seeds,
                   partial: PartialRealization) -> ActivationEstimate:
        raise NotImplementedError

    def expected_cascade(self, graph: DirectedGraph, seeds,
                         partial: PartialRealization) -> float:
        return self.activation(graph, seeds, partial).expected_cascade

    def gain(self, graph: DirectedGraph, seeds, partial: PartialRealization,
             candidate: int) -> float:
        raise NotImplementedError

    def reseeded(self, salt: int) -> "Estimator":
        """A copy whose random draws derive from (own seed, salt)."""
        return self

    @property
    def tag(self) -> str:
        raise NotImplementedError


class ExactEstimator(Estimator):
    """Enumeration backend with a small memo over (seeds, observation)."""

    def __init__(self):
        self._cache: OrderedDict = OrderedDict()

    def activation(self, graph, seeds, partial):
        key = (id(graph), frozenset(seeds), partial.codes)
        hit = self._cache.get(key)
        if hit is not None:
            self._cache.move_to_end(key)
            return hit
        est = exact_conditional_activation(graph, seeds, partial)
        self._cache[key] = est
        if len(self._cache) > 128:
            self._cache.popitem(last=False)
        return est

    def gain(self, graph, seeds, partial, candidate):
        with_c = self.activation(graph, frozenset(seeds) | {candidate}, partial)
        base = self.activation(graph, seeds, partial)
        g = with_c.expected_cascade - base.expected_cascade
        if g < 0.0:
            # monotone in exact arithmetic; tolerate float dust only
            if g < -1e-9:
                raise AssertionError(f"exact gain {g} below zero")
            g = 0.0
        return g

    @property
    def tag(self):
        return "exact"


class MonteCarloEstimator(Estimator):
    """Sampling backend with completions shared per observation state.

    A batch of completions is a pure function of (rng_seed, observation),
    never of the seed set, so f(S), f(S + v), and every candidate in a
    selection round are evaluated against the same worlds.
    """

    def __init__(self, samples: int, rng_seed: int):
        if samples < 1:
            raise ValueError("sample count must be positive")
        self.samples = samples
        self.rng_seed = rng_seed
        self._batches: OrderedDict = OrderedDict()

    def reseeded(self, salt):
        return MonteCarloEstimator(self.samples, derive_seed(self.rng_seed, salt))

    @property
    def tag(self):
        return f"mc({self.samples})"

    def _batch(self, graph: DirectedGraph, partial: PartialRealization) -> list[list[int]]:
        """Per-completion, per-node reachability masks."""
        key = (id(graph), partial.codes)
        hit = self._batches.get(key)
        if hit is not None:
            self._batches.move_to_end(key)
            return hit
        rng = random.Random(derive_seed(self.rng_seed, "completions", partial.codes))
        n = graph.node_count
        base_adj: list[list[int]] = [[] for _ in range(n)]
        open_edges = []
        for k, e in enumerate(graph.edges):
            c = partial.codes[k]
            if c == EdgeState.LIVE:
                base_adj[e.source].append(e.target)
            elif c == EdgeState.UNOBSERVED:
                open_edges.append(e)
        batch = []
        for _ in range(self.samples):
            adj = [list(a) for a in base_adj]
            for e in open_edges:
                if rng.random() < e.probability:
                    adj[e.source].append(e.target)
            batch.append(closure_masks(n, adj))
        self._batches[key] = batch
        if len(self._batches) > 8:
            self._batches.popitem(last=False)
        return batch

    def activation(self, graph, seeds, partial):
        seed_set = _check_state(graph, seeds, partial)
        zero = zero_probability_set(graph, seed_set, partial)
        n = graph.node_count
        counts = [0] * n
        if seed_set:
            batch = self._batch(graph, partial)
            for masks in batch:
                reached = 0
                for s in seed_set:
                    reached |= masks[s]
                for v in mask_nodes(reached):
                    counts[v] += 1
        k = self.samples
        probability = {}
        for v in range(n):
            probability[v] = 0.0 if v in zero else counts[v] / k
        return ActivationEstimate(probability, math.fsum(probability.values()),
                                  zero, self.tag)

    def gain(self, graph, seeds, partial, candidate):
        seed_set = _check_state(graph, seeds, partial)
        batch = self._batch(graph, partial)
        total = 0
        for masks in batch:
            reached = 0
            for s in seed_set:
                reached |= masks[s]
            total += (reached | masks[candidate]).bit_count() - reached.bit_count()
        return total / self.samples


def mc_conditional_activation(graph: DirectedGraph, seeds, partial: PartialRealization,
                              samples: int, rng_seed: int) -> ActivationEstimate:
    """Monte carlo activation estimate; zero-set nodes are exactly 0."""
    return MonteCarloEstimator(samples, rng_seed).activation(graph, seeds, partial)


_EPS_MODES = ("random", "adversarial-high", "adversarial-low")


class EpsilonEstimator(Estimator):
    """Wraps another backend and perturbs each cascade value it emits.

    Factors: "adversarial-high" pins 1+eps, "adversarial-low" pins 1-eps,
    "random" draws uniformly from [1-eps, 1+eps] per query, so output is
    deterministic given rng_seed and query order. A gain is the
    difference of two independently perturbed values and may be negative.
    """

    def __init__(self, inner: Estimator, epsilon: float, mode: str, rng_seed: int = 0):
        if not (0.0 <= epsilon < 1.0):
            raise ValueError("epsilon must lie in [0, 1)")
        if mode not in _EPS_MODES:
            raise ValueError(f"unknown perturbation mode {mode!r}")
        self.inner = inner
        self.epsilon = epsilon
        self.mode = mode
        self.rng_seed = rng_seed
        self._rng = random.Random(derive_seed(rng_seed, "eps-stream"))

    def reseeded(self, salt):
        return EpsilonEstimator(self.inner.reseeded(salt), self.epsilon, self.mode,
                                derive_seed(self.rng_seed, salt))

    @property
    def tag(self):
        return f"eps({self.epsilon:g},{self.mode})+{self.inner.tag}"

    def _factor(self) -> float:
        if self.mode == "adversarial-high":
            return 1.0 + self.epsilon
        if self.mode == "adversarial-low":
            return 1.0 - self.epsilon
        return self._rng.uniform(1.0 - self.epsilon, 1.0 + self.epsilon)

    def activation(self, graph, seeds, partial):
        est = self.inner.activation(graph, seeds, partial)
        return replace(est, expected_cascade=est.expected_cascade * self._factor(),
                       backend=self.tag)

    def expected_cascade(self, graph, seeds, partial):
        return self.inner.expected_cascade(graph, seeds, partial) * self._factor()

    def gain(self, graph, seeds, partial, candidate):
        seed_set = _check_state(graph, seeds, partial)
        with_c = self.inner.expected_cascade(graph, seed_set | {candidate}, partial)
        base = self.inner.expected_cascade(graph, seed_set, partial)
        return with_c * self._factor() - base * self._factor()


def epsilon_wrap(inner: Estimator, epsilon: float, mode: str,
                 rng_seed: int = 0) -> Estimator:
    """Wrap an estimator in the multiplicative perturbation layer.

    epsilon = 0 is the identity on values (every factor is exactly 1).
    """
    return EpsilonEstimator(inner, epsilon, mode, rng_seed)


def marginal_gain(estimator: Estimator, graph: DirectedGraph, seeds,
                  partial: PartialRealization, candidate: int) -> float:
    """Estimated f(seeds + candidate) - f(seeds) under the backend."""
    seed_set = _check_state(graph, seeds, partial)
    if candidate in seed_set:
        raise ValueError(f"candidate {candidate} is already a seed")
    if not (0 <= candidate < graph.node_count):
        raise ValueError(f"candidate {candidate} out of range")
    return estimator.gain(graph, seed_set, partial, candidate)
