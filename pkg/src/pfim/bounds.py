"""Closed-form approximation guarantees for the seeding policies.

Each function evaluates one worst-case bound. The plain variants return
the fraction of the optimal adaptive value the policy is guaranteed
(dimensionless, in [0, 1]); the *_eps variants account for a
multiplicative estimation error and return an absolute spread bound
built from the optimal value, so they can go negative. Negative values
are returned as-is; callers flag them as vacuous rather than clamping.
"""

import math


def _threshold_term(alpha: float, coefficient: float) -> float:
    """alpha * (1 - exp(-coefficient / alpha)), continuously 0 at alpha=0."""
    if alpha == 0.0:
        return 0.0
    return alpha * (1.0 - math.exp(-coefficient / alpha))


def _check_alpha(alpha: float):
    if not (0.0 <= alpha <= 1.0):
        raise ValueError("alpha must lie in [0, 1]")


def _check_epsilon(epsilon: float):
    if not (0.0 <= epsilon < 1.0):
        raise ValueError("epsilon must lie in [0, 1)")


def is_vacuous(bound_value: float) -> bool:
    return bound_value < 0.0


def bound_uniform(alpha: float) -> float:
    """Guaranteed fraction for the uniform-cost policy: alpha(1 - e^(-1/alpha))."""
    _check_alpha(alpha)
    return _threshold_term(alpha, 1.0)


def bound_nonuniform(alpha: float, budget: float, max_cost: float) -> float:
    """Uniform bound weakened by the heaviest node cost relative to budget."""
    _check_alpha(alpha)
    if budget <= 0:
        raise ValueError("budget must be positive")
    if max_cost < 0:
        raise ValueError("max cost must be non-negative")
    return _threshold_term(alpha, (budget - max_cost) / budget)


def bound_enhanced(alpha: float) -> float:
    """The coin-flip variant recovers half the uniform guarantee."""
    return 0.5 * bound_uniform(alpha)


def bound_uniform_eps(alpha: float, epsilon: float, node_count: int,
                      optimal_value: float) -> float:
    """Absolute spread bound for the uniform policy under a
    multiplicative estimation error of at most epsilon."""
    _check_alpha(alpha)
    _check_epsilon(epsilon)
    lead = _threshold_term(alpha, 1.0 - epsilon) / (1.0 + epsilon)
    return lead * optimal_value - (2.0 * epsilon / (1.0 + epsilon)) * node_count


def bound_nonuniform_eps(alpha: float, epsilon: float, node_count: int,
                         optimal_value: float, budget: float,
                         max_cost: float, min_cost: float) -> float:
    _check_alpha(alpha)
    _check_epsilon(epsilon)
    if budget <= 0 or min_cost <= 0:
        raise ValueError("budget and min cost must be positive")
    lead = _threshold_term(alpha, (1.0 - epsilon) * (budget - max_cost) / budget)
    lead /= 1.0 + epsilon
    slack = (2.0 * epsilon / (1.0 + epsilon)) * (1.0 / min_cost + 1.0)
    return lead * optimal_value - slack * node_count * budget


def bound_enhanced_eps(alpha: float, epsilon: float, node_count: int,
                       optimal_value: float, budget: float,
                       min_cost: float) -> float:
    _check_alpha(alpha)
    _check_epsilon(epsilon)
    if budget <= 0 or min_cost <= 0:
        raise ValueError("budget and min cost must be positive")
    lead = _threshold_term(alpha, 1.0 - epsilon) / (1.0 + epsilon)
    slack = (2.0 * epsilon / (1.0 + epsilon)) * (1.0 / min_cost + 1.0)
    inner = lead * optimal_value - slack * node_count * budget
    return 0.5 * ((1.0 - epsilon) / (1.0 + epsilon)) * inner
