"""Policy evaluation and Policy Iteration for discounted and average cost.

Linear systems are solved by dense LU with partial pivoting and every
solution is residual-checked.  Policy improvement keeps the incumbent
action on near-ties, which makes Policy Iteration terminate and its
output deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import MdpModel, ModelError, Policy, PolicyModel, apply_policy

RESIDUAL_TOL = 1e-9
TIE_TOL = 1e-10
MAX_ITERATIONS = 10_000


class SolverError(RuntimeError):
    pass


@dataclass(frozen=True)
class DiscountedSolution:
    """Values J solving J = C + alpha P J for one policy."""

    values: np.ndarray
    alpha: float
    residual: float

    def to_dict(self, policy: Policy | None = None, iterations: int | None = None) -> dict:
        doc = {"alpha": self.alpha, "values": self.values.tolist(), "residual": self.residual}
        if policy is not None:
            doc["policy"] = list(policy.actions)
        if iterations is not None:
            doc["iterations"] = iterations
        return doc


@dataclass(frozen=True)
class AverageSolution:
    """Gain and bias solving h + J 1 = C + P h with bias[distinguished] = 0."""

    gain: float
    bias: np.ndarray
    distinguished_state: int
    residual: float

    def to_dict(self, policy: Policy | None = None, iterations: int | None = None) -> dict:
        doc = {
            "gain": self.gain,
            "bias": self.bias.tolist(),
            "distinguished_state": self.distinguished_state,
            "residual": self.residual,
        }
        if policy is not None:
            doc["policy"] = list(policy.actions)
        if iterations is not None:
            doc["iterations"] = iterations
        return doc


def evaluate_discounted(pm: PolicyModel, alpha: float) -> DiscountedSolution:
    """Solve (I - alpha P) J = C directly; unique for alpha in (0, 1)."""
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha!r}")
    n = pm.n_states
    J = np.linalg.solve(np.eye(n) - alpha * pm.transition, pm.cost)
    residual = float(np.abs(J - pm.cost - alpha * pm.transition @ J).max())
    if residual > RESIDUAL_TOL:
        raise SolverError(f"discounted evaluation residual {residual:.3g} exceeds {RESIDUAL_TOL:g}")
    return DiscountedSolution(values=J, alpha=alpha, residual=residual)


def evaluate_average(pm: PolicyModel, distinguished_state: int = 0) -> AverageSolution:
    """Solve the augmented (n+1)-equation average-cost evaluation system.

    Unknowns are the bias vector and the scalar gain; the extra equation
    pins bias[distinguished_state] = 0.  A singular system means the gain
    is not state-independent (P is not unichain).
    """
    n = pm.n_states
    if not 0 <= distinguished_state < n:
        raise ValueError(f"distinguished_state {distinguished_state} outside [0, {n})")
    A = np.zeros((n + 1, n + 1))
    A[:n, :n] = np.eye(n) - pm.transition
    A[:n, n] = 1.0
    A[n, distinguished_state] = 1.0
    b = np.concatenate([pm.cost, [0.0]])
    try:
        sol = np.linalg.solve(A, b)
    except np.linalg.LinAlgError as exc:
        raise SolverError(f"gain not state-independent; chain is not unichain ({exc})") from exc
    gain, bias = float(sol[n]), sol[:n]
    residual = float(np.abs(bias + gain - pm.cost - pm.transition @ bias).max())
    if residual > RESIDUAL_TOL or abs(bias[distinguished_state]) > RESIDUAL_TOL:
        raise SolverError("gain not state-independent; chain is not unichain "
                          f"(residual {residual:.3g})")
    bias = bias.copy()
    bias[distinguished_state] = 0.0
    return AverageSolution(
        gain=gain, bias=bias, distinguished_state=distinguished_state, residual=residual
    )


def _greedy_improvement(
    model: MdpModel, incumbent: Policy, values: np.ndarray, alpha: float | None
) -> Policy:
    """One policy-improvement sweep; keeps the incumbent action on ties."""
    weight = 1.0 if alpha is None else alpha
    new_actions = []
    for x in range(model.n_states):
        feasible = model.actions[x]
        q = {a: model.costs[a][x] + weight * float(model.transitions[a][x] @ values) for a in feasible}
        best = min(q.values())
        incumbent_action = incumbent.actions[x]
        if incumbent_action in feasible and q[incumbent_action] <= best + TIE_TOL:
            new_actions.append(incumbent_action)
        else:
            new_actions.append(min(a for a in feasible if q[a] <= best + TIE_TOL))
    return Policy(tuple(new_actions))


def _initial_policy(model: MdpModel) -> Policy:
    return Policy(tuple(feasible[0] for feasible in model.actions))


def policy_iteration_discounted(
    model: MdpModel, alpha: float, initial: Policy | None = None
) -> tuple[Policy, DiscountedSolution, int]:
    """Policy Iteration under the discounted criterion."""
    policy = initial if initial is not None else _initial_policy(model)
    for iteration in range(1, MAX_ITERATIONS + 1):
        solution = evaluate_discounted(apply_policy(model, policy), alpha)
        improved = _greedy_improvement(model, policy, solution.values, alpha)
        if improved == policy:
            return policy, solution, iteration
        policy = improved
    raise SolverError(f"policy iteration did not converge in {MAX_ITERATIONS} iterations")


def policy_iteration_average(
    model: MdpModel, distinguished_state: int = 0, initial: Policy | None = None
) -> tuple[Policy, AverageSolution, int]:
    """Policy Iteration under the average-cost criterion (improvement over bias)."""
    policy = initial if initial is not None else _initial_policy(model)
    for iteration in range(1, MAX_ITERATIONS + 1):
        solution = evaluate_average(apply_policy(model, policy), distinguished_state)
        improved = _greedy_improvement(model, policy, solution.bias, alpha=None)
        if improved == policy:
            return policy, solution, iteration
        policy = improved
    raise SolverError(f"policy iteration did not converge in {MAX_ITERATIONS} iterations")


@dataclass(frozen=True)
class MembershipResult:
    is_member: bool
    improved: Policy
    gain_candidate: float
    gain_improved: float


def gain_optimal_membership(
    model: MdpModel, candidate: Policy, distinguished_state: int = 0
) -> MembershipResult:
    """One-step improvement check for membership in the gain-optimal set.

    The candidate is a member when a single average-cost improvement sweep
    returns it unchanged.  When the sweep moves, the improved policy's gain
    is evaluated too: a strictly smaller gain certifies the candidate as
    gain-suboptimal, an equal gain means the sweep only improved the bias.
    """
    solution = evaluate_average(apply_policy(model, candidate), distinguished_state)
    improved = _greedy_improvement(model, candidate, solution.bias, alpha=None)
    if improved == candidate:
        return MembershipResult(True, candidate, solution.gain, solution.gain)
    improved_solution = evaluate_average(apply_policy(model, improved), distinguished_state)
    return MembershipResult(False, improved, solution.gain, improved_solution.gain)


@dataclass(frozen=True)
class BlackwellVerdict:
    """Finite-grid evidence for Blackwell optimality of a candidate policy.

    A finite grid can never prove optimality over the continuum (alpha_bar, 1);
    ``is_consistent`` only states that no grid point contradicts it.
    """

    is_gain_optimal: bool
    alpha_grid: tuple[float, ...]
    discounted_optimal_at: tuple[float, ...]
    consistent_from_index: int | None

    @property
    def is_consistent(self) -> bool:
        return self.is_gain_optimal and self.consistent_from_index is not None


def blackwell_check(
    model: MdpModel, candidate: Policy, alpha_grid, value_tol: float = 1e-8
) -> BlackwellVerdict:
    """Combine the gain-optimality check with discounted optimality per grid point.

    The candidate counts as discounted-optimal at alpha when its value vector
    matches the Policy Iteration optimum elementwise within ``value_tol``.
    """
    alphas = tuple(float(a) for a in alpha_grid)
    if any(not 0.0 < a < 1.0 for a in alphas):
        raise ValueError(f"alpha grid values must lie in (0, 1): {alphas}")
    membership = gain_optimal_membership(model, candidate)
    _, best_average, _ = policy_iteration_average(model)
    is_gain_optimal = membership.gain_candidate <= best_average.gain + 1e-9
    optimal_at = []
    for alpha in alphas:
        candidate_values = evaluate_discounted(apply_policy(model, candidate), alpha).values
        _, optimum, _ = policy_iteration_discounted(model, alpha)
        scale = max(1.0, float(np.abs(optimum.values).max()))
        if np.abs(candidate_values - optimum.values).max() <= value_tol * scale:
            optimal_at.append(alpha)
    consistent_from = None
    for i in range(len(alphas)):
        if all(a in optimal_at for a in alphas[i:]):
            consistent_from = i
            break
    return BlackwellVerdict(
        is_gain_optimal=is_gain_optimal,
        alpha_grid=alphas,
        discounted_optimal_at=tuple(optimal_at),
        consistent_from_index=consistent_from,
    )
