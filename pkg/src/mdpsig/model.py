"""Finite MDP data model: validation, policy application, enumeration.

An MDP is the tuple (states, per-state feasible actions, per-action
transition matrices, per-action cost vectors).  All matrices are dense;
problem sizes here are at most a few hundred states.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

ROW_SUM_TOL = 1e-12
LOADER_RENORM_TOL = 1e-9
ENUMERATION_CAP = 10**6


class ModelError(ValueError):
    """Raised for structurally invalid models or infeasible policies."""


@dataclass(frozen=True)
class MdpModel:
    """Immutable finite MDP.

    Attributes
    ----------
    n_states : number of states.
    actions : per-state tuple of feasible action indices.
    transitions : list of (n_states, n_states) row-stochastic matrices,
        one per action.
    costs : list of length-n_states cost vectors, one per action.
    """

    n_states: int
    actions: tuple[tuple[int, ...], ...]
    transitions: tuple[np.ndarray, ...]
    costs: tuple[np.ndarray, ...]

    def __post_init__(self):
        transitions = tuple(np.ascontiguousarray(p, dtype=float) for p in self.transitions)
        costs = tuple(np.ascontiguousarray(c, dtype=float) for c in self.costs)
        for arr in transitions + costs:
            arr.setflags(write=False)
        object.__setattr__(self, "actions", tuple(tuple(int(a) for a in row) for row in self.actions))
        object.__setattr__(self, "transitions", transitions)
        object.__setattr__(self, "costs", costs)

    @property
    def n_actions(self) -> int:
        return len(self.transitions)

    def n_policies(self) -> int:
        out = 1
        for feasible in self.actions:
            out *= len(feasible)
        return out


@dataclass(frozen=True)
class Policy:
    """Stationary deterministic Markov policy, one action index per state."""

    actions: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "actions", tuple(int(a) for a in self.actions))

    def as_array(self) -> np.ndarray:
        return np.asarray(self.actions, dtype=np.int64)

    def __len__(self) -> int:
        return len(self.actions)


@dataclass(frozen=True)
class PolicyModel:
    """Transition matrix and cost vector induced by a fixed policy."""

    transition: np.ndarray
    cost: np.ndarray

    def __post_init__(self):
        transition = np.ascontiguousarray(self.transition, dtype=float)
        cost = np.ascontiguousarray(self.cost, dtype=float)
        transition.setflags(write=False)
        cost.setflags(write=False)
        object.__setattr__(self, "transition", transition)
        object.__setattr__(self, "cost", cost)

    @property
    def n_states(self) -> int:
        return len(self.cost)


def validate_model(model: MdpModel, row_sum_tol: float = ROW_SUM_TOL) -> list[str]:
    """Return a list of invariant violations; an empty list means valid.

    Violations are data, not exceptions: callers decide whether a broken
    model is fatal.  ``row_sum_tol`` exists because published matrices are
    often rounded to a few decimals and a caller may knowingly accept that.
    """
    violations: list[str] = []
    n = model.n_states
    if n <= 0:
        return [f"n_states must be positive, got {n}"]
    if len(model.actions) != n:
        violations.append(f"actions list has length {len(model.actions)}, expected {n}")
    if len(model.transitions) != len(model.costs):
        violations.append(
            f"{len(model.transitions)} transition matrices but {len(model.costs)} cost vectors"
        )
    n_actions = model.n_actions
    for a, P in enumerate(model.transitions):
        if P.shape != (n, n):
            violations.append(f"P[{a}] has shape {P.shape}, expected {(n, n)}")
            continue
        for i in range(n):
            row_sum = float(P[i].sum())
            if not math.isclose(row_sum, 1.0, rel_tol=0.0, abs_tol=row_sum_tol):
                violations.append(f"P[{a}] row {i} sum {row_sum!r} != 1")
            if (P[i] < 0.0).any():
                j = int(np.argmin(P[i]))
                violations.append(f"P[{a}][{i}][{j}] = {P[i][j]!r} < 0")
    for a, C in enumerate(model.costs):
        if C.shape != (n,):
            violations.append(f"C[{a}] has shape {C.shape}, expected ({n},)")
        elif not np.isfinite(C).all():
            i = int(np.argmin(np.isfinite(C)))
            violations.append(f"C[{a}][{i}] = {C[i]!r} is not finite")
    for x, feasible in enumerate(model.actions[:n]):
        if len(feasible) == 0:
            violations.append(f"state {x} has no feasible action")
        for a in feasible:
            if not (0 <= a < n_actions):
                violations.append(f"state {x} lists action {a}, but only {n_actions} actions exist")
    return violations


def apply_policy(model: MdpModel, policy: Policy) -> PolicyModel:
    """Build (P_pi, C_pi) by selecting row i of P/C for action policy[i]."""
    n = model.n_states
    if len(policy) != n:
        raise ModelError(f"policy has length {len(policy)}, model has {n} states")
    P = np.empty((n, n))
    C = np.empty(n)
    for i, a in enumerate(policy.actions):
        if a not in model.actions[i]:
            raise ModelError(f"action {a} infeasible at state {i} (feasible: {model.actions[i]})")
        P[i] = model.transitions[a][i]
        C[i] = model.costs[a][i]
    return PolicyModel(transition=P, cost=C)


def enumerate_policies(model: MdpModel, cap: int = ENUMERATION_CAP) -> Iterator[Policy]:
    """Yield every feasible deterministic policy exactly once.

    Raises if the policy space exceeds ``cap``: enumeration is an oracle
    for small problems, not a solution method.
    """
    total = model.n_policies()
    if total > cap:
        raise ModelError(f"policy space has {total} policies, exceeding cap {cap}")

    def rec(prefix: list[int], state: int) -> Iterator[Policy]:
        if state == model.n_states:
            yield Policy(tuple(prefix))
            return
        for a in model.actions[state]:
            prefix.append(a)
            yield from rec(prefix, state + 1)
            prefix.pop()

    yield from rec([], 0)


def model_to_dict(model: MdpModel) -> dict:
    return {
        "n_states": model.n_states,
        "actions": [list(row) for row in model.actions],
        "transitions": [p.tolist() for p in model.transitions],
        "costs": [c.tolist() for c in model.costs],
    }


def model_from_dict(doc: dict, renormalize: bool = True) -> MdpModel:
    """Build a model from its JSON document form.

    Rows whose sums deviate from 1 by less than ``LOADER_RENORM_TOL`` are
    renormalized; larger deviations are rejected so that corrupt data is
    surfaced instead of silently patched.  ``renormalize=False`` loads the
    document verbatim (used for published fixtures whose printed entries
    are rounded).
    """
    transitions = [np.asarray(p, dtype=float) for p in doc["transitions"]]
    if renormalize:
        for a, P in enumerate(transitions):
            sums = P.sum(axis=1)
            dev = np.abs(sums - 1.0)
            if (dev >= LOADER_RENORM_TOL).any():
                i = int(np.argmax(dev))
                raise ModelError(
                    f"P[{a}] row {i} sums to {sums[i]!r}; deviation {dev[i]:.3g} "
                    f"exceeds loader tolerance {LOADER_RENORM_TOL:g}"
                )
            P /= sums[:, None]
    model = MdpModel(
        n_states=int(doc["n_states"]),
        actions=tuple(tuple(row) for row in doc["actions"]),
        transitions=tuple(transitions),
        costs=tuple(np.asarray(c, dtype=float) for c in doc["costs"]),
    )
    return model


def save_model(model: MdpModel, path) -> None:
    with open(path, "w") as fh:
        json.dump(model_to_dict(model), fh, indent=2)
        fh.write("\n")


def load_model(path, renormalize: bool = True) -> MdpModel:
    with open(path) as fh:
        return model_from_dict(json.load(fh), renormalize=renormalize)
