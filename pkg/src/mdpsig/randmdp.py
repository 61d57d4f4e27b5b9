"""Random MDP generation with Dirichlet rows and a controllable transient block.

Every generated model has states 0..n_recurrent-1 forming one closed
recurrent class under every action, so any policy induces a unichain.
"""

from __future__ import annotations

import importlib.resources
import json
from dataclasses import dataclass

import numpy as np

from .model import MdpModel, model_from_dict

ZERO_GUARD_EPS = 1e-9
RNG_ALGORITHM = "PCG64"  # recorded in outputs so studies are replayable


@dataclass(frozen=True)
class RandomMdpSpec:
    n_states: int
    n_actions: int
    n_transient: int = 0
    dirichlet_theta: float | tuple[float, ...] = 1.0
    cost_range: tuple[float, float] = (0.0, 10.0)
    seed: int = 0

    def __post_init__(self):
        if self.n_states <= 0 or self.n_actions <= 0:
            raise ValueError("n_states and n_actions must be positive")
        if not 0 <= self.n_transient < self.n_states:
            raise ValueError(f"n_transient must lie in [0, n_states), got {self.n_transient}")
        lo, hi = self.cost_range
        if not (np.isfinite(lo) and np.isfinite(hi) and lo < hi):
            raise ValueError(f"cost_range must be finite with lo < hi, got {self.cost_range}")
        theta = self.dirichlet_theta
        values = (theta,) if np.isscalar(theta) else tuple(theta)
        if any(t <= 0 for t in values):
            raise ValueError("dirichlet concentration entries must be positive")


def sample_dirichlet(theta, rng: np.random.Generator) -> np.ndarray:
    """Draw one point from the simplex via normalized Gamma variates."""
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    if (theta <= 0).any():
        raise ValueError(f"concentration parameters must be positive, got {theta}")
    y = rng.gamma(shape=theta)
    total = y.sum()
    if total == 0.0:  # all-zero draw is possible for tiny theta
        y = y + ZERO_GUARD_EPS
        total = y.sum()
    return y / total


def _theta_vector(spec: RandomMdpSpec) -> np.ndarray:
    theta = spec.dirichlet_theta
    if np.isscalar(theta):
        return np.full(spec.n_states, float(theta))
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (spec.n_states,):
        raise ValueError(f"theta vector has shape {theta.shape}, expected ({spec.n_states},)")
    return theta


def sample_random_mdp(spec: RandomMdpSpec) -> MdpModel:
    """Sample a model per the spec; deterministic in the seed.

    Rows are Dirichlet draws.  The first n_states - n_transient states are
    isolated into a closed class by zeroing the trailing columns of their
    rows and renormalizing; a small constant is added inside the closed
    block so no recurrent-block entry is exactly zero.
    """
    rng = np.random.Generator(np.random.PCG64(spec.seed))
    n = spec.n_states
    n_rec = n - spec.n_transient
    theta = _theta_vector(spec)
    transitions = []
    for _ in range(spec.n_actions):
        P = np.empty((n, n))
        for i in range(n):
            P[i] = sample_dirichlet(theta, rng)
        P[:n_rec, n_rec:] = 0.0
        block = P[:n_rec, :n_rec] + ZERO_GUARD_EPS
        P[:n_rec, :n_rec] = block / block.sum(axis=1, keepdims=True)
        if spec.n_transient:
            P[n_rec:] /= P[n_rec:].sum(axis=1, keepdims=True)
        transitions.append(P)
    lo, hi = spec.cost_range
    costs = [rng.uniform(lo, hi, size=n) for _ in range(spec.n_actions)]
    feasible = tuple(tuple(range(spec.n_actions)) for _ in range(n))
    return MdpModel(n_states=n, actions=feasible, transitions=tuple(transitions), costs=tuple(costs))


def load_paper_fixture() -> MdpModel:
    """Load the published 5-state, 2-action fixture with 3 transient states.

    The shipped entries are the literal published values, whose rows are
    rounded to 4 decimals and therefore sum to 1 only within about 2e-4.
    They are loaded verbatim (no renormalization): the reference tables for
    this fixture were computed from these exact entries, and renormalizing
    shifts the 0.99-discounted values by more than 1e-2.
    """
    ref = importlib.resources.files("mdpsig") / "fixtures" / "random5.json"
    doc = json.loads(ref.read_text())
    return model_from_dict(doc, renormalize=False)
