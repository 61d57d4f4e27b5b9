"""Uniformised M/M/1 admission-control MDP and its CTMC simulator.

The controlled queue accepts or rejects arriving customers; the CTMDP is
uniformised at rate gamma = lambda + mu into a discrete-time MDP (average
or discounted variant).  The simulator reproduces the continuous-time
chain event by event and reduces each trajectory to a scalar cost.

Hot loops run in the compiled kernel mdpsig._simcore when it is available
and in the pure-Python mirror mdpsig._simpy otherwise; both consume the
same variate stream, so the backend never affects a sampled value.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import chains
from .model import MdpModel, Policy, apply_policy
from .samples import SampleSet

try:
    from . import _simcore as _kernels

    COMPILED = True
except ImportError:  # pragma: no cover - depends on the build environment
    from . import _simpy as _kernels

    COMPILED = False

from . import _simpy

BLOCK_EVENTS = 16384  # fixed block size is part of the variate-stream contract
DEFAULT_T_AVERAGE = 10_000.0
DEFAULT_TRUNCATION_EPS = 1e-6
RNG_ALGORITHM = "PCG64"


def simulation_backend() -> str:
    return "compiled" if COMPILED else "python"


class QueueError(ValueError):
    pass


@dataclass(frozen=True)
class QueueParams:
    """Arrival/service rates, cost structure and buffer size of the queue."""

    lam: float
    mu: float
    c: float
    R: float
    N: int
    beta: float | None = None

    def __post_init__(self):
        if min(self.lam, self.mu, self.c, self.R) <= 0:
            raise QueueError("lam, mu, c and R must all be positive")
        if self.N < 1:
            raise QueueError(f"N must be at least 1, got {self.N}")
        if self.beta is not None and self.beta <= 0:
            raise QueueError(f"beta must be positive when given, got {self.beta}")

    @property
    def gamma(self) -> float:
        return self.lam + self.mu

    @property
    def alpha(self) -> float:
        if self.beta is None:
            raise QueueError("alpha requires an interest rate beta")
        return self.gamma / (self.gamma + self.beta)


def build_queue_mdp(params: QueueParams, mode: str = "average"):
    """Uniformised admission-control MDP.

    Action 0 rejects the next arrival, action 1 admits it; state N only
    permits rejection.  Returns (model, gamma, alpha) with alpha None in
    average mode.

    Average-mode costs per period: c x / gamma plus, when rejecting, the
    penalty weighted by the arrival probability lambda / gamma.  Discounted
    mode scales both by one period of discounting at alpha = gamma / (gamma
    + beta), i.e. holding c x / (beta + gamma) and penalty alpha (lambda /
    gamma) R.
    """
    if mode not in ("average", "discounted"):
        raise QueueError(f"mode must be 'average' or 'discounted', got {mode!r}")
    lam, mu, gamma, n_states = params.lam, params.mu, params.gamma, params.N + 1
    p_arrival = lam / gamma
    p_service = mu / gamma

    P_reject = np.zeros((n_states, n_states))
    P_accept = np.zeros((n_states, n_states))
    for i in range(n_states):
        P_reject[i, i] += p_arrival                      # rejected arrival: no move
        P_reject[i, max(i - 1, 0)] += p_service          # fictitious self-service at 0
        P_accept[i, min(params.N, i + 1)] += p_arrival
        P_accept[i, max(i - 1, 0)] += p_service

    x = np.arange(n_states, dtype=float)
    if mode == "average":
        alpha = None
        holding = params.c * x / gamma
        penalty = p_arrival * params.R
    else:
        if params.beta is None:
            raise QueueError("discounted mode requires params.beta")
        alpha = params.alpha
        holding = params.c * x / (params.beta + gamma)
        penalty = alpha * p_arrival * params.R
    C_reject = holding + penalty
    C_accept = holding.copy()

    feasible = tuple((0,) if i == params.N else (0, 1) for i in range(n_states))
    model = MdpModel(
        n_states=n_states,
        actions=feasible,
        transitions=(P_reject, P_accept),
        costs=(C_reject, C_accept),
    )
    return model, gamma, alpha


def threshold_policy(x_star: int, N: int) -> Policy:
    """Admit while the queue is shorter than x_star, otherwise reject."""
    if not 0 <= x_star <= N:
        raise QueueError(f"threshold must lie in [0, {N}], got {x_star}")
    return Policy(tuple(1 if x < x_star else 0 for x in range(N + 1)))


def extract_threshold(policy: Policy) -> int | None:
    """Threshold of a monotone accept-then-reject policy, else None."""
    actions = policy.actions
    x_star = 0
    while x_star < len(actions) and actions[x_star] == 1:
        x_star += 1
    if any(a != 0 for a in actions[x_star:]):
        return None
    return x_star


@dataclass(frozen=True)
class Trajectory:
    """Recorded CTMC path: per event the occupied state, sojourn time,
    event type (1 = arrival, 0 = service) and whether an arrival was
    rejected."""

    states: np.ndarray
    dts: np.ndarray
    events: np.ndarray
    rejected: np.ndarray

    def __post_init__(self):
        for name in ("states", "dts", "events", "rejected"):
            arr = getattr(self, name)
            arr.setflags(write=False)

    def __len__(self) -> int:
        return len(self.dts)

    @property
    def total_time(self) -> float:
        return float(self.dts.sum())

    def to_csv(self, path) -> None:
        import csv

        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["x", "dt", "event", "rejected"])
            for x, dt, e, r in zip(self.states, self.dts, self.events, self.rejected):
                writer.writerow([int(x), repr(float(dt)), "arrival" if e else "service", int(r)])


def _draw_block(rng: np.random.Generator, gamma: float, p_service: float):
    """One fixed-size block of (sojourn times, arrival flags).

    Sojourns by inverse transform of Exp(gamma); the event type by inverse
    transform over [service, arrival] probabilities.
    """
    u_dt = rng.random(BLOCK_EVENTS)
    dts = -np.log1p(-u_dt)
    dts /= gamma
    u_ev = rng.random(BLOCK_EVENTS)
    arrivals = (u_ev >= p_service).astype(np.uint8)
    return dts, arrivals


def simulate_trajectory(
    x0: int, policy: Policy, T: float, rng: np.random.Generator, lam: float, mu: float
) -> Trajectory:
    """Simulate the CTMC under ``policy`` until the clock passes T.

    Consumes variates through the same block protocol as the streaming
    cost kernels, so a trajectory recorded from a given generator state
    matches the corresponding streamed cost sample exactly.
    """
    N = len(policy) - 1
    if not 0 <= x0 <= N:
        raise QueueError(f"x0 must lie in [0, {N}], got {x0}")
    if T < 0:
        raise QueueError(f"T must be non-negative, got {T}")
    gamma = lam + mu
    p_service = mu / gamma
    actions = policy.actions
    states, dts, events, rejected = [], [], [], []
    x = x0
    tau = 0.0
    while tau < T:
        block_dts, block_arrivals = _draw_block(rng, gamma, p_service)
        for i in range(BLOCK_EVENTS):
            if tau >= T:
                break
            dt = float(block_dts[i])
            arrival = bool(block_arrivals[i])
            a = actions[x]
            states.append(x)
            dts.append(dt)
            events.append(arrival)
            rejected.append(arrival and a == 0)
            if arrival:
                if a == 1 and x < N:
                    x += 1
            else:
                x = max(x - 1, 0)
            tau += dt
    return Trajectory(
        states=np.asarray(states, dtype=np.int64),
        dts=np.asarray(dts, dtype=float),
        events=np.asarray(events, dtype=np.uint8),
        rejected=np.asarray(rejected, dtype=bool),
    )


def trajectory_cost_average(traj: Trajectory, c: float, R: float) -> float:
    """Cost per unit time: holding c x dt plus R per rejected arrival."""
    total_time = traj.total_time
    if total_time <= 0.0:
        raise QueueError("trajectory has no elapsed time")
    holding = c * float((traj.states * traj.dts).sum())
    penalties = R * float(traj.rejected.sum())
    return (holding + penalties) / total_time


def trajectory_cost_discounted(traj: Trajectory, c: float, R: float, beta: float) -> float:
    """Continuously discounted cost: the holding integral in closed form per
    sojourn, rejection penalties discounted at the event instant."""
    if beta <= 0:
        raise QueueError(f"beta must be positive, got {beta}")
    t1 = np.cumsum(traj.dts)
    t0 = t1 - traj.dts
    d0 = np.exp(-beta * t0)
    d1 = np.exp(-beta * t1)
    holding = c * float((traj.states * (d0 - d1)).sum()) / beta
    penalties = R * float(d1[traj.rejected].sum())
    return holding + penalties


def _stream_cost(rng, actions, x0, T, gamma, p_service, n_max, c, R, beta, kernel_module):
    """Run one trajectory through the block kernels; returns (cost, total_time)."""
    x = int(x0)
    tau = 0.0
    cost = 0.0
    total_time = 0.0
    if beta is None:
        kernel = kernel_module.run_average_block
        args = (c, R)
    else:
        kernel = kernel_module.run_discounted_block
        args = (c, R, beta)
    while tau < T:
        dts, arrivals = _draw_block(rng, gamma, p_service)
        _, x, tau, dcost, dtime = kernel(dts, arrivals, actions, x, tau, T, n_max, *args)
        cost += dcost
        total_time += dtime
    return cost, total_time


def _initial_state(rng, initial, n_states, cum_phi):
    u0 = rng.random()
    if initial == "uniform":
        return min(int(u0 * n_states), n_states - 1)
    return min(int(np.searchsorted(cum_phi, u0, side="right")), n_states - 1)


def sample_performance(
    params: QueueParams,
    policy: Policy,
    metric: str = "average",
    initial: str = "stationary",
    M: int = 1,
    T: float | None = None,
    master_seed: int = 0,
    beta: float | None = None,
    n_jobs: int | None = None,
    backend: str = "auto",
) -> SampleSet:
    """Draw M i.i.d. trajectory costs for one (policy, metric, start) cell.

    Trajectory i uses the generator PCG64(SeedSequence((master_seed, i))),
    so results are independent of execution order and thread count, and two
    policies sampled with the same master seed share variates per index
    (common random numbers).

    ``metric`` is "average" (cost per unit time) or "discounted" (requires
    beta, here or on params).  ``initial`` draws x0 from the policy's
    stationary distribution or uniformly over all states.
    """
    if metric not in ("average", "discounted"):
        raise QueueError(f"metric must be 'average' or 'discounted', got {metric!r}")
    if initial not in ("stationary", "uniform"):
        raise QueueError(f"initial must be 'stationary' or 'uniform', got {initial!r}")
    if M < 1:
        raise QueueError(f"M must be at least 1, got {M}")
    if metric == "discounted":
        beta = beta if beta is not None else params.beta
        if beta is None:
            raise QueueError("discounted metric requires an interest rate beta")
    else:
        beta = None
    if T is None:
        T = DEFAULT_T_AVERAGE if beta is None else math.log(1.0 / DEFAULT_TRUNCATION_EPS) / beta
    if backend == "auto":
        kernel_module = _kernels
    elif backend == "compiled":
        if not COMPILED:
            raise QueueError("compiled simulation backend is not available")
        kernel_module = _kernels
    elif backend == "python":
        kernel_module = _simpy
    else:
        raise QueueError(f"backend must be 'auto', 'compiled' or 'python', got {backend!r}")

    n_states = params.N + 1
    if len(policy) != n_states:
        raise QueueError(f"policy length {len(policy)} does not match N+1 = {n_states}")
    gamma = params.gamma
    p_service = params.mu / gamma
    actions = policy.as_array()
    cum_phi = None
    if initial == "stationary":
        pm = apply_policy(build_queue_mdp(params, "average")[0], policy)
        phi = chains.stationary_distribution(pm.transition).phi
        cum_phi = np.cumsum(phi)
        cum_phi[-1] = 1.0

    values = np.empty(M)
    times = np.empty(M)

    def run_range(lo: int, hi: int) -> None:
        for idx in range(lo, hi):
            rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence((master_seed, idx))))
            x0 = _initial_state(rng, initial, n_states, cum_phi)
            cost, total_time = _stream_cost(
                rng, actions, x0, T, gamma, p_service, params.N, params.c, params.R,
                beta, kernel_module,
            )
            values[idx] = cost / total_time if beta is None else cost
            times[idx] = total_time

    jobs = n_jobs if n_jobs is not None else min(4, os.cpu_count() or 1)
    jobs = max(1, min(jobs, M))
    if jobs == 1:
        run_range(0, M)
    else:
        chunk = (M + jobs - 1) // jobs
        bounds = [(lo, min(lo + chunk, M)) for lo in range(0, M, chunk)]
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            list(pool.map(lambda b: run_range(*b), bounds))

    meta = {
        "metric": metric,
        "beta": beta,
        "initial": initial,
        "M": M,
        "T": T,
        "master_seed": master_seed,
        "policy": list(policy.actions),
        "threshold": extract_threshold(policy),
        "rng": RNG_ALGORITHM,
        "seed_scheme": "SeedSequence((master_seed, trajectory_index))",
        "backend": "compiled" if kernel_module is not _simpy else "python",
        "params": {"lam": params.lam, "mu": params.mu, "c": params.c,
                   "R": params.R, "N": params.N},
    }
    return SampleSet(values=values, meta=meta)
