"""Scalar system-level performance metrics for MDP policies.

A policy's value vector is collapsed to a scalar by weighting it with an
initial-state distribution: the stationary distribution (eta) scores the
system in steady state, the uniform distribution (nu) scores it with no
prior knowledge of the starting state, and xi blends the two.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field

import numpy as np

from . import chains
from .model import MdpModel, Policy, apply_policy
from .solvers import evaluate_average, evaluate_discounted


def eta(phi: np.ndarray, values: np.ndarray) -> float:
    """Stationary-weighted scalar performance phi^T J."""
    phi = np.asarray(phi, dtype=float)
    values = np.asarray(values, dtype=float)
    if phi.shape != values.shape:
        raise ValueError(f"length mismatch: phi {phi.shape}, values {values.shape}")
    return float(phi @ values)


def nu(values: np.ndarray) -> float:
    """Uniform-weighted scalar performance: the plain mean of J."""
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        raise ValueError("empty value vector")
    return float(values.mean())


def xi(eta_value: float, nu_value: float, theta: float) -> float:
    """Convex blend theta * eta + (1 - theta) * nu, theta in [0, 1]."""
    if not 0.0 <= theta <= 1.0:
        raise ValueError(f"theta must lie in [0, 1], got {theta!r}")
    return theta * eta_value + (1.0 - theta) * nu_value


def eta_discounted_from_average(eta_avg_per_period: float, alpha: float) -> float:
    """Discounted stationary metric from the per-period gain: eta / (1 - alpha).

    Exact for unichain policies; the per-period gain must be measured on the
    same evaluation period as the discounted system.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha!r}")
    return eta_avg_per_period / (1.0 - alpha)


def eta_discounted_multichain(pm, phi: np.ndarray, alpha: float) -> float:
    """Discounted stationary metric without any unichain assumption.

    Evaluates phi^T (I - alpha P + alpha P*)^-1 C + alpha/(1-alpha) phi^T P* C
    with the Cesaro limiting matrix P*, valid for multichain P as well.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha!r}")
    phi = np.asarray(phi, dtype=float)
    P = pm.transition
    C = pm.cost
    star = chains.cesaro_limit(P)
    n = P.shape[0]
    resolvent = np.linalg.inv(np.eye(n) - alpha * P + alpha * star)
    head = float(phi @ resolvent @ C)
    tail = alpha / (1.0 - alpha) * float(phi @ star @ C)
    return head + tail


@dataclass(frozen=True)
class AlphaMetrics:
    alpha: float
    eta_disc: float
    nu_disc: float


@dataclass(frozen=True)
class MetricReport:
    policy: Policy
    eta_avg: float
    nu_avg: float
    per_alpha: tuple[AlphaMetrics, ...] = field(default_factory=tuple)
    theta: float | None = None
    xi_value: float | None = None

    def to_dict(self) -> dict:
        doc = {
            "policy": list(self.policy.actions),
            "eta_avg": self.eta_avg,
            "nu_avg": self.nu_avg,
            "per_alpha": [
                {"alpha": m.alpha, "eta_disc": m.eta_disc, "nu_disc": m.nu_disc}
                for m in self.per_alpha
            ],
        }
        if self.theta is not None:
            doc["xi"] = {"theta": self.theta, "value": self.xi_value}
        return doc


def metric_report(
    model: MdpModel,
    policy: Policy,
    alphas=(),
    theta: float | None = None,
    distinguished_state: int = 0,
    check_tol: float = 1e-8,
) -> MetricReport:
    """Assemble every scalar metric for one policy of a unichain MDP.

    The report is cross-checked before it is returned: eta and nu must both
    equal the gain, and each discounted eta must satisfy the exact relation
    phi^T J_alpha = gain / (1 - alpha).
    """
    pm = apply_policy(model, policy)
    average = evaluate_average(pm, distinguished_state)
    phi = chains.stationary_distribution(pm.transition).phi
    gain = average.gain

    eta_avg = eta(phi, np.full(model.n_states, gain))
    nu_avg = nu(np.full(model.n_states, gain))
    scale = max(1.0, abs(gain))
    if abs(eta_avg - nu_avg) > check_tol * scale:
        raise AssertionError("eta and nu disagree on a unichain policy")

    per_alpha = []
    for alpha in alphas:
        discounted = evaluate_discounted(pm, alpha)
        eta_disc = eta_discounted_from_average(gain, alpha)
        direct = eta(phi, discounted.values)
        if abs(direct - eta_disc) > check_tol * max(1.0, abs(eta_disc)):
            raise AssertionError(
                f"discounted eta mismatch at alpha={alpha}: "
                f"phi^T J = {direct!r} vs gain/(1-alpha) = {eta_disc!r}"
            )
        per_alpha.append(AlphaMetrics(alpha=alpha, eta_disc=eta_disc, nu_disc=nu(discounted.values)))

    xi_value = xi(eta_avg, nu_avg, theta) if theta is not None else None
    return MetricReport(
        policy=policy,
        eta_avg=eta_avg,
        nu_avg=nu_avg,
        per_alpha=tuple(per_alpha),
        theta=theta,
        xi_value=xi_value,
    )


def reports_to_csv(reports: list[tuple[str, MetricReport]], path) -> None:
    """Write a policy-by-metric grid, floats at 6 decimals."""
    alphas = reports[0][1].per_alpha if reports else ()
    header = ["policy", "eta", "nu"]
    for m in alphas:
        header += [f"eta_disc[{m.alpha:g}]", f"nu_disc[{m.alpha:g}]"]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for name, report in reports:
            row = [name, f"{report.eta_avg:.6f}", f"{report.nu_avg:.6f}"]
            for m in report.per_alpha:
                row += [f"{m.eta_disc:.6f}", f"{m.nu_disc:.6f}"]
            writer.writerow(row)


def reports_to_json(reports: list[tuple[str, MetricReport]], path) -> None:
    with open(path, "w") as fh:
        json.dump({name: report.to_dict() for name, report in reports}, fh, indent=2, sort_keys=True)
        fh.write("\n")
