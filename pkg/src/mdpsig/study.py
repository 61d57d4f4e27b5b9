"""End-to-end queue study: solve, tabulate theory, simulate, run the tests.

One StudyConfig plus one master seed determines every artifact the study
emits, byte for byte.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import stats
from .model import Policy, apply_policy
from .queueing import (
    DEFAULT_T_AVERAGE,
    DEFAULT_TRUNCATION_EPS,
    QueueParams,
    build_queue_mdp,
    extract_threshold,
    sample_performance,
    threshold_policy,
)
from .samples import SampleSet, save_sample_set
from .solvers import (
    evaluate_average,
    evaluate_discounted,
    policy_iteration_average,
    policy_iteration_discounted,
)
from .stats import dagostino_k2, mann_whitney_u, pearson_correlation, t_test_one_sample, welch_t_test


@dataclass(frozen=True)
class StudyConfig:
    lam: float = 1.0
    mu: float = 0.95
    c: float = 1.0
    R: float = 200.0
    N: int = 30
    betas: tuple[float, ...] = (2e-3, 4e-4)
    incumbent_threshold: int = 17
    M: int = 5000
    T_average: float = DEFAULT_T_AVERAGE
    truncation_eps: float = DEFAULT_TRUNCATION_EPS
    master_seed: int = 0
    zeta: float = 0.05
    n_jobs: int | None = None

    def __post_init__(self):
        if self.M < 2:
            raise ValueError(f"M must be at least 2, got {self.M}")
        QueueParams(lam=self.lam, mu=self.mu, c=self.c, R=self.R, N=self.N)
        for beta in self.betas:
            if beta <= 0:
                raise ValueError(f"interest rates must be positive, got {beta}")

    @property
    def params(self) -> QueueParams:
        return QueueParams(lam=self.lam, mu=self.mu, c=self.c, R=self.R, N=self.N)

    def horizon(self, beta: float | None) -> float:
        if beta is None:
            return self.T_average
        return float(np.log(1.0 / self.truncation_eps) / beta)

    def to_dict(self) -> dict:
        return {
            "lam": self.lam, "mu": self.mu, "c": self.c, "R": self.R, "N": self.N,
            "betas": list(self.betas), "incumbent_threshold": self.incumbent_threshold,
            "M": self.M, "T_average": self.T_average, "truncation_eps": self.truncation_eps,
            "master_seed": self.master_seed, "zeta": self.zeta, "n_jobs": self.n_jobs,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "StudyConfig":
        doc = dict(doc)
        if "betas" in doc:
            doc["betas"] = tuple(doc["betas"])
        return cls(**doc)


def beta_label(beta: float) -> str:
    return f"disc@{beta:g}"


@dataclass(frozen=True)
class StudyPolicy:
    name: str
    policy: Policy
    threshold: int | None
    criterion: str           # "none", "average" or "discounted"
    beta: float | None = None
    alpha: float | None = None
    iterations: int | None = None


def solve_policies(config: StudyConfig) -> list[StudyPolicy]:
    """Incumbent threshold plus one MDP-optimal policy per criterion."""
    params = config.params
    incumbent = threshold_policy(config.incumbent_threshold, config.N)
    out = [StudyPolicy("existing", incumbent, config.incumbent_threshold, "none")]

    avg_model, _, _ = build_queue_mdp(params, "average")
    policy, _, iters = policy_iteration_average(avg_model)
    out.append(StudyPolicy("average", policy, extract_threshold(policy), "average",
                           iterations=iters))

    for beta in config.betas:
        disc_params = replace(params, beta=beta)
        model, _, alpha = build_queue_mdp(disc_params, "discounted")
        policy, _, iters = policy_iteration_discounted(model, alpha)
        out.append(StudyPolicy(beta_label(beta), policy, extract_threshold(policy),
                               "discounted", beta=beta, alpha=alpha, iterations=iters))
    return out


def theory_tables(config: StudyConfig, policies: list[StudyPolicy]) -> dict:
    """Exact scalar metrics per policy: the uniform and stationary tables.

    The average criterion gives the gain per unit time (identical under both
    weightings on a unichain).  Per interest rate, the stationary entry is
    the per-period gain divided by (1 - alpha) and the uniform entry is the
    plain mean of the discounted value vector.
    """
    params = config.params
    avg_model, gamma, _ = build_queue_mdp(params, "average")
    disc_models = {}
    for beta in config.betas:
        model, _, alpha = build_queue_mdp(replace(params, beta=beta), "discounted")
        disc_models[beta] = (model, alpha)

    uniform: dict[str, dict[str, float]] = {}
    stationary: dict[str, dict[str, float]] = {}
    for sp in policies:
        gain_period = evaluate_average(apply_policy(avg_model, sp.policy)).gain
        per_time = gain_period * gamma
        uniform[sp.name] = {"average": per_time}
        stationary[sp.name] = {"average": per_time}
        for beta in config.betas:
            model, alpha = disc_models[beta]
            values = evaluate_discounted(apply_policy(model, sp.policy), alpha).values
            uniform[sp.name][beta_label(beta)] = float(values.mean())
            stationary[sp.name][beta_label(beta)] = gain_period / (1.0 - alpha)
    return {"uniform": uniform, "stationary": stationary}


def study_cells(config: StudyConfig, policies: list[StudyPolicy]) -> list[tuple[str, str, float | None]]:
    """(policy name, metric label, beta) cells the study simulates.

    Every policy is sampled under the average metric; each discounted policy
    under its own interest rate; the incumbent under every interest rate.
    """
    cells = []
    for sp in policies:
        metrics: list[float | None] = [None]
        if sp.criterion == "discounted":
            metrics.append(sp.beta)
        elif sp.name == "existing":
            metrics.extend(config.betas)
        for beta in metrics:
            label = "average" if beta is None else beta_label(beta)
            cells.append((sp.name, label, beta))
    return cells


def simulate_study(config: StudyConfig, policies: list[StudyPolicy],
                   backend: str = "auto") -> dict:
    """All (policy, metric, initial) sample sets for the study.

    Keys are (policy name, metric label, initial).  The same master seed is
    shared across policies, giving common random numbers per trajectory
    index.
    """
    by_name = {sp.name: sp for sp in policies}
    out = {}
    for name, label, beta in study_cells(config, policies):
        params = config.params if beta is None else replace(config.params, beta=beta)
        for initial in ("stationary", "uniform"):
            samples = sample_performance(
                params,
                by_name[name].policy,
                metric="average" if beta is None else "discounted",
                initial=initial,
                M=config.M,
                T=config.horizon(beta),
                master_seed=config.master_seed,
                beta=beta,
                n_jobs=config.n_jobs,
                backend=backend,
            )
            samples.meta["cell"] = {"policy": name, "metric": label, "initial": initial}
            out[(name, label, initial)] = samples
    return out


@dataclass(frozen=True)
class ComparisonRow:
    """All test results for one (comparison, weighting) pair.

    ``weighting`` is "stationary" or "uniform"; the MDP policy's samples are
    X and the incumbent's are Y, so ``less`` alternatives ask whether the
    MDP policy outperforms the incumbent.
    """

    comparison: str
    metric: str
    weighting: str
    shuffle_seed: int
    normality: stats.TestResult
    correlation: float
    t_less: stats.TestResult
    t_greater: stats.TestResult
    u_less: stats.TestResult
    u_greater: stats.TestResult
    welch_less: stats.TestResult
    welch_greater: stats.TestResult

    def to_dict(self) -> dict:
        return {
            "comparison": self.comparison,
            "metric": self.metric,
            "weighting": self.weighting,
            "shuffle_seed": self.shuffle_seed,
            "correlation": self.correlation,
            "normality": self.normality.to_dict(),
            "t_less": self.t_less.to_dict(),
            "t_greater": self.t_greater.to_dict(),
            "u_less": self.u_less.to_dict(),
            "u_greater": self.u_greater.to_dict(),
            "welch_less": self.welch_less.to_dict(),
            "welch_greater": self.welch_greater.to_dict(),
        }


def run_campaign(config: StudyConfig, cells: dict, policies: list[StudyPolicy]) -> list[ComparisonRow]:
    """Compare each MDP policy against the incumbent under its own metric.

    Difference distributions are shuffled before differencing; their
    shuffle seeds derive from the master seed and the row index.
    """
    rows = []
    comparisons = [sp for sp in policies if sp.name != "existing"]
    for row_index, sp in enumerate(comparisons):
        label = "average" if sp.beta is None else beta_label(sp.beta)
        for w_index, weighting in enumerate(("uniform", "stationary")):
            x = cells[(sp.name, label, weighting)]
            y = cells[("existing", label, weighting)]
            seed_int = 1000 + 10 * row_index + w_index + (config.master_seed << 16)
            delta = stats.difference_distribution(x, y, seed_int)
            # correlation of the shuffled pairing validates independence
            rng_x = np.random.Generator(np.random.PCG64(np.random.SeedSequence((seed_int, 0))))
            rng_y = np.random.Generator(np.random.PCG64(np.random.SeedSequence((seed_int, 1))))
            xs = x.values[rng_x.permutation(len(x))]
            ys = y.values[rng_y.permutation(len(y))]
            rows.append(
                ComparisonRow(
                    comparison=sp.name,
                    metric=label,
                    weighting=weighting,
                    shuffle_seed=seed_int,
                    normality=dagostino_k2(delta, zeta=config.zeta),
                    correlation=pearson_correlation(xs, ys),
                    t_less=t_test_one_sample(delta, 0.0, "less", zeta=config.zeta),
                    t_greater=t_test_one_sample(delta, 0.0, "greater", zeta=config.zeta),
                    u_less=mann_whitney_u(x, y, "less", zeta=config.zeta),
                    u_greater=mann_whitney_u(x, y, "greater", zeta=config.zeta),
                    welch_less=welch_t_test(x, y, "less", zeta=config.zeta),
                    welch_greater=welch_t_test(x, y, "greater", zeta=config.zeta),
                )
            )
    return rows


def empirical_summary(cells: dict) -> list[dict]:
    out = []
    for (name, label, initial), samples in sorted(cells.items()):
        v = samples.values
        m2 = float(np.mean((v - v.mean()) ** 2))
        skew = float(np.mean((v - v.mean()) ** 3)) / m2**1.5
        excess_kurt = float(np.mean((v - v.mean()) ** 4)) / m2**2 - 3.0
        out.append({
            "policy": name, "metric": label, "initial": initial,
            "mean": samples.mean(), "std": samples.std(), "min": float(v.min()),
            "max": float(v.max()), "skewness": skew, "excess_kurtosis": excess_kurt,
        })
    return out


def _write_theory_csv(table: dict, betas, path) -> None:
    labels = ["average"] + [beta_label(b) for b in betas]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["policy"] + labels)
        for name, row in table.items():
            writer.writerow([name] + [f"{row[label]:.6f}" for label in labels])


def _write_campaign_csv(rows: list[ComparisonRow], path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([
            "comparison", "metric", "weighting", "k2", "p_normal", "reject_normal",
            "t", "p_t_less", "reject_t_less", "p_t_greater", "reject_t_greater",
            "U", "p_u_less", "reject_u_less", "p_u_greater", "reject_u_greater",
            "welch_t", "p_welch_less", "reject_welch_less",
            "p_welch_greater", "reject_welch_greater", "correlation",
        ])
        for r in rows:
            writer.writerow([
                r.comparison, r.metric, r.weighting,
                f"{r.normality.statistic:.6f}", f"{r.normality.p_value:.6f}",
                r.normality.reject,
                f"{r.t_less.statistic:.6f}", f"{r.t_less.p_value:.6g}", r.t_less.reject,
                f"{r.t_greater.p_value:.6g}", r.t_greater.reject,
                f"{r.u_less.statistic:.1f}", f"{r.u_less.p_value:.6g}", r.u_less.reject,
                f"{r.u_greater.p_value:.6g}", r.u_greater.reject,
                f"{r.welch_less.statistic:.6f}", f"{r.welch_less.p_value:.6g}",
                r.welch_less.reject,
                f"{r.welch_greater.p_value:.6g}", r.welch_greater.reject,
                f"{r.correlation:.6f}",
            ])


def run_study(config: StudyConfig, out_dir, backend: str = "auto") -> dict:
    """Full pipeline; writes every artifact under out_dir and returns them."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    policies = solve_policies(config)
    with open(out / "policies.json", "w") as fh:
        json.dump(
            {sp.name: {"threshold": sp.threshold, "actions": list(sp.policy.actions),
                       "criterion": sp.criterion, "beta": sp.beta, "alpha": sp.alpha}
             for sp in policies},
            fh, indent=2, sort_keys=True)
        fh.write("\n")

    tables = theory_tables(config, policies)
    _write_theory_csv(tables["uniform"], config.betas, out / "uniform_performance.csv")
    _write_theory_csv(tables["stationary"], config.betas, out / "stationary_performance.csv")

    cells = simulate_study(config, policies, backend=backend)
    samples_dir = out / "samples"
    samples_dir.mkdir(exist_ok=True)
    for (name, label, initial), samples in cells.items():
        stem = f"{name}_{label.replace('@', '_')}_{initial}"
        save_sample_set(samples, samples_dir / f"{stem}.csv", samples_dir / f"{stem}.json")

    summary = empirical_summary(cells)
    with open(out / "empirical_summary.csv", "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(summary[0].keys()))
        writer.writeheader()
        for row in summary:
            writer.writerow({k: (f"{v:.6f}" if isinstance(v, float) else v)
                             for k, v in row.items()})

    rows = run_campaign(config, cells, policies)
    _write_campaign_csv(rows, out / "campaign.csv")
    with open(out / "campaign.json", "w") as fh:
        json.dump([r.to_dict() for r in rows], fh, indent=2, sort_keys=True)
        fh.write("\n")

    with open(out / "config.json", "w") as fh:
        json.dump(config.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")

    return {"policies": policies, "tables": tables, "cells": cells,
            "summary": summary, "campaign": rows}
