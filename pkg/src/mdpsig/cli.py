"""Command-line front end: solve, metrics, simulate, test, randmdp, study."""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import stats
from .metrics import metric_report, reports_to_csv, reports_to_json
from .model import Policy, apply_policy, load_model, model_to_dict, save_model, validate_model
from .queueing import QueueParams, build_queue_mdp, extract_threshold, sample_performance, threshold_policy
from .randmdp import RandomMdpSpec, load_paper_fixture, sample_random_mdp
from .samples import load_sample_set, save_sample_set
from .solvers import evaluate_average, evaluate_discounted, policy_iteration_average, policy_iteration_discounted
from .study import StudyConfig, run_study

FIXTURE_ALPHAS = (0.20, 0.50, 0.75, 0.99)


def _out_dir(args) -> Path:
    # env var may override the output directory, nothing else
    out = os.environ.get("MDPSIG_OUT", None)
    if getattr(args, "out", None):
        out = args.out
    path = Path(out) if out else Path(".")
    path.mkdir(parents=True, exist_ok=True)
    return path


def _queue_params(args, beta=None) -> QueueParams:
    return QueueParams(lam=args.lam, mu=args.mu, c=args.c, R=args.R, N=args.N, beta=beta)


def _add_queue_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--lambda", dest="lam", type=float, default=1.0, help="arrival rate")
    parser.add_argument("--mu", type=float, default=0.95, help="service rate")
    parser.add_argument("--c", type=float, default=1.0, help="holding cost rate per customer")
    parser.add_argument("--R", type=float, default=200.0, help="rejection penalty")
    parser.add_argument("--N", type=int, default=30, help="maximum queue length")


def _load_any_model(args):
    if args.model_file:
        return load_model(args.model_file)
    if getattr(args, "queue", False):
        mode = "discounted" if getattr(args, "beta", None) else "average"
        beta = getattr(args, "beta", None)
        model, _, _ = build_queue_mdp(_queue_params(args, beta), mode)
        return model
    raise SystemExit("either a model file or --queue is required")


def _parse_policy(text: str, model) -> Policy:
    if text.startswith("["):
        return Policy(tuple(json.loads(text)))
    # an integer is a queue threshold
    return threshold_policy(int(text), model.n_states - 1)


def cmd_solve(args) -> int:
    if args.criterion == "disc":
        if args.queue:
            if args.beta is None and args.alpha is None:
                print("discounted queue solve needs --beta (or --alpha)", file=sys.stderr)
                return 2
            params = _queue_params(args, args.beta)
            model, _, alpha = build_queue_mdp(params, "discounted")
            alpha = args.alpha if args.alpha is not None else alpha
        else:
            model = load_model(args.model_file)
            if args.alpha is None:
                print("discounted solve needs --alpha", file=sys.stderr)
                return 2
            alpha = args.alpha
        policy, solution, iterations = policy_iteration_discounted(model, alpha)
        doc = solution.to_dict(policy=policy, iterations=iterations)
    else:
        model = _load_any_model(args)
        policy, solution, iterations = policy_iteration_average(model)
        doc = solution.to_dict(policy=policy, iterations=iterations)
    doc["threshold"] = extract_threshold(policy)
    text = json.dumps(doc, indent=2, sort_keys=True)
    if args.out:
        path = _out_dir(args) / "solution.json"
        path.write_text(text + "\n")
        print(f"wrote {path}")
    else:
        print(text)
    return 0


def cmd_metrics(args) -> int:
    model = _load_any_model(args)
    policy = _parse_policy(args.policy, model)
    report = metric_report(model, policy, alphas=tuple(args.alphas), theta=args.theta)
    out = _out_dir(args)
    reports_to_csv([(args.policy, report)], out / "metrics.csv")
    reports_to_json([(args.policy, report)], out / "metrics.json")
    print(json.dumps(report.to_dict(), indent=2, sort_keys=True))
    return 0


def cmd_simulate(args) -> int:
    config = _study_config(args)
    from .study import simulate_study, solve_policies

    policies = solve_policies(config)
    cells = simulate_study(config, policies)
    out = _out_dir(args)
    for (name, label, initial), samples in cells.items():
        stem = f"{name}_{label.replace('@', '_')}_{initial}"
        save_sample_set(samples, out / f"{stem}.csv", out / f"{stem}.json")
    print(f"wrote {len(cells)} sample sets to {out}")
    return 0


def cmd_test(args) -> int:
    try:
        a = load_sample_set(args.sample_a)
        b = load_sample_set(args.sample_b)
    except OSError as exc:
        print(f"cannot read samples: {exc}", file=sys.stderr)
        return 2
    wanted = args.tests.split(",")
    report = {}
    delta = stats.difference_distribution(a, b, args.shuffle_seed)
    for name in wanted:
        if name == "t":
            report["t_less"] = stats.t_test_one_sample(delta, 0.0, "less", zeta=args.zeta).to_dict()
            report["t_greater"] = stats.t_test_one_sample(delta, 0.0, "greater", zeta=args.zeta).to_dict()
        elif name == "welch":
            report["welch_less"] = stats.welch_t_test(a, b, "less", zeta=args.zeta).to_dict()
            report["welch_greater"] = stats.welch_t_test(a, b, "greater", zeta=args.zeta).to_dict()
        elif name == "u":
            report["u_less"] = stats.mann_whitney_u(a, b, "less", zeta=args.zeta).to_dict()
            report["u_greater"] = stats.mann_whitney_u(a, b, "greater", zeta=args.zeta).to_dict()
        elif name == "normality":
            report["normality_delta"] = stats.dagostino_k2(delta, zeta=args.zeta).to_dict()
        else:
            print(f"unknown test {name!r} (choose from t, welch, u, normality)", file=sys.stderr)
            return 2
    report["correlation"] = stats.pearson_correlation(a.values, b.values)
    text = json.dumps(report, indent=2, sort_keys=True)
    if args.out:
        path = _out_dir(args) / "tests.json"
        path.write_text(text + "\n")
        print(f"wrote {path}")
    else:
        print(text)
    return 0


def _fixture_report(out: Path) -> None:
    """Reference tables for the shipped 5-state fixture."""
    from . import chains

    model = load_paper_fixture()
    named = [
        ("blackwell_e4", Policy((0, 0, 0, 1, 0))),
        ("gain_optimal_zero", Policy((0, 0, 0, 0, 0))),
        ("suboptimal_ones", Policy((1, 1, 1, 1, 1))),
    ]
    rows = []
    for name, policy in named:
        pm = apply_policy(model, policy)
        phi = chains.stationary_distribution(pm.transition).phi
        gain = evaluate_average(pm).gain
        for alpha in FIXTURE_ALPHAS:
            J = evaluate_discounted(pm, alpha).values
            rows.append([name, f"{alpha:.2f}"]
                        + [f"{v:.4f}" for v in J]
                        + [f"{gain:.4f}", f"{gain / (1 - alpha):.4f}"])
        rows.append([name, "phi"] + [f"{p:.4f}" for p in phi] + ["", ""])
    import csv

    with open(out / "fixture_report.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["policy", "alpha", "J1", "J2", "J3", "J4", "J5", "eta", "eta_alpha"])
        writer.writerows(rows)


def cmd_randmdp(args) -> int:
    out = _out_dir(args)
    if args.fixture:
        model = load_paper_fixture()
        save_model(model, out / "random5.json")
        _fixture_report(out)
        print(f"wrote {out / 'random5.json'} and {out / 'fixture_report.csv'}")
        return 0
    spec = RandomMdpSpec(
        n_states=args.states,
        n_actions=args.actions,
        n_transient=args.transient,
        dirichlet_theta=args.theta,
        cost_range=(args.cost_low, args.cost_high),
        seed=args.seed,
    )
    model = sample_random_mdp(spec)
    violations = validate_model(model)
    if violations:
        print("generated model failed validation:", *violations, sep="\n  ", file=sys.stderr)
        return 1
    path = out / f"randmdp_s{args.seed}.json"
    save_model(model, path)
    print(f"wrote {path}")
    return 0


def _study_config(args) -> StudyConfig:
    if getattr(args, "config", None):
        with open(args.config) as fh:
            config = StudyConfig.from_dict(json.load(fh))
    else:
        config = StudyConfig(
            lam=args.lam, mu=args.mu, c=args.c, R=args.R, N=args.N,
            betas=tuple(args.beta) if args.beta else (2e-3, 4e-4),
            incumbent_threshold=args.threshold,
            M=args.M,
            master_seed=args.seed,
            zeta=args.zeta,
        )
    if getattr(args, "T_average", None):
        config = replace(config, T_average=args.T_average)
    if getattr(args, "seed_override", None) is not None:
        config = replace(config, master_seed=args.seed_override)
    return config


def cmd_study(args) -> int:
    config = _study_config(args)
    out = _out_dir(args)
    results = run_study(config, out)
    thresholds = {sp.name: sp.threshold for sp in results["policies"]}
    print(json.dumps({"thresholds": thresholds, "out": str(out)}, indent=2, sort_keys=True))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mdpsig",
        description="Finite MDP solving, scalar policy metrics, and Monte-Carlo significance tests",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="policy iteration on a model file or the queue")
    p.add_argument("model_file", nargs="?", help="model JSON file")
    p.add_argument("--queue", action="store_true", help="build the admission-control queue MDP")
    _add_queue_flags(p)
    crit = p.add_mutually_exclusive_group(required=True)
    crit.add_argument("--avg", dest="criterion", action="store_const", const="avg")
    crit.add_argument("--disc", dest="criterion", action="store_const", const="disc")
    p.add_argument("--alpha", type=float, help="discount factor for --disc")
    p.add_argument("--beta", type=float, help="interest rate for the discounted queue")
    p.add_argument("--out", help="output directory (default: print to stdout)")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("metrics", help="scalar metric report for one policy")
    p.add_argument("model_file", nargs="?")
    p.add_argument("--queue", action="store_true")
    _add_queue_flags(p)
    p.add_argument("--policy", required=True,
                   help="policy as JSON list, or an integer queue threshold")
    p.add_argument("--alphas", type=float, nargs="*", default=[])
    p.add_argument("--theta", type=float, default=None, help="blend weight for xi")
    p.add_argument("--out", help="output directory")
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("simulate", help="sample every study cell to CSV/JSON files")
    _add_queue_flags(p)
    p.add_argument("--config", help="StudyConfig JSON file")
    p.add_argument("--beta", type=float, action="append", help="interest rate (repeatable)")
    p.add_argument("--threshold", type=int, default=17, help="incumbent threshold")
    p.add_argument("--M", type=int, default=5000)
    p.add_argument("--T", dest="T_average", type=float, help="average-metric horizon override")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--zeta", type=float, default=0.05)
    p.add_argument("--out", help="output directory")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("test", help="hypothesis tests between two sample sets")
    p.add_argument("sample_a")
    p.add_argument("sample_b")
    p.add_argument("--tests", default="t,welch,u,normality")
    p.add_argument("--zeta", type=float, default=0.05)
    p.add_argument("--shuffle-seed", type=int, default=0)
    p.add_argument("--out", help="output directory")
    p.set_defaults(func=cmd_test)

    p = sub.add_parser("randmdp", help="generate a random MDP (or dump the shipped fixture)")
    p.add_argument("--fixture", action="store_true", help="emit the 5-state fixture and its tables")
    p.add_argument("--states", type=int, default=5)
    p.add_argument("--actions", type=int, default=2)
    p.add_argument("--transient", type=int, default=0)
    p.add_argument("--theta", type=float, default=1.0)
    p.add_argument("--cost-low", type=float, default=0.0)
    p.add_argument("--cost-high", type=float, default=10.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="output directory")
    p.set_defaults(func=cmd_randmdp)

    p = sub.add_parser("study", help="full pipeline: solve, metrics, simulate, test")
    _add_queue_flags(p)
    p.add_argument("--config", help="StudyConfig JSON file")
    p.add_argument("--beta", type=float, action="append")
    p.add_argument("--threshold", type=int, default=17)
    p.add_argument("--M", type=int, default=5000)
    p.add_argument("--T", dest="T_average", type=float)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--seed-override", dest="seed_override", type=int,
                   help="override the seed from --config")
    p.add_argument("--zeta", type=float, default=0.05)
    p.add_argument("--out", help="output directory")
    p.set_defaults(func=cmd_study)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
