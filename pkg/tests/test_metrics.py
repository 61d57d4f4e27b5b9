import numpy as np
import pytest

from mdpsig.chains import stationary_distribution
from mdpsig.metrics import (
    eta,
    eta_discounted_from_average,
    eta_discounted_multichain,
    metric_report,
    nu,
    xi,
)
from mdpsig.model import Policy, PolicyModel, apply_policy, enumerate_policies
from mdpsig.randmdp import RandomMdpSpec, sample_random_mdp
from mdpsig.solvers import (
    evaluate_average,
    evaluate_discounted,
    gain_optimal_membership,
    policy_iteration_average,
    policy_iteration_discounted,
)

from conftest import E4, ONES, single_state_model


def test_eta_worked_examples():
    assert eta([0.1, 0.1, 0.8], [1, 2, 3]) == pytest.approx(2.7)
    assert eta([0.8, 0.1, 0.1], [1.1, 2.1, 3.1]) == pytest.approx(1.4)
    assert eta([1.0], [4.2]) == pytest.approx(4.2)
    with pytest.raises(ValueError, match="length mismatch"):
        eta([0.5, 0.5], [1.0])


def test_nu_examples():
    assert nu([1, 2, 3]) == pytest.approx(2.0)
    assert nu(np.full(7, 3.25)) == pytest.approx(3.25)
    with pytest.raises(ValueError, match="empty"):
        nu([])


def test_xi_blend():
    assert xi(2.0, 4.0, 1.0) == 2.0
    assert xi(2.0, 4.0, 0.0) == 4.0
    assert xi(2.0, 4.0, 0.5) == 3.0
    with pytest.raises(ValueError):
        xi(1.0, 1.0, 1.5)


@pytest.mark.parametrize(
    "gain, alpha, expected",
    [(1.8267, 0.5, 3.6534), (1.8267, 0.99, 182.67), (5.1609, 0.75, 20.6435)],
)
def test_eta_discounted_from_average_reference_values(gain, alpha, expected):
    assert eta_discounted_from_average(gain, alpha) == pytest.approx(expected, abs=1e-3)


def test_eta_discounted_from_average_domain():
    with pytest.raises(ValueError):
        eta_discounted_from_average(1.0, 1.0)


def test_eta_discounted_multichain_reduces_to_unichain_formula(fixture_model):
    from conftest import normalized_chain

    P, C = normalized_chain(apply_policy(fixture_model, E4))
    pm = PolicyModel(transition=P, cost=C)
    phi = stationary_distribution(P).phi
    for alpha in (0.2, 0.6, 0.95):
        direct = eta_discounted_multichain(pm, phi, alpha)
        via_gain = eta_discounted_from_average(float(phi @ C), alpha)
        assert direct == pytest.approx(via_gain, rel=1e-8)


def test_eta_discounted_multichain_absorbing_pair():
    pm = PolicyModel(transition=np.eye(2), cost=np.array([3.0, 7.0]))
    for alpha in (0.3, 0.9):
        assert eta_discounted_multichain(pm, [1.0, 0.0], alpha) == pytest.approx(
            3.0 / (1 - alpha), rel=1e-10
        )


def test_eta_discounted_multichain_fixture_value(fixture_model):
    pm = apply_policy(fixture_model, E4)
    phi = [0.0878, 0.9122, 0.0, 0.0, 0.0]
    assert eta_discounted_multichain(pm, phi, 0.2) == pytest.approx(2.2834, abs=5e-4)


def test_metric_report_single_state():
    model = single_state_model(cost=4.0)
    report = metric_report(model, Policy((0,)), alphas=(0.5,), theta=0.25)
    assert report.eta_avg == pytest.approx(4.0)
    assert report.nu_avg == pytest.approx(4.0)
    assert report.per_alpha[0].eta_disc == pytest.approx(8.0)
    assert report.per_alpha[0].nu_disc == pytest.approx(8.0)
    assert report.xi_value == pytest.approx(4.0)


def test_metric_report_fixture_values(fixture_model):
    report = metric_report(fixture_model, ONES, alphas=(0.2, 0.5))
    assert report.eta_avg == pytest.approx(5.1609, abs=5e-5)
    assert report.per_alpha[0].eta_disc == pytest.approx(6.4511, abs=5e-4)
    assert report.per_alpha[1].eta_disc == pytest.approx(10.3218, abs=5e-4)


def _random_unichain(seed, n_states=5):
    spec = RandomMdpSpec(n_states=n_states, n_actions=2, n_transient=0, seed=seed)
    return sample_random_mdp(spec)


def test_comparison_lemma_on_sampled_models():
    """Discounted stationary rank equals average stationary rank."""
    rng = np.random.default_rng(2024)
    for seed in range(100):
        model = _random_unichain(seed)
        policies = list(enumerate_policies(model))
        i, j = rng.choice(len(policies), size=2, replace=False)
        etas, etas_disc = [], []
        alpha = float(rng.uniform(0.05, 0.99))
        for policy in (policies[i], policies[j]):
            pm = apply_policy(model, policy)
            phi = stationary_distribution(pm.transition).phi
            etas.append(float(phi @ pm.cost))
            etas_disc.append(eta(phi, evaluate_discounted(pm, alpha).values))
        diff_avg = etas[0] - etas[1]
        diff_disc = etas_disc[0] - etas_disc[1]
        if abs(diff_avg) > 1e-10:
            assert np.sign(diff_avg) == np.sign(diff_disc)
        else:
            assert abs(diff_disc) < 1e-6


def test_discounted_optimum_attains_smallest_nu():
    """State-wise optimality forces the uniform metric to be minimal."""
    for seed in range(10):
        model = _random_unichain(seed, n_states=4)
        alpha = 0.8
        _, best, _ = policy_iteration_discounted(model, alpha)
        best_nu = nu(best.values)
        for policy in enumerate_policies(model):
            values = evaluate_discounted(apply_policy(model, policy), alpha).values
            other = nu(values)
            assert best_nu <= other + 1e-8
            if np.abs(values - best.values).max() > 1e-6:
                assert best_nu < other


def test_average_optimum_attains_minimal_eta(fixture_model):
    _, best, _ = policy_iteration_average(fixture_model)
    for policy in enumerate_policies(fixture_model):
        pm = apply_policy(fixture_model, policy)
        gain = evaluate_average(pm).gain
        assert best.gain <= gain + 1e-8
        if abs(gain - best.gain) < 1e-9:
            # ties only inside the minimal-gain family
            membership = gain_optimal_membership(fixture_model, policy)
            assert membership.gain_improved == pytest.approx(best.gain, abs=1e-8)


def test_queue_stationary_discounted_nonimplication(queue_params):
    """The discounted-optimal queue policy does not minimize the stationary
    discounted metric: its eta entry exceeds the average-optimal policy's."""
    from dataclasses import replace

    from mdpsig.queueing import build_queue_mdp, threshold_policy

    beta = 2e-3
    avg_model, gamma, _ = build_queue_mdp(queue_params, "average")
    disc_model, _, alpha = build_queue_mdp(replace(queue_params, beta=beta), "discounted")
    pi_alpha, _, _ = policy_iteration_discounted(disc_model, alpha)
    pi_bar, _, _ = policy_iteration_average(avg_model)

    def eta_disc(policy):
        gain = evaluate_average(apply_policy(avg_model, policy)).gain
        return eta_discounted_from_average(gain, alpha)

    assert eta_disc(pi_alpha) > eta_disc(pi_bar)
