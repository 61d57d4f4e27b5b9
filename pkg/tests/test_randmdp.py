import numpy as np
import pytest

from mdpsig.chains import classify_chain, stationary_distribution
from mdpsig.metrics import eta, eta_discounted_from_average
from mdpsig.model import apply_policy, enumerate_policies, validate_model
from mdpsig.randmdp import RandomMdpSpec, load_paper_fixture, sample_dirichlet, sample_random_mdp
from mdpsig.solvers import evaluate_discounted, policy_iteration_average, policy_iteration_discounted


def test_sample_dirichlet_single_point():
    rng = np.random.default_rng(0)
    np.testing.assert_array_equal(sample_dirichlet([1.0], rng), [1.0])


def test_sample_dirichlet_rejects_nonpositive_theta():
    rng = np.random.default_rng(0)
    with pytest.raises(ValueError):
        sample_dirichlet([1.0, 0.0], rng)


@pytest.mark.parametrize(
    "theta, expected_first",
    [([1.0, 1.0, 1.0], 1.0 / 3.0), ([2.0, 1.0], 2.0 / 3.0)],
)
def test_sample_dirichlet_empirical_mean(theta, expected_first):
    # Dirichlet mean is theta / sum(theta); Monte-Carlo check at 1e5 draws
    rng = np.random.default_rng(1234)
    draws = np.array([sample_dirichlet(theta, rng) for _ in range(100_000)])
    np.testing.assert_allclose(draws.sum(axis=1), 1.0, atol=1e-12)
    assert (draws > 0).all()
    assert draws[:, 0].mean() == pytest.approx(expected_first, abs=0.01)


def test_sample_random_mdp_is_deterministic_in_seed():
    spec = RandomMdpSpec(n_states=4, n_actions=3, n_transient=1, seed=99)
    a = sample_random_mdp(spec)
    b = sample_random_mdp(spec)
    for pa, pb in zip(a.transitions, b.transitions):
        np.testing.assert_array_equal(pa, pb)
    for ca, cb in zip(a.costs, b.costs):
        np.testing.assert_array_equal(ca, cb)


def test_sample_random_mdp_no_transients_everything_recurrent():
    model = sample_random_mdp(RandomMdpSpec(n_states=5, n_actions=2, seed=3))
    assert validate_model(model) == []
    for P in model.transitions:
        assert (P > 0).all()
    for policy in enumerate_policies(model):
        structure = classify_chain(apply_policy(model, policy).transition)
        assert structure.is_recurrent


def test_sample_random_mdp_transient_block_structure():
    spec = RandomMdpSpec(n_states=5, n_actions=2, n_transient=3, seed=11)
    model = sample_random_mdp(spec)
    assert validate_model(model) == []
    for P in model.transitions:
        # the closed 2-state block zeroes the trailing columns, like the
        # shipped fixture's sparsity pattern
        assert np.all(P[:2, 2:] == 0.0)
        assert (P[:2, :2] > 0).all()
        structure = classify_chain(P)
        assert structure.recurrent_classes == ((0, 1),)
        assert structure.transient_states == (2, 3, 4)


def test_transient_states_receive_no_stationary_mass():
    spec = RandomMdpSpec(n_states=4, n_actions=2, n_transient=2, seed=21)
    model = sample_random_mdp(spec)
    for policy in enumerate_policies(model):
        phi = stationary_distribution(apply_policy(model, policy).transition).phi
        assert phi[2:].max() < 1e-12


def test_generated_pipeline_identity_and_rank_agreement():
    """On seeded no-transient models, the discounted optimum at 0.99 and the
    average optimum rank identically and satisfy eta_disc = gain/(1-alpha)."""
    alpha = 0.99
    for seed in range(20):
        model = sample_random_mdp(RandomMdpSpec(n_states=4, n_actions=2, seed=seed))
        pol_avg, avg, _ = policy_iteration_average(model)
        pol_disc, disc, _ = policy_iteration_discounted(model, alpha)
        pm = apply_policy(model, pol_disc)
        phi = stationary_distribution(pm.transition).phi
        direct = eta(phi, disc.values)
        gain = float(phi @ pm.cost)
        assert direct == pytest.approx(eta_discounted_from_average(gain, alpha), rel=1e-8)
        # recurrent chains have a unique gain optimum; ranks must agree
        assert avg.gain <= gain + 1e-8


def test_load_paper_fixture_spot_values(fixture_model):
    assert fixture_model.transitions[0][0][1] == pytest.approx(0.9241, abs=0)
    assert fixture_model.costs[1][1] == pytest.approx(1.6244, abs=0)
    assert fixture_model.n_states == 5
    assert validate_model(fixture_model, row_sum_tol=2.5e-4) == []


def test_invalid_specs_rejected():
    with pytest.raises(ValueError):
        RandomMdpSpec(n_states=3, n_actions=2, n_transient=3)
    with pytest.raises(ValueError):
        RandomMdpSpec(n_states=3, n_actions=2, cost_range=(1.0, 1.0))
    with pytest.raises(ValueError):
        RandomMdpSpec(n_states=3, n_actions=2, dirichlet_theta=0.0)
