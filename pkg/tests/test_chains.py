import numpy as np
import pytest

from mdpsig.chains import (
    ChainStructureError,
    bias_closed_form,
    cesaro_limit,
    classify_chain,
    drazin_inverse,
    fundamental_matrix,
    fundamental_matrix_alpha,
    limiting_matrix,
    stationary_distribution,
    strongly_connected_components,
)
from mdpsig.model import apply_policy
from mdpsig.solvers import evaluate_average

from conftest import E4, ONES, ZEROS, normalized_chain

PERIOD2 = np.array([[0.0, 1.0], [1.0, 0.0]])


def test_scc_identity_gives_singletons():
    comps = strongly_connected_components(np.eye(3))
    assert sorted(map(tuple, comps)) == [(0,), (1,), (2,)]


def test_scc_two_cycle_is_one_component():
    assert strongly_connected_components(PERIOD2) == [[0, 1]]


def test_scc_fixture_zero_policy(fixture_model):
    pm = apply_policy(fixture_model, ZEROS)
    comps = strongly_connected_components(pm.transition)
    assert [0, 1] in comps


def test_scc_reverse_topological_order_puts_sinks_first():
    # 0 -> 1 -> 2 chain of singletons: the absorbing state must come first
    P = np.array([[0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [0.0, 0.0, 1.0]])
    comps = strongly_connected_components(P)
    assert comps[0] == [2]
    assert comps[-1] == [0]


def test_classify_two_recurrent_classes():
    structure = classify_chain(np.eye(2))
    assert len(structure.recurrent_classes) == 2
    assert not structure.is_unichain
    assert structure.transient_states == ()


def test_classify_fixture_any_policy_unichain_with_transients(fixture_model):
    for policy in (ZEROS, E4, ONES):
        pm = apply_policy(fixture_model, policy)
        structure = classify_chain(pm.transition)
        assert structure.is_unichain
        assert not structure.is_recurrent
        assert structure.recurrent_classes == ((0, 1),)
        assert structure.transient_states == (2, 3, 4)


def test_classify_queue_threshold_chain(queue_params):
    from mdpsig.queueing import build_queue_mdp, threshold_policy

    model, _, _ = build_queue_mdp(queue_params, "average")
    for x_star in (0, 5, 17, 30):
        pm = apply_policy(model, threshold_policy(x_star, queue_params.N))
        structure = classify_chain(pm.transition)
        assert structure.is_unichain
        # reachable set is {0..x*}; everything above drains down
        assert structure.recurrent_classes[0] == tuple(range(x_star + 1))
        assert set(structure.transient_states) == set(range(x_star + 1, queue_params.N + 1))


def test_stationary_period2_is_half_half():
    phi = stationary_distribution(PERIOD2).phi
    np.testing.assert_allclose(phi, [0.5, 0.5], atol=1e-12)


@pytest.mark.parametrize(
    "policy, expected",
    [(E4, [0.0878, 0.9122, 0, 0, 0]), (ONES, [0.4373, 0.5627, 0, 0, 0])],
)
def test_stationary_fixture_reference_values(fixture_model, policy, expected):
    pm = apply_policy(fixture_model, policy)
    phi = stationary_distribution(pm.transition).phi
    np.testing.assert_allclose(phi, expected, atol=5e-5)
    assert phi[2:].max() < 1e-12
    np.testing.assert_allclose(pm.transition.T @ phi, phi, atol=1e-9)


def test_stationary_multichain_raises():
    with pytest.raises(ChainStructureError, match="unichain"):
        stationary_distribution(np.eye(2))


def test_limiting_matrix_trivial_and_rank_one(fixture_model):
    np.testing.assert_array_equal(limiting_matrix(np.array([[1.0]])), [[1.0]])
    pm = apply_policy(fixture_model, E4)
    star = limiting_matrix(pm.transition)
    phi = stationary_distribution(pm.transition).phi
    for row in star:
        np.testing.assert_allclose(row, phi, atol=1e-12)


def test_limiting_matrix_algebra(fixture_model):
    P, _ = normalized_chain(apply_policy(fixture_model, E4))
    star = limiting_matrix(P)
    for product in (P @ star, star @ P, star @ star):
        np.testing.assert_allclose(product, star, atol=1e-9)


def test_cesaro_consistency_by_repeated_squaring(fixture_model):
    # lim P^N exists for these aperiodic unichains; 2^14 via 14 squarings
    pm = apply_policy(fixture_model, E4)
    P = pm.transition / pm.transition.sum(axis=1, keepdims=True)
    star = limiting_matrix(P)
    power = P.copy()
    for _ in range(14):
        power = power @ power
    assert np.abs(power - star).max() < 1e-6


def test_fundamental_matrix_trivial_and_residual(fixture_model):
    np.testing.assert_allclose(fundamental_matrix(np.array([[1.0]])), [[1.0]], atol=1e-14)
    F = fundamental_matrix(PERIOD2)
    star = limiting_matrix(PERIOD2)
    np.testing.assert_allclose(F @ (np.eye(2) - PERIOD2 + star), np.eye(2), atol=1e-12)
    pm = apply_policy(fixture_model, E4)
    phi = stationary_distribution(pm.transition).phi
    np.testing.assert_allclose(phi @ fundamental_matrix(pm.transition), phi, atol=1e-9)


@pytest.mark.parametrize("alpha", [0.2, 0.5, 0.75, 0.99])
def test_discounted_fundamental_matrix_fixes_phi(fixture_model, alpha):
    pm = apply_policy(fixture_model, E4)
    phi = stationary_distribution(pm.transition).phi
    resolvent = fundamental_matrix_alpha(pm.transition, alpha)
    np.testing.assert_allclose(phi @ resolvent, phi, atol=1e-9)


def test_drazin_inverse_properties(fixture_model):
    np.testing.assert_allclose(drazin_inverse(np.array([[1.0]])), [[0.0]], atol=1e-14)
    P, _ = normalized_chain(apply_policy(fixture_model, E4))
    H = drazin_inverse(P)
    star = limiting_matrix(P)
    np.testing.assert_allclose(H @ np.ones(5), np.zeros(5), atol=1e-9)
    np.testing.assert_allclose(star @ H, np.zeros((5, 5)), atol=1e-9)


def test_bias_closed_form_trivial_and_fixture(fixture_model):
    gain, bias = bias_closed_form(np.array([[1.0]]), np.array([5.0]))
    assert gain == pytest.approx(5.0)
    np.testing.assert_allclose(bias, [0.0], atol=1e-12)

    # gain on the literal fixture matches its reference value
    pm = apply_policy(fixture_model, E4)
    assert bias_closed_form(pm.transition, pm.cost)[0] == pytest.approx(1.8267, abs=5e-5)

    # Bellman-consistency checks need exactly stochastic rows
    P, C = normalized_chain(pm)
    gain, bias = bias_closed_form(P, C)
    phi = stationary_distribution(P).phi
    assert abs(phi @ bias) < 1e-9
    from mdpsig.model import PolicyModel

    avg = evaluate_average(PolicyModel(transition=P, cost=C))
    assert avg.gain == pytest.approx(gain, abs=1e-9)
    diff = bias - avg.bias
    assert diff.max() - diff.min() < 1e-8
    residual = np.abs(bias + gain - C - P @ bias).max()
    assert residual < 1e-9


def test_cesaro_limit_multichain():
    np.testing.assert_allclose(cesaro_limit(np.eye(2)), np.eye(2), atol=1e-12)
    # transient state 0 splits evenly between absorbing states 1 and 2
    P = np.array([[0.0, 0.5, 0.5], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]])
    star = cesaro_limit(P)
    np.testing.assert_allclose(star[0], [0.0, 0.5, 0.5], atol=1e-12)
    np.testing.assert_allclose(star[1], [0.0, 1.0, 0.0], atol=1e-12)
    # unichain case must agree with the rank-1 limiting matrix
    np.testing.assert_allclose(cesaro_limit(PERIOD2), limiting_matrix(PERIOD2), atol=1e-12)
