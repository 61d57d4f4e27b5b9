import numpy as np
import pytest

from mdpsig.model import (
    MdpModel,
    ModelError,
    Policy,
    apply_policy,
    enumerate_policies,
    load_model,
    model_from_dict,
    model_to_dict,
    save_model,
    validate_model,
)
from mdpsig.queueing import QueueParams, build_queue_mdp

from conftest import E4, single_state_model, two_state_two_action


def test_identity_chain_is_valid():
    assert validate_model(single_state_model(cost=0.0)) == []


def test_row_sum_violation_is_reported_with_coordinates():
    model = MdpModel(
        n_states=2,
        actions=((0,), (0,)),
        transitions=(np.array([[0.5, 0.4], [0.0, 1.0]]),),
        costs=(np.zeros(2),),
    )
    violations = validate_model(model)
    assert len(violations) == 1
    assert "P[0] row 0" in violations[0]


def test_negative_probability_and_bad_costs_are_reported():
    model = MdpModel(
        n_states=2,
        actions=((0,), (0,)),
        transitions=(np.array([[1.2, -0.2], [0.0, 1.0]]),),
        costs=(np.array([np.inf, 0.0]),),
    )
    violations = validate_model(model)
    assert any("< 0" in v for v in violations)
    assert any("not finite" in v for v in violations)


def test_infeasible_and_missing_actions_are_reported():
    model = MdpModel(
        n_states=2,
        actions=((0, 3), ()),
        transitions=(np.eye(2),),
        costs=(np.zeros(2),),
    )
    violations = validate_model(model)
    assert any("no feasible action" in v for v in violations)
    assert any("lists action 3" in v for v in violations)


def test_published_fixture_rows_sum_to_one_only_at_print_precision(fixture_model):
    # entries are printed to 4 decimals, so three rows are off by ~1e-4
    strict = validate_model(fixture_model)
    assert len(strict) == 3
    assert all("row" in v for v in strict)
    assert validate_model(fixture_model, row_sum_tol=2.5e-4) == []


def test_apply_policy_all_zeros_selects_first_matrices():
    model = two_state_two_action()
    pm = apply_policy(model, Policy((0, 0)))
    np.testing.assert_array_equal(pm.transition, model.transitions[0])
    np.testing.assert_array_equal(pm.cost, model.costs[0])


def test_apply_policy_mixes_rows_per_state():
    model = two_state_two_action()
    pm = apply_policy(model, Policy((1, 0)))
    np.testing.assert_array_equal(pm.transition[0], model.transitions[1][0])
    np.testing.assert_array_equal(pm.transition[1], model.transitions[0][1])
    assert pm.cost[0] == model.costs[1][0]
    assert pm.cost[1] == model.costs[0][1]


def test_apply_policy_on_fixture_blackwell_policy(fixture_model):
    pm = apply_policy(fixture_model, E4)
    np.testing.assert_array_equal(pm.transition[3], fixture_model.transitions[1][3])
    for i in (0, 1, 2, 4):
        np.testing.assert_array_equal(pm.transition[i], fixture_model.transitions[0][i])


def test_apply_policy_rejects_infeasible_action_naming_state():
    model, _, _ = build_queue_mdp(QueueParams(lam=1, mu=0.95, c=1, R=200, N=3))
    with pytest.raises(ModelError, match="state 3"):
        apply_policy(model, Policy((1, 1, 1, 1)))


def test_enumerate_policies_counts():
    assert len(list(enumerate_policies(two_state_two_action()))) == 4
    queue, _, _ = build_queue_mdp(QueueParams(lam=1, mu=0.95, c=1, R=200, N=3))
    assert len(list(enumerate_policies(queue))) == 8  # 2^3 choices, forced at N


def test_enumerate_policies_fixture_and_uniqueness(fixture_model):
    policies = list(enumerate_policies(fixture_model))
    assert len(policies) == 32
    assert len(set(policies)) == 32


def test_enumerate_policies_cap_reports_product():
    model = two_state_two_action()
    with pytest.raises(ModelError, match="4 policies"):
        list(enumerate_policies(model, cap=3))


def test_every_enumerated_policy_yields_row_stochastic_model(fixture_model):
    for policy in enumerate_policies(fixture_model):
        pm = apply_policy(fixture_model, policy)
        np.testing.assert_allclose(pm.transition.sum(axis=1), 1.0, atol=2.5e-4)
        assert (pm.transition >= 0).all()


def test_json_roundtrip(tmp_path):
    model = two_state_two_action()
    path = tmp_path / "model.json"
    save_model(model, path)
    loaded = load_model(path)
    assert loaded.n_states == model.n_states
    assert loaded.actions == model.actions
    for a in range(2):
        np.testing.assert_allclose(loaded.transitions[a], model.transitions[a], atol=1e-15)
        np.testing.assert_array_equal(loaded.costs[a], model.costs[a])


def test_loader_renormalizes_tiny_deviations():
    doc = model_to_dict(two_state_two_action())
    doc["transitions"][0][0][0] += 1e-13
    loaded = model_from_dict(doc)
    np.testing.assert_allclose(loaded.transitions[0].sum(axis=1), 1.0, atol=1e-15)


def test_loader_rejects_large_deviations():
    doc = model_to_dict(two_state_two_action())
    doc["transitions"][0][0][0] += 1e-6
    with pytest.raises(ModelError, match="loader tolerance"):
        model_from_dict(doc)


def test_model_arrays_are_immutable():
    model = two_state_two_action()
    with pytest.raises(ValueError):
        model.transitions[0][0, 0] = 0.3
