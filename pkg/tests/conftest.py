import numpy as np
import pytest

from mdpsig.model import MdpModel, Policy
from mdpsig.queueing import QueueParams
from mdpsig.randmdp import load_paper_fixture


@pytest.fixture(scope="session")
def fixture_model() -> MdpModel:
    return load_paper_fixture()


@pytest.fixture(scope="session")
def queue_params() -> QueueParams:
    return QueueParams(lam=1.0, mu=0.95, c=1.0, R=200.0, N=30)


# the three reference policies for the 5-state fixture (unit vector at the
# fourth 1-based position, all-zeros, all-ones)
E4 = Policy((0, 0, 0, 1, 0))
ZEROS = Policy((0, 0, 0, 0, 0))
ONES = Policy((1, 1, 1, 1, 1))


def single_state_model(cost: float = 5.0) -> MdpModel:
    return MdpModel(
        n_states=1,
        actions=((0,),),
        transitions=(np.array([[1.0]]),),
        costs=(np.array([cost]),),
    )


def two_state_cycle(costs=(0.0, 2.0)) -> MdpModel:
    return MdpModel(
        n_states=2,
        actions=((0,), (0,)),
        transitions=(np.array([[0.0, 1.0], [1.0, 0.0]]),),
        costs=(np.asarray(costs, dtype=float),),
    )


def normalized_chain(pm):
    """Exactly row-stochastic copy of a policy chain.

    The shipped fixture keeps its printed 4-decimal rows (sums off by up to
    2e-4); algebraic identities of stochastic matrices need exact rows.
    """
    P = pm.transition / pm.transition.sum(axis=1, keepdims=True)
    return P, np.asarray(pm.cost, dtype=float)


def two_state_two_action() -> MdpModel:
    """Two states, two actions, all rows distinct and strictly positive."""
    return MdpModel(
        n_states=2,
        actions=((0, 1), (0, 1)),
        transitions=(
            np.array([[0.9, 0.1], [0.2, 0.8]]),
            np.array([[0.4, 0.6], [0.7, 0.3]]),
        ),
        costs=(np.array([1.0, 3.0]), np.array([2.0, 0.5])),
    )
