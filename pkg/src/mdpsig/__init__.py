"""Finite MDP solvers, scalar system-level policy metrics, and Monte-Carlo
significance testing for queueing admission control."""

from .chains import (
    ChainStructure,
    StationaryDistribution,
    bias_closed_form,
    classify_chain,
    drazin_inverse,
    fundamental_matrix,
    fundamental_matrix_alpha,
    limiting_matrix,
    stationary_distribution,
    strongly_connected_components,
)
from .metrics import (
    MetricReport,
    eta,
    eta_discounted_from_average,
    eta_discounted_multichain,
    metric_report,
    nu,
    xi,
)
from .model import (
    MdpModel,
    Policy,
    PolicyModel,
    apply_policy,
    enumerate_policies,
    load_model,
    save_model,
    validate_model,
)
from .queueing import (
    QueueParams,
    Trajectory,
    build_queue_mdp,
    extract_threshold,
    sample_performance,
    simulate_trajectory,
    simulation_backend,
    threshold_policy,
    trajectory_cost_average,
    trajectory_cost_discounted,
)
from .randmdp import RandomMdpSpec, load_paper_fixture, sample_dirichlet, sample_random_mdp
from .samples import SampleSet, load_sample_set, save_sample_set
from .solvers import (
    AverageSolution,
    BlackwellVerdict,
    DiscountedSolution,
    MembershipResult,
    blackwell_check,
    evaluate_average,
    evaluate_discounted,
    gain_optimal_membership,
    policy_iteration_average,
    policy_iteration_discounted,
)
from .stats import (
    TestResult,
    central_moment,
    dagostino_k2,
    difference_distribution,
    kurtosis,
    mann_whitney_u,
    pearson_correlation,
    skewness,
    t_test_one_sample,
    u_statistic,
    welch_t_test,
)
from .study import StudyConfig, run_study

__version__ = "0.1.0"
