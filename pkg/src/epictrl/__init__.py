"""Optimal treatment/vaccination control of SIR and SEIRS epidemics with
cost-effectiveness ranking of the resulting strategies."""

__version__ = "0.1.0"

from .cea import (  # noqa: E402
    CeaRanking,
    Strategy,
    acer,
    cost_matrix,
    dominance_filter,
    dominates,
    effectiveness,
    icer,
    rank_strategies,
)
from .cost import (  # noqa: E402
    ALL_KINDS,
    CostKind,
    CostSpec,
    CostVector,
    cost_vector,
    evaluate_j,
    pmp_control_law,
    running_cost,
    switching_function,
)
from .mesh import ControlGrid, TimeMesh, quadrature  # noqa: E402
from .models import (  # noqa: E402
    ControlValue,
    ModelSpec,
    ScenarioError,
    SeirsParams,
    SeirsState,
    SirParams,
    SirState,
    seirs_rhs,
    sir_rhs,
    validate_scenario,
)
from .scenario import ScenarioConfig, load_scenario, preset  # noqa: E402
from .solvers import SolveConfig, SolveResult, forward_backward_sweep, projected_gradient, solve  # noqa: E402
from .trajectory import (  # noqa: E402
    AdjointTrajectory,
    Trajectory,
    integrate_adjoint_backward,
    integrate_forward,
)
