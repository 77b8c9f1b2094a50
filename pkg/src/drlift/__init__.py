"""drlift: DR-submodular maximization on the bounded integer lattice.

Bounds are decomposed into subset-sum-complete part multisets whose size
grows only logarithmically with the bound; selecting parts encodes
lattice points, the lifted objective is set-submodular, and standard
submodular maximization machinery (double greedy, density greedy, the
measured continuous greedy with rounding) applies unchanged.
"""

from .decomposition import (
    CompletenessReport,
    Decomposition,
    DecompositionError,
    RefinedDecomposition,
    decompose,
    decompose_capped,
    decompose_refined,
    naive_copies,
    subset_for,
    verify_completeness,
)
from .errors import (
    InstanceFormatError,
    PreconditionError,
    SizeGuardError,
)
from .lattice import (
    GroundCoordinates,
    LatticeFunction,
    ValidationReport,
    check_dr,
    check_lattice_submodular,
    check_monotone,
)
from .polymatroid import (
    PolymatroidOracle,
    cardinality_rank,
    free_rank,
    partition_rank,
    weighted_coverage_rank,
)
from .reduction import (
    Cardinality,
    Knapsack,
    LiftedKnapsack,
    LiftedPolytope,
    Polymatroid,
    ReducedInstance,
    build,
    eval_g,
    lift_constraint,
)
from .solvers import (
    SolverResult,
    brute_force,
    brute_force_lattice,
    density_greedy,
    double_greedy_deterministic,
    double_greedy_randomized,
    lazy_greedy,
    solve_cardinality,
)
from .continuous import (
    lmo,
    lmo_enumeration,
    maximize_polymatroid,
    measured_continuous_greedy,
    multilinear_exact,
    multilinear_sample,
    round_fractional,
)
from .submodular_check import check_lifted_submodular
from .zoo import (
    desk_instances,
    make_budget_allocation,
    make_concave_linear,
    make_nonmonotone_dr,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
