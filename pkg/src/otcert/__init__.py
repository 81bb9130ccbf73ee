"""otcert: exact discrete optimal transport with optimality certificates.

Solves two-marginal, multi-marginal and bottleneck transport problems over
finite spaces with extended-real costs, and certifies or refutes optimality
through cyclic monotonicity, connectivity, path-boundedness, potentials and
splitting tuples.  Certificates run in exact rational arithmetic by default;
every negative verdict carries a witness that replays from the raw data.
"""

from .core import (
    ComponentsWitness,
    CostTensor,
    Coupling,
    CycleWitness,
    FarkasWitness,
    InfiniteTupleWitness,
    Measure,
    PermutationWitness,
    Space,
    SplittingViolationWitness,
    SubmeasureWitness,
    SubsetWitness,
    SupportSet,
    TripleWitness,
    Verdict,
    integral_cost,
    linf_cost,
    marginal,
    product_coupling,
    tilt_cost,
    uniform_measure,
    validate_measure,
)
from .errors import (
    BudgetExceeded,
    InfiniteCostError,
    InputError,
    ModeError,
    OtcertError,
    PreconditionFailed,
    ShapeError,
    UndefinedArithmetic,
)
from .generators import gen_geometric_chain, gen_random_multi, gen_random_two_marginal, gen_shift_circle
from .monotone import PairGraph, check_ccm2, check_connecting, check_path_bounded
from .multi import (
    SplittingTuple,
    check_ccm_multi,
    check_finitely_optimal,
    check_icm,
    construct_splitting,
    pairwise_splitting,
    pairwise_sum_tensor,
    verify_splitting,
)
from .numbers import FLOAT, INF, NEG_INF, RATIONAL, TOL
from .potential import (
    InequalitySystemResult,
    PotentialVector,
    c_transform,
    check_compatibility,
    eta_from_support,
    potential_from_system,
    rockafellar_potential,
    solve_inequality_system,
    verify_subgradient,
)
from .problemfile import ProblemFile, instance_hash, load_problem, loads_problem, dump_problem, dumps_problem
from .solve import SolveResult, sample_vertex, sample_vertex_nw, solve_linf, solve_multi, solve_ot2, solve_p

__version__ = "0.1.0"
