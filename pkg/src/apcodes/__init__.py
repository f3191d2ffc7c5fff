"""Alphabet-permutation codes: construction, permutation ensembles and
brute-force list-recovery certification."""

from .alphabet import (
    FieldSpec,
    Permutation,
    field_add,
    field_inv,
    field_mul,
    perm_apply,
    perm_compose,
    perm_inverse,
    perm_validate,
)
from .apcode import (
    CodeMultiset,
    PermMatrix,
    additive_matrix,
    build_code,
    encode,
    generating_sequence,
    intersection_count,
    sample_matrix,
)
from .ensembles import (
    Ensemble,
    IndependenceReport,
    additive_ensemble,
    affine_ensemble,
    enumerate_support,
    fractional_linear_ensemble,
    parse_ensemble,
    random_bits_cost,
    sample,
    swap_or_not_ensemble,
    table_ensemble,
    uniform_ensemble,
)
from .errors import (
    APCodeError,
    CapacityError,
    ConfigurationError,
    DomainError,
    InfeasibleParametersError,
    ParameterError,
    ValidationError,
)
from .estimator import APCodeEncoder, ListRecoveryCertifier
from .harness import ExperimentConfig, derive_seed, run_experiment
from .listrecovery import (
    ListTuple,
    LRParams,
    LRVerdict,
    capacity,
    covers,
    eta_min,
    is_list_recoverable,
    max_intersection_exhaustive,
    max_intersection_randomized,
    rate_and_k,
)
from .potential import (
    failure_bound,
    lambda_trace,
    make_params,
    potential_K,
    verify_recurrence,
    zero_membership_probability,
)

__version__ = "0.1.0"
