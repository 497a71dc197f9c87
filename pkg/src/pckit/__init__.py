"""pckit: probabilistic circuits with tractable inference, divergence
measures, explicit hardness constructions, threshold pruning, and a
brute-force oracle for desk-scale verification."""

from .circuit import (
    Circuit,
    Leaf,
    LOGICAL,
    PROBABILISTIC,
    Product,
    PropertyReport,
    Sum,
    check_decomposable,
    check_deterministic,
    check_properties,
    check_smooth,
    extract,
    from_logical,
    scope,
    scopes,
    size,
    smooth,
    to_logical,
    validate,
)
from .dense import DenseDistribution
from .errors import (
    BoundViolationError,
    BudgetError,
    DivergenceDomainError,
    EmptySupportError,
    PCError,
    PropertyError,
    ValidationError,
)
from .inference import (
    QueryResult,
    conditional,
    evaluate,
    log_evaluate,
    log_marginal,
    map_query,
    marginal,
    model_count,
    support_contains,
)
from .oracle import OracleBudget, enumerate_distribution

__version__ = "0.1.0"
