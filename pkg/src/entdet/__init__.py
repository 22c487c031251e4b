"""Determinantal entanglement indicators and rank-one separability for multipartite pure states."""

from .indicators import (
    EPS_ZERO,
    AnalysisReport,
    LevelReport,
    MinorRecord,
    cayley_hyperdet,
    coarse_indicator,
    concurrence,
    full_profile,
    hyperdet_from_minors,
    level_minors,
    minor_count,
    three_tangle,
    total_distinct_minors,
)
from .ketparse import KetSyntaxError, evaluate, format_state, parse, parse_state, tokenize
from .separability import (
    Factorization,
    RankDecision,
    SeparabilityReport,
    classify,
    completely_separable,
    factorize,
    matrix_rank_one,
    partially_separable,
)
from .state import (
    DegenerateStateError,
    DimensionError,
    Flattening,
    PureState,
    StateError,
    ValidationError,
    apply_local_unitary,
    basis_state,
    collapse,
    flatten,
    make_state,
    normalize,
    project_site,
    random_state,
    tensor_product,
)

__version__ = "0.1.0"
