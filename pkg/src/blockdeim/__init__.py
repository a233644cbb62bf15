"""Block DEIM index selection and CUR factorization."""

from .cur import (
    CURFactors,
    CurDiagnostics,
    assemble_cur,
    check_error_bound,
    cur_decomposition,
    eta,
    relative_error,
)
from .exceptions import (
    BudgetError,
    ConvergenceError,
    CURError,
    DegeneratePivotError,
    ParameterError,
    ParseError,
    RankDeficiencyError,
    SingularityError,
    UnsupportedFormatError,
)
from .linalg import (
    PivotedQr,
    SvdResult,
    least_squares_solve,
    lu_pivot_indices,
    pivoted_qr,
    spectral_norm,
    truncated_svd,
)
from .selection import (
    METHODS,
    SelectorConfig,
    adaptive_block_deim,
    block_deim_maxvol,
    block_deim_rrqr,
    deim,
    maxvol,
    qdeim,
    select_indices,
)

__version__ = "0.1.0"
