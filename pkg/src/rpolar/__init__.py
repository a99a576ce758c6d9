"""Energy-minimizing rotations for the Cosserat shear-stretch energy.

Computes the relaxed polar decomposition: the rotations R in SO(n) that
globally minimize W(R; D) = ||sym(R D - I)||_F^2 for positive diagonal D,
together with the full critical-point classification, the constructive
block-diagonalization of matrices with symmetric squares, and an
independent multistart/gradient-flow verification oracle.
"""

__version__ = "0.1.0"

from .blockdiag import (
    Block,
    BlockDecomposition,
    block_diagonalize,
    eigsplit_symmetric,
    is_symmetric_square,
    scalar_square_blocks,
)
from .critical import (
    CriticalPoint,
    DiagParams,
    PartitionLabel,
    SubsetLabel,
    as_diag,
    critical_value,
    energy,
    energy_weighted,
    enumerate_critical,
    is_critical,
    realize,
    stationarity_defect,
)
from .errors import (
    Degenerate,
    DegenerateD,
    DimensionMismatch,
    InfeasibleLabel,
    InvalidWeights,
    NonClassicalRange,
    NonInvertibleOrReflective,
    NonIsolatedWarning,
    NotLambdaSquare,
    NotSkew,
    NotSymmetricSquare,
    RpolarError,
    StepTooLarge,
    TiesNotStrictWarning,
    TooLarge,
)
from .linalg import (
    PolarFactors,
    as_rotation,
    exp_skew,
    frob_inner,
    frob_norm,
    frob_norm_sq,
    is_rotation,
    polar_decompose,
    project_rotation,
    random_rotation,
    skew,
    sym,
)
from .oracle import (
    DescentReport,
    DescentResult,
    FlowTrajectory,
    biot_flow,
    brute_force_min,
    descend,
    integrate_flow,
    riemannian_gradient,
)
from .relaxed import (
    MinimizerSet,
    ReflectionInfo,
    SchemeStep,
    SchemeTrace,
    optimal_k,
    reflect_negative,
    rpolar_classical,
    rpolar_diag,
    rpolar_full,
    rpolar_signed_diag,
    scheme_minimize,
)

__all__ = [name for name in dir() if not name.startswith("_")]
