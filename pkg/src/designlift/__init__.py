"""Low-rank Hermitian matrix recovery from rank-one measurements drawn from
complex projective 3-designs, plus numerical checks of the supporting bounds."""

__version__ = "0.1.0"

from .designs import (
    Design,
    DesignCertificate,
    Sphere,
    certify,
    design_accuracy,
    frame_check,
    load_design,
    save_design,
    sphere_sampler,
    stabilizer_design,
    super_normalize,
)
from .errors import (
    CapacityError,
    ConvergenceError,
    FormatError,
    HermitianError,
    HypothesisViolation,
    InvariantError,
    ParameterError,
)
from .linalg import eig_hermitian, rank_split, schatten_norm, svt
from .measurement import (
    MeasurementEnsemble,
    RecoveryProblem,
    adjoint_operator,
    apply_operator,
    sample_ensemble,
    simulate_measurements,
)
from .solver import RecoveryResult, SolverConfig, diagnostics, recover, recover_psd, subgradient_crosscheck
from .symmetric import sym3_trace, sym_projector
